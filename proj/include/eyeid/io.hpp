#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eyeid/features.hpp"
#include "eyeid/optimize.hpp"
#include "eyeid/preprocess.hpp"
#include "eyeid/segmentation.hpp"

namespace eyeid {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// `key = value` lines grouped into `[section]` blocks; '#' starts a comment.
/// Keys before the first header belong to the section named "".
struct KeyValueSection {
  std::string name;
  std::map<std::string, std::string> values;
  int line = 0;

  std::optional<std::string> get(const std::string& key) const;
};

std::vector<KeyValueSection> parse_key_value(std::istream& in);

/// Canonical recording CSV: header `t_s,x,y,valid`, missing coordinates as
/// empty fields. Only the samples are read; metadata comes from the manifest.
std::vector<GazeSample> read_recording_csv(std::istream& in);
void write_recording_csv(const GazeRecording& rec, std::ostream& out);

struct DatasetEntry {
  std::string file;
  std::string participant_id;
  std::string session_label;
  std::optional<std::string> gender;
  std::optional<double> age;
};

struct DatasetManifest {
  CoordinateSpace space = CoordinateSpace::kDegrees;
  double sample_rate_hz = 250.0;
  ScreenGeometry geometry;
  bool has_validity = true;
  std::vector<DatasetEntry> entries;
  std::filesystem::path base_dir;  // recording paths are relative to this
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, std::ostream& out);

GazeRecording load_recording(const DatasetManifest& manifest, const DatasetEntry& entry);
std::vector<GazeRecording> load_dataset(const DatasetManifest& manifest);

/// `kind,start_index,end_index,duration_s`
void write_segment_dump(const std::vector<Segment>& segments, std::ostream& out);

/// `participant_id,segment_kind,<schema names>`
void write_feature_matrix(const std::vector<FeatureVector>& vectors,
                          const FeatureSchema& schema, std::ostream& out);

/// `vt_deg_s,mfd_s,fixation_count,accuracy_mean,accuracy_sem`
void write_sweep_csv(const std::vector<SweepPoint>& table, std::ostream& out);

}  // namespace eyeid
