#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "eyeid/preprocess.hpp"

namespace eyeid {

enum class SegmentKind { kFixation, kSaccade, kBlink };

std::string_view to_string(SegmentKind kind);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Contiguous labeled run of samples, indices inclusive. Blink segments carry
/// no points (their samples are invalid).
struct Segment {
  SegmentKind kind = SegmentKind::kFixation;
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  std::vector<Point2> points;
  double duration_s = 0.0;

  std::size_t count() const { return end_index - start_index + 1; }
};

struct IvtParams {
  double velocity_threshold_deg_s = 50.0;
  double min_fixation_duration_s = 0.100;

  void validate() const;
};

struct BlinkParams {
  double min_duration_s = 0.080;
  double max_duration_s = 0.500;

  void validate() const;
};

/// v_i = |P_{i+1} - P_i| * rate in degree coordinates; length n-1.
std::vector<double> pointwise_angular_velocity(const GazeRecording& rec);

/// Velocity-threshold segmentation with minimum fixation duration. Velocity
/// v_i labels sample i; the final sample inherits the label of its
/// predecessor. Fixations shorter than the MFD become saccades and fuse with
/// their neighbours. Output alternates kinds and tiles 0..n-1, except when the
/// whole recording is a single sub-MFD fixation (then empty).
std::vector<Segment> ivt_segment(const GazeRecording& rec, const IvtParams& params);

/// Invalid runs whose duration lies inside [min, max] become blink segments.
std::vector<Segment> extract_blinks(const std::vector<InvalidRun>& runs,
                                    const BlinkParams& params = {});

/// Merges segments with fewer than `min_points` samples (saccades: at least 3)
/// into the following segment, or the preceding one at the end of the list,
/// then re-fuses equal neighbours. Throws DataError if everything collapses
/// into one segment still below its floor.
std::vector<Segment> enforce_min_points(std::vector<Segment> segments,
                                        std::size_t min_points);

std::size_t count_kind(const std::vector<Segment>& segments, SegmentKind kind);

}  // namespace eyeid
