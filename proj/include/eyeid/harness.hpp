#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eyeid/classifier.hpp"
#include "eyeid/features.hpp"
#include "eyeid/optimize.hpp"
#include "eyeid/preprocess.hpp"
#include "eyeid/segmentation.hpp"

namespace eyeid {

enum class SplitKind { kBySession, kByTimeGap, kRandomSubset };
enum class PredictionUnit { kRecording, kSession };

struct SubgroupFilter {
  std::optional<std::string> gender;
  std::optional<double> age_min;
  std::optional<double> age_max;
  std::optional<std::size_t> participant_count;
  std::size_t runs = 1;
};

struct ExperimentConfig {
  std::filesystem::path manifest;
  IvtParams ivt;
  BlinkParams blink;
  int sg_poly_order = 6;
  int sg_frame_size = 15;
  int derivative_order = 2;
  FusionWeights fusion;
  bool optimize_fusion = false;
  std::size_t tuning_seeds = 5;
  std::size_t seeds = 50;
  std::uint64_t seed_base = 1;
  SplitKind split = SplitKind::kBySession;
  std::vector<std::string> train_sessions{"1"};
  std::vector<std::string> test_sessions{"2"};
  double train_fraction = 0.5;
  std::uint64_t sampling_seed = 20240;
  PredictionUnit unit = PredictionUnit::kRecording;
  std::optional<SubgroupFilter> subgroup;
  std::optional<double> truncate_s;
  TruncateFrom truncate_from = TruncateFrom::kStart;
  bool use_blinks = true;
  RbfnOptions rbfn;

  /// All problems found, not just the first.
  std::vector<std::string> problems() const;
  void validate() const;

  /// Every key with its effective value, one `key = value` per line, sorted.
  std::string snapshot() const;
};

/// Sets one config key from text. Throws UsageError for unknown keys or
/// unparsable values.
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

/// Seed-independent part of the pipeline for one recording.
struct PreparedRecording {
  std::string participant_id;
  std::string session_label;
  std::optional<std::string> gender;
  std::optional<double> age;
  std::vector<FeatureVector> fixations;
  std::vector<FeatureVector> saccades;
  std::vector<FeatureVector> blinks;
  std::size_t raw_fixation_count = 0;  // straight out of IVT
};

/// truncate -> degrees -> invalid runs/blinks -> interpolate -> smooth ->
/// IVT -> min-point merge -> features.
PreparedRecording prepare_recording(const GazeRecording& rec, const ExperimentConfig& cfg);

/// Smooth and segment only (no features); used by the CLI and sweeps.
struct SegmentedRecording {
  std::vector<Segment> segments;  // fixation/saccade tiling of the trimmed recording
  std::vector<Segment> blinks;    // indices in the untrimmed recording
  std::size_t trimmed_leading = 0;
};
SegmentedRecording segment_recording(const GazeRecording& rec, const IvtParams& ivt,
                                     const BlinkParams& blink = {}, int sg_poly_order = 6,
                                     int sg_frame_size = 15);

struct UnitPrediction {
  std::string truth;
  std::optional<Distribution> p_fix;
  std::optional<Distribution> p_sac;
  std::optional<Distribution> p_blink;
};

struct ClassifierDiagnostics {
  std::size_t train_vectors = 0;
  std::size_t test_vectors = 0;
  std::vector<std::size_t> constant_columns;
  bool used = false;
};

/// Posteriors of every test unit for every seed; fusion weights can be
/// re-applied to it without retraining.
struct PredictionSet {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<UnitPrediction>> per_seed;
  ClassifierDiagnostics fixation;
  ClassifierDiagnostics saccade;
  ClassifierDiagnostics blink;
};

PredictionSet collect_predictions(const std::vector<PreparedRecording>& prepared,
                                  const ExperimentConfig& cfg);

/// Classifiers fitted on the train split for one seed, with the z-score
/// parameters applied before training. Absent classifiers have no data.
struct TrainedModels {
  std::vector<std::string> labels;
  std::optional<RbfnModel> fixation;
  std::optional<RbfnModel> saccade;
  std::optional<RbfnModel> blink;
  Normalizer fixation_norm;
  Normalizer saccade_norm;
  Normalizer blink_norm;
};

TrainedModels train_models(const std::vector<PreparedRecording>& prepared,
                           const ExperimentConfig& cfg, std::uint64_t seed);

struct FusionOutcome {
  std::vector<double> per_seed_accuracy;
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;  // (truth, predicted)
  double tie_break = 0.0;
};

FusionOutcome score_fusion(const PredictionSet& set, const FusionWeights& w,
                           std::size_t max_seeds = static_cast<std::size_t>(-1));

/// Population standard deviation over sqrt(k); 0 for a single value.
std::pair<double, double> mean_and_sem(const std::vector<double>& values);

struct ExperimentReport {
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_accuracy;
  double mean_accuracy = 0.0;
  double sem = 0.0;
  std::size_t predictions_per_seed = 0;
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
  FusionWeights weights;
  std::optional<TunedWeights> tuning;
  ClassifierDiagnostics fixation;
  ClassifierDiagnostics saccade;
  ClassifierDiagnostics blink;
  std::vector<std::string> notes;
  std::string config_snapshot;

  std::string summary_line() const;
  std::string to_text() const;
  /// `seed,accuracy` rows followed by summary rows; byte-stable.
  std::string to_csv() const;
};

ExperimentReport run_experiment(const std::vector<GazeRecording>& recordings,
                                const ExperimentConfig& cfg);
ExperimentReport run_experiment(const std::vector<PreparedRecording>& prepared,
                                const ExperimentConfig& cfg);

std::vector<PreparedRecording> prepare_all(const std::vector<GazeRecording>& recordings,
                                           const ExperimentConfig& cfg);

struct AblationRow {
  int order = 0;
  std::size_t feature_count = 0;
  ExperimentReport report;
};

std::vector<AblationRow> ablate_derivative_orders(const std::vector<GazeRecording>& recordings,
                                                  const ExperimentConfig& cfg,
                                                  const std::vector<int>& orders);
std::string ablation_table(const std::vector<AblationRow>& rows);

/// Repeatedly draws a participant subset honouring `cfg.subgroup` (with the
/// sampling seed) and pools the per-seed accuracies of all runs.
ExperimentReport subgroup_resample(const std::vector<GazeRecording>& recordings,
                                   const ExperimentConfig& cfg);

/// Runs the experiment at `ivt` and reports accuracy together with the total
/// IVT fixation count over the training recordings.
SweepPoint evaluate_ivt(const std::vector<GazeRecording>& recordings, ExperimentConfig cfg,
                        const IvtParams& ivt);

/// Total IVT fixation count over the training recordings at threshold `vt`.
std::size_t training_fixation_count(const std::vector<GazeRecording>& recordings,
                                    const ExperimentConfig& cfg, double vt);

std::string sweep_table(const std::vector<SweepPoint>& table);

}  // namespace eyeid
