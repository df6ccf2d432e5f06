#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "eyeid/classifier.hpp"
#include "eyeid/segmentation.hpp"

namespace eyeid {

struct SimplexConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.05;
  int max_iterations = 10000;
  double f_tol = 1e-12;
  double x_tol = 1e-10;

  void validate() const;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  // Best objective after each iteration; non-increasing.
  std::vector<double> best_history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex. The initial simplex is x0 plus `initial_step` along each
/// axis. Stops when the spread of vertex values falls below f_tol, the
/// simplex diameter below x_tol, or after max_iterations.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          const SimplexConfig& cfg = {});

/// Classical coefficients with a budget suited to accuracy objectives.
inline SimplexConfig fusion_simplex_config() {
  SimplexConfig cfg;
  cfg.max_iterations = 200;
  cfg.f_tol = 1e-9;
  cfg.x_tol = 1e-6;
  return cfg;
}

/// What a weight evaluation reports: accuracy in [0,1] and a secondary score
/// in [0,1] (mean normalized posterior of the true class) used only to break
/// ties between weight settings of equal accuracy.
struct FusionScore {
  double accuracy = 0.0;
  double tie_break = 0.0;
};

using FusionEvaluator = std::function<FusionScore(const FusionWeights&)>;

struct TunedWeights {
  FusionWeights weights;
  FusionWeights initial;
  double accuracy = 0.0;
  double initial_accuracy = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead over softplus-reparameterised weights (always non-negative).
/// Evaluations are cached by weight triple. The start point is returned
/// unless a strictly better one was found.
TunedWeights tune_fusion_weights(const FusionEvaluator& eval, const FusionWeights& w0,
                                 const SimplexConfig& cfg = fusion_simplex_config());

struct SweepPlan {
  double vt_min = 10.0;
  double vt_max = 100.0;
  double vt_coarse_step = 10.0;
  double vt_fine_step = 1.0;
  double mfd_min = 0.050;
  double mfd_max = 0.150;
  double mfd_coarse_step = 0.010;
  double mfd_fine_step = 0.001;
  double stage1_mfd = 0.100;
  double stage2_vt = 50.0;  // used only when the VT stage is skipped

  void validate() const;
};

struct SweepPoint {
  double vt = 0.0;
  double mfd = 0.0;
  std::size_t fixation_count = 0;
  double accuracy_mean = 0.0;
  double accuracy_sem = 0.0;
};

using SweepRun = std::function<SweepPoint(const IvtParams&)>;

enum class SweepStage { kVelocity, kDuration, kBoth };

struct SweepResult {
  std::vector<SweepPoint> table;  // in evaluation order
  SweepPoint best;
};

/// Stage 1 scans VT at the fixed stage-1 MFD (coarse grid, then fine grid
/// around the coarse winner); stage 2 scans MFD the same way at the best VT.
/// Grid points of one pass are evaluated in parallel, so `run` must be
/// thread-safe. Ties resolve to the earliest point in the table.
SweepResult sweep_ivt(const SweepRun& run, const SweepPlan& plan,
                      SweepStage stage = SweepStage::kBoth);

/// Inclusive grid lo, lo+step, ... <= hi (with a small tolerance).
std::vector<double> grid(double lo, double hi, double step);

struct PeakFixation {
  double peak_vt = 0.0;
  std::size_t peak_count = 0;
  std::vector<double> candidates;
  std::vector<std::pair<double, std::size_t>> counts;
};

/// VT maximising the total fixation count (lowest VT on ties) and the grid
/// points within +-neighborhood steps of it.
PeakFixation peak_fixation_vt(const std::function<std::size_t(double)>& fixation_count,
                              double vt_min, double vt_max, double step,
                              std::size_t neighborhood);

}  // namespace eyeid
