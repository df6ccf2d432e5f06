#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eyeid/features.hpp"

namespace eyeid {

/// Class posteriors in the order of the producing model's class labels.
using Distribution = std::vector<double>;

struct RbfnOptions {
  int centers_per_class = 2;
  int width_neighbors = 2;
  double ridge = 1e-6;
  double min_width = 1e-6;
  int max_kmeans_iterations = 100;
};

/// Gaussian RBF network: per-class k-means centers, per-center widths, and a linear
/// read-out (last weight row is the bias) followed by a softmax.
struct RbfnModel {
  Eigen::MatrixXd centers;         // K x D
  std::vector<double> widths;      // K
  Eigen::MatrixXd output_weights;  // (K + 1) x C
  std::vector<std::string> class_labels;
  std::uint64_t seed = 0;
  FeatureSchema schema;

  std::size_t dimension() const { return static_cast<std::size_t>(centers.cols()); }
  std::size_t class_count() const { return class_labels.size(); }

  bool operator==(const RbfnModel& other) const;
};

/// Labels are the vectors' participant ids, sorted. Deterministic in `seed`.
RbfnModel rbfn_train(const std::vector<FeatureVector>& train, std::uint64_t seed,
                     const RbfnOptions& options = {},
                     const FeatureSchema& schema = FeatureSchema::for_order(0));

Distribution rbfn_predict(const RbfnModel& model, const std::vector<double>& values);

/// Row i holds the posterior of vectors[i].
Eigen::MatrixXd rbfn_predict_all(const RbfnModel& model,
                                 const std::vector<FeatureVector>& vectors);

/// Mean of per-segment posteriors; nullopt (classifier absent) when empty.
std::optional<Distribution> aggregate_segments(const RbfnModel& model,
                                               const std::vector<FeatureVector>& segments);

/// Re-expresses `dist` (ordered by `from`) in the `to` label order; labels
/// missing from `from` get probability 0.
Distribution align_distribution(const Distribution& dist,
                                const std::vector<std::string>& from,
                                const std::vector<std::string>& to);

struct FusionWeights {
  double w_fix = 0.5;
  double w_sac = 0.5;
  double w_blink = 0.0;

  void validate() const;
  bool operator==(const FusionWeights&) const = default;
};

struct FusionResult {
  std::size_t predicted = 0;
  Distribution p_final;
};

/// p_final = w_fix p_fix + w_sac p_sac + w_blink p_blink over the present
/// classifiers; argmax with ties to the lowest index. Weights are used as
/// given (no renormalisation).
FusionResult fuse(const std::optional<Distribution>& p_fix,
                  const std::optional<Distribution>& p_sac,
                  const std::optional<Distribution>& p_blink, const FusionWeights& w);

/// Text container, versioned, floats in hex for bit-exact reload.
void save_model(const RbfnModel& model, std::ostream& out);
RbfnModel load_model(std::istream& in);

}  // namespace eyeid
