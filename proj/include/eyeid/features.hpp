#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eyeid/segmentation.hpp"

namespace eyeid {

inline constexpr int kMaxDerivativeOrder = 5;
inline constexpr std::size_t kBlinkFeatureCount = 7;

/// Forward-difference chains of one segment. Index k of each array holds the
/// k-th derivative (1 = velocity ... 5 = crackle); index 0 is unused. The
/// angular chain differentiates the Euclidean speed, the per-axis chains
/// difference the coordinates directly (signed).
struct DerivativeCascade {
  int max_order = 0;
  std::vector<double> distances;
  std::array<std::vector<double>, kMaxDerivativeOrder + 1> angular;
  std::array<std::vector<double>, kMaxDerivativeOrder + 1> axis_x;
  std::array<std::vector<double>, kMaxDerivativeOrder + 1> axis_y;

  const std::vector<double>& velocity() const { return angular[1]; }
  const std::vector<double>& acceleration() const { return angular[2]; }
  const std::vector<double>& jerk() const { return angular[3]; }
  const std::vector<double>& jounce() const { return angular[4]; }
  const std::vector<double>& crackle() const { return angular[5]; }
};

/// Angular velocity is always produced (it feeds the basic features); higher
/// orders up to `max_order`. Needs at least max_order + 1 points.
DerivativeCascade derivative_cascade(const Segment& seg, double sample_rate_hz,
                                     int max_order);

/// Layout of a feature vector. Fixation/saccade schemas are indexed by the
/// highest derivative order (0..5); the blink schema is separate.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  static FeatureSchema for_order(int derivative_order);
  static FeatureSchema blink();

  bool is_blink() const { return blink_; }
  int derivative_order() const { return order_; }
  std::size_t feature_count() const;
  std::vector<std::string> names() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  FeatureSchema(int order, bool blink) : order_(order), blink_(blink) {}
  int order_ = 0;
  bool blink_ = false;
};

struct FeatureVector {
  std::vector<double> values;
  SegmentKind kind = SegmentKind::kFixation;
  std::string participant_id;
};

/// Features for one fixation or saccade in table order: 14 basic features,
/// then (order >= 1) average velocity and M3S2K blocks of the angular, x and
/// y chains for each order. `prev_centroid` is the centroid of the previous
/// segment of the same kind; without one the two relational features are 0.
FeatureVector segment_features(const Segment& seg, const DerivativeCascade& cascade,
                               const std::optional<Point2>& prev_centroid,
                               const FeatureSchema& schema);

Point2 centroid(const Segment& seg);

/// Feature vectors for every fixation/saccade of one recording, in order.
/// OpenMP over segments; `_serial` is the reference path.
std::vector<FeatureVector> extract_segment_features(const std::vector<Segment>& segments,
                                                    double sample_rate_hz,
                                                    const FeatureSchema& schema,
                                                    const std::string& participant_id);
std::vector<FeatureVector> extract_segment_features_serial(
    const std::vector<Segment>& segments, double sample_rate_hz,
    const FeatureSchema& schema, const std::string& participant_id);

/// (own duration, count, mean, total, min, max, population variance) where
/// all but the first aggregate every blink in `blinks`.
std::array<double, kBlinkFeatureCount> blink_features(const std::vector<Segment>& blinks,
                                                      std::size_t current);

/// One vector per blink; empty input gives empty output.
std::vector<FeatureVector> blink_feature_vectors(const std::vector<Segment>& blinks,
                                                 const std::string& participant_id);

/// Column-wise z-score with population statistics fitted on training data.
/// Zero-variance columns are centred only (divided by 1) and flagged.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<std::size_t> constant_columns;

  std::vector<FeatureVector> apply(std::vector<FeatureVector> vectors) const;
};

struct NormalizedSet {
  Normalizer normalizer;
  std::vector<FeatureVector> vectors;
};

NormalizedSet zscore_fit_transform(std::vector<FeatureVector> train);
std::vector<FeatureVector> zscore_apply(const Normalizer& norm,
                                        std::vector<FeatureVector> test);

}  // namespace eyeid
