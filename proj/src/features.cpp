#include "eyeid/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eyeid/error.hpp"
#include "parallel.hpp"
#include "eyeid/stats.hpp"

namespace eyeid {

namespace {

constexpr std::array<const char*, 14> kBasicNames = {
    "duration", "path_length", "skew_x",    "skew_y",   "kurt_x",    "kurt_y",
    "std_x",    "std_y",       "ratio",     "angle",    "amplitude", "dispersion",
    "dist_prev", "angle_prev"};

constexpr std::array<const char*, 6> kStatNames = {"mean", "median", "max",
                                                   "std",  "skew",   "kurt"};

constexpr std::array<const char*, kMaxDerivativeOrder + 1> kOrderNames = {
    "position", "velocity", "acceleration", "jerk", "jounce", "crackle"};

constexpr std::array<const char*, kBlinkFeatureCount> kBlinkNames = {
    "blink_duration", "blink_count",        "blink_mean_duration", "blink_total_duration",
    "blink_min_duration", "blink_max_duration", "blink_var_duration"};

std::vector<double> forward_difference(const std::vector<double>& xs, double t) {
  if (xs.size() < 2) return {};
  std::vector<double> out(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) out[i] = (xs[i + 1] - xs[i]) / t;
  return out;
}

void append(std::vector<double>& out, const M3S2K& stats) {
  out.insert(out.end(), stats.begin(), stats.end());
}

}  // namespace

DerivativeCascade derivative_cascade(const Segment& seg, double sample_rate_hz,
                                     int max_order) {
  if (max_order < 0 || max_order > kMaxDerivativeOrder) {
    throw UsageError("derivative order must lie in 0..5");
  }
  const std::size_t n = seg.points.size();
  if (n < static_cast<std::size_t>(max_order) + 1 || n == 0) {
    throw DataError("segment of " + std::to_string(n) +
                    " points is too short for derivative order " +
                    std::to_string(max_order));
  }
  const double t = 1.0 / sample_rate_hz;
  DerivativeCascade c;
  c.max_order = max_order;

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = seg.points[i].x;
    ys[i] = seg.points[i].y;
  }
  c.distances.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c.distances[i] = std::sqrt((xs[i + 1] - xs[i]) * (xs[i + 1] - xs[i]) +
                               (ys[i + 1] - ys[i]) * (ys[i + 1] - ys[i]));
  }
  c.angular[1].resize(c.distances.size());
  for (std::size_t i = 0; i < c.distances.size(); ++i) c.angular[1][i] = c.distances[i] / t;
  for (int k = 2; k <= max_order; ++k) c.angular[k] = forward_difference(c.angular[k - 1], t);

  if (max_order >= 1) {
    c.axis_x[1] = forward_difference(xs, t);
    c.axis_y[1] = forward_difference(ys, t);
    for (int k = 2; k <= max_order; ++k) {
      c.axis_x[k] = forward_difference(c.axis_x[k - 1], t);
      c.axis_y[k] = forward_difference(c.axis_y[k - 1], t);
    }
  }
  return c;
}

FeatureSchema FeatureSchema::for_order(int derivative_order) {
  if (derivative_order < 0 || derivative_order > kMaxDerivativeOrder) {
    throw UsageError("derivative order must lie in 0..5");
  }
  return FeatureSchema(derivative_order, false);
}

FeatureSchema FeatureSchema::blink() { return FeatureSchema(0, true); }

std::size_t FeatureSchema::feature_count() const {
  if (blink_) return kBlinkFeatureCount;
  if (order_ == 0) return kBasicNames.size();
  return kBasicNames.size() + 1 + 18 * static_cast<std::size_t>(order_);
}

std::vector<std::string> FeatureSchema::names() const {
  if (blink_) return {kBlinkNames.begin(), kBlinkNames.end()};
  std::vector<std::string> out(kBasicNames.begin(), kBasicNames.end());
  if (order_ == 0) return out;
  out.emplace_back("avg_velocity");
  for (int k = 1; k <= order_; ++k) {
    for (const char* chain : {"angular_", "x_", "y_"}) {
      for (const char* stat : kStatNames) {
        out.push_back(std::string(chain) + kOrderNames[static_cast<std::size_t>(k)] + "_" + stat);
      }
    }
  }
  return out;
}

Point2 centroid(const Segment& seg) {
  Point2 c;
  if (seg.points.empty()) return c;
  for (const auto& p : seg.points) {
    c.x += p.x;
    c.y += p.y;
  }
  c.x /= static_cast<double>(seg.points.size());
  c.y /= static_cast<double>(seg.points.size());
  return c;
}

FeatureVector segment_features(const Segment& seg, const DerivativeCascade& cascade,
                               const std::optional<Point2>& prev_centroid,
                               const FeatureSchema& schema) {
  if (schema.is_blink()) throw UsageError("segment_features needs a fixation/saccade schema");
  if (cascade.max_order < schema.derivative_order()) {
    throw UsageError("derivative cascade is shallower than the feature schema");
  }
  if (seg.points.empty()) throw DataError("segment without points");

  const std::size_t n = seg.points.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = seg.points[i].x;
    ys[i] = seg.points[i].y;
  }
  const Moments mx = moments(xs);
  const Moments my = moments(ys);
  const auto& speed = cascade.velocity();
  const double max_speed = speed.empty() ? 0.0 : *std::max_element(speed.begin(), speed.end());
  const auto [min_x, max_x] = std::minmax_element(xs.begin(), xs.end());
  const auto [min_y, max_y] = std::minmax_element(ys.begin(), ys.end());
  const double dx = xs.back() - xs.front();
  const double dy = ys.back() - ys.front();

  FeatureVector fv;
  fv.kind = seg.kind;
  auto& v = fv.values;
  v.reserve(schema.feature_count());
  v.push_back(seg.duration_s);
  v.push_back(std::accumulate(cascade.distances.begin(), cascade.distances.end(), 0.0));
  v.push_back(mx.skewness);
  v.push_back(my.skewness);
  v.push_back(mx.kurtosis);
  v.push_back(my.kurtosis);
  v.push_back(std::sqrt(mx.variance));
  v.push_back(std::sqrt(my.variance));
  v.push_back(seg.duration_s > 0.0 ? max_speed / seg.duration_s : 0.0);
  v.push_back(std::atan2(dy, dx));
  v.push_back(std::hypot(dx, dy));
  v.push_back((*max_x - *min_x) + (*max_y - *min_y));
  if (prev_centroid) {
    const Point2 c = centroid(seg);
    v.push_back(std::hypot(c.x - prev_centroid->x, c.y - prev_centroid->y));
    v.push_back(std::atan2(c.y - prev_centroid->y, c.x - prev_centroid->x));
  } else {
    v.push_back(0.0);
    v.push_back(0.0);
  }

  if (schema.derivative_order() >= 1) {
    v.push_back(moments(speed).mean);
    for (int k = 1; k <= schema.derivative_order(); ++k) {
      append(v, m3s2k(cascade.angular[static_cast<std::size_t>(k)]));
      append(v, m3s2k(cascade.axis_x[static_cast<std::size_t>(k)]));
      append(v, m3s2k(cascade.axis_y[static_cast<std::size_t>(k)]));
    }
  }
  return fv;
}

namespace {

// Centroid of the previous same-kind segment for every index.
std::vector<std::optional<Point2>> previous_centroids(const std::vector<Segment>& segments) {
  std::vector<std::optional<Point2>> prev(segments.size());
  std::optional<Point2> last_fix, last_sac;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto& last = segments[i].kind == SegmentKind::kFixation ? last_fix : last_sac;
    prev[i] = last;
    last = centroid(segments[i]);
  }
  return prev;
}

FeatureVector one(const Segment& seg, const std::optional<Point2>& prev,
                  double sample_rate_hz, const FeatureSchema& schema,
                  const std::string& participant_id) {
  const auto cascade = derivative_cascade(seg, sample_rate_hz, schema.derivative_order());
  FeatureVector fv = segment_features(seg, cascade, prev, schema);
  fv.participant_id = participant_id;
  return fv;
}

}  // namespace

std::vector<FeatureVector> extract_segment_features_serial(
    const std::vector<Segment>& segments, double sample_rate_hz,
    const FeatureSchema& schema, const std::string& participant_id) {
  const auto prev = previous_centroids(segments);
  std::vector<FeatureVector> out;
  out.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out.push_back(one(segments[i], prev[i], sample_rate_hz, schema, participant_id));
  }
  return out;
}

std::vector<FeatureVector> extract_segment_features(const std::vector<Segment>& segments,
                                                    double sample_rate_hz,
                                                    const FeatureSchema& schema,
                                                    const std::string& participant_id) {
  const auto prev = previous_centroids(segments);
  std::vector<FeatureVector> out(segments.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(segments.size()), [&](std::ptrdiff_t i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = one(segments[idx], prev[idx], sample_rate_hz, schema, participant_id);
  });
  return out;
}

std::array<double, kBlinkFeatureCount> blink_features(const std::vector<Segment>& blinks,
                                                      std::size_t current) {
  if (current >= blinks.size()) throw UsageError("blink index out of range");
  std::vector<double> d;
  d.reserve(blinks.size());
  for (const auto& b : blinks) d.push_back(b.duration_s);
  const Moments m = moments(d);
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  return {d[current], static_cast<double>(d.size()), m.mean, total, *mn, *mx, m.variance};
}

std::vector<FeatureVector> blink_feature_vectors(const std::vector<Segment>& blinks,
                                                 const std::string& participant_id) {
  std::vector<FeatureVector> out;
  out.reserve(blinks.size());
  for (std::size_t i = 0; i < blinks.size(); ++i) {
    const auto f = blink_features(blinks, i);
    out.push_back({{f.begin(), f.end()}, SegmentKind::kBlink, participant_id});
  }
  return out;
}

std::vector<FeatureVector> Normalizer::apply(std::vector<FeatureVector> vectors) const {
  for (auto& fv : vectors) {
    if (fv.values.size() != mean.size()) {
      throw ComputeError("normalizer applied to vectors of a different width");
    }
    for (std::size_t j = 0; j < mean.size(); ++j) {
      fv.values[j] = (fv.values[j] - mean[j]) / scale[j];
    }
  }
  return vectors;
}

NormalizedSet zscore_fit_transform(std::vector<FeatureVector> train) {
  if (train.empty()) throw DataError("cannot fit a normalizer on no vectors");
  const std::size_t cols = train.front().values.size();
  Normalizer norm;
  norm.mean.assign(cols, 0.0);
  norm.scale.assign(cols, 1.0);
  std::vector<double> column(train.size());
  for (std::size_t j = 0; j < cols; ++j) {
    bool identical = true;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train[i].values.size() != cols) throw DataError("ragged feature matrix");
      column[i] = train[i].values[j];
      identical = identical && column[i] == column[0];
    }
    if (identical) {
      norm.mean[j] = column[0];
      norm.constant_columns.push_back(j);
      continue;
    }
    const Moments m = moments(column);
    norm.mean[j] = m.mean;
    if (m.variance > 0.0) {
      norm.scale[j] = std::sqrt(m.variance);
    } else {
      norm.constant_columns.push_back(j);
    }
  }
  auto normalized = norm.apply(std::move(train));
  return {std::move(norm), std::move(normalized)};
}

std::vector<FeatureVector> zscore_apply(const Normalizer& norm,
                                        std::vector<FeatureVector> test) {
  return norm.apply(std::move(test));
}

}  // namespace eyeid
