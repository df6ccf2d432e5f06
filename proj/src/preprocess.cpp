#include "eyeid/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "eyeid/error.hpp"
#include "eyeid/kernels.hpp"

namespace eyeid {

void GazeRecording::validate() const {
  if (!std::isfinite(sample_rate_hz) || sample_rate_hz <= 0.0) {
    throw DataError("recording " + participant_id + "/" + session_label +
                    ": sample rate must be positive");
  }
  if (samples.size() < 2) {
    throw DataError("recording " + participant_id + "/" + session_label +
                    ": at least two samples required");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw DataError("recording " + participant_id + "/" + session_label +
                      ": timestamps must be strictly increasing (sample " +
                      std::to_string(i) + ")");
    }
  }
  const double mean_dt =
      (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  if (std::abs(mean_dt * sample_rate_hz - 1.0) > 0.01) {
    throw DataError("recording " + participant_id + "/" + session_label +
                    ": timestamps inconsistent with declared sample rate");
  }
}

bool is_missing(const GazeSample& s) {
  return !s.valid || !std::isfinite(s.x) || !std::isfinite(s.y);
}

std::vector<InvalidRun> detect_invalid_runs(const GazeRecording& rec) {
  std::vector<InvalidRun> runs;
  const std::size_t n = rec.samples.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_missing(rec.samples[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && is_missing(rec.samples[j + 1])) ++j;
    runs.push_back({i, j, static_cast<double>(j - i + 1) / rec.sample_rate_hz});
    i = j + 1;
  }
  return runs;
}

InterpolatedRecording interpolate_invalid(const GazeRecording& rec) {
  const auto& s = rec.samples;
  std::size_t first = 0;
  while (first < s.size() && is_missing(s[first])) ++first;
  if (first == s.size()) {
    throw DataError("recording " + rec.participant_id + "/" + rec.session_label +
                    " has no valid samples");
  }
  std::size_t last = s.size() - 1;
  while (is_missing(s[last])) --last;

  InterpolatedRecording out;
  out.trimmed_leading = first;
  out.trimmed_trailing = s.size() - 1 - last;
  out.recording = rec;
  out.recording.samples.assign(s.begin() + static_cast<std::ptrdiff_t>(first),
                               s.begin() + static_cast<std::ptrdiff_t>(last) + 1);

  auto& r = out.recording.samples;
  std::size_t i = 0;
  while (i < r.size()) {
    if (!is_missing(r[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (is_missing(r[j + 1])) ++j;
    const GazeSample& a = r[i - 1];
    const GazeSample& b = r[j + 1];
    for (std::size_t k = i; k <= j; ++k) {
      const double f = (r[k].t - a.t) / (b.t - a.t);
      r[k].x = a.x + (b.x - a.x) * f;
      r[k].y = a.y + (b.y - a.y) * f;
    }
    i = j + 1;
  }
  return out;
}

GazeRecording to_degrees(const GazeRecording& rec) {
  if (rec.space == CoordinateSpace::kDegrees) return rec;
  GazeRecording out = rec;
  for (auto& s : out.samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
    const AnglePoint a = pixels_to_angles({s.x, s.y}, rec.geometry);
    s.x = a.theta_x_deg;
    s.y = a.theta_y_deg;
  }
  out.space = CoordinateSpace::kDegrees;
  return out;
}

GazeRecording to_pixels(const GazeRecording& rec) {
  if (rec.space == CoordinateSpace::kPixels) return rec;
  GazeRecording out = rec;
  for (auto& s : out.samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) continue;
    const PixelPoint p = angles_to_pixels({s.x, s.y}, rec.geometry);
    s.x = p.x;
    s.y = p.y;
  }
  out.space = CoordinateSpace::kPixels;
  return out;
}

GazeRecording truncate(const GazeRecording& rec, double seconds, TruncateFrom from) {
  if (!(seconds > 0.0)) throw UsageError("truncation length must be positive");
  const auto keep = static_cast<std::size_t>(std::llround(seconds * rec.sample_rate_hz));
  if (keep >= rec.samples.size()) return rec;
  GazeRecording out = rec;
  if (from == TruncateFrom::kStart) {
    out.samples.resize(keep);
  } else {
    out.samples.erase(out.samples.begin(),
                      out.samples.end() - static_cast<std::ptrdiff_t>(keep));
  }
  return out;
}

std::vector<double> savitzky_golay_coefficients(int window_len, int eval_pos,
                                                int poly_order) {
  if (window_len < 1 || eval_pos < 0 || eval_pos >= window_len || poly_order < 0) {
    throw UsageError("invalid Savitzky-Golay window");
  }
  const int order = std::min(poly_order, window_len - 1);
  const double scale = std::max(1.0, (window_len - 1) / 2.0);
  Eigen::MatrixXd vander(window_len, order + 1);
  for (int r = 0; r < window_len; ++r) {
    const double u = (r - eval_pos) / scale;
    double p = 1.0;
    for (int c = 0; c <= order; ++c) {
      vander(r, c) = p;
      p *= u;
    }
  }
  // The fitted polynomial evaluated at u = 0 is its constant term, i.e. the
  // first row of the pseudo-inverse.
  const Eigen::MatrixXd pinv = vander.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> coeffs(static_cast<std::size_t>(window_len));
  for (int r = 0; r < window_len; ++r) coeffs[static_cast<std::size_t>(r)] = pinv(0, r);
  return coeffs;
}

SavitzkyGolayPlan SavitzkyGolayPlan::make(int poly_order, int frame_size) {
  if (frame_size < 1 || frame_size % 2 == 0) {
    throw UsageError("Savitzky-Golay frame size must be odd and positive");
  }
  if (poly_order < 0 || frame_size <= poly_order) {
    throw UsageError("Savitzky-Golay frame size must exceed the polynomial order");
  }
  SavitzkyGolayPlan plan;
  plan.frame_size = frame_size;
  plan.poly_order = poly_order;
  const int half = frame_size / 2;
  plan.center = savitzky_golay_coefficients(frame_size, half, poly_order);
  for (int i = 0; i < half; ++i) {
    plan.head.push_back(savitzky_golay_coefficients(i + half + 1, i, poly_order));
    plan.tail.push_back(savitzky_golay_coefficients(i + half + 1, half, poly_order));
  }
  return plan;
}

std::vector<double> savitzky_golay_filter(const std::vector<double>& signal,
                                          int poly_order, int frame_size) {
  const auto plan = SavitzkyGolayPlan::make(poly_order, frame_size);
  std::vector<double> out(signal.size());
  kernels::omp::savitzky_golay(signal, plan, out);
  return out;
}

GazeRecording savitzky_golay(const GazeRecording& rec, int poly_order, int frame_size) {
  const auto plan = SavitzkyGolayPlan::make(poly_order, frame_size);
  const std::size_t n = rec.samples.size();
  if (n < static_cast<std::size_t>(frame_size)) {
    throw DataError("recording " + rec.participant_id + "/" + rec.session_label +
                    " is shorter than the smoothing frame");
  }
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rec.samples[i].x;
    ys[i] = rec.samples[i].y;
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw DataError("savitzky_golay requires a connected recording");
    }
  }
  std::vector<double> fx(n), fy(n);
  kernels::omp::savitzky_golay(xs, plan, fx);
  kernels::omp::savitzky_golay(ys, plan, fy);
  GazeRecording out = rec;
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i].x = fx[i];
    out.samples[i].y = fy[i];
  }
  return out;
}

}  // namespace eyeid
