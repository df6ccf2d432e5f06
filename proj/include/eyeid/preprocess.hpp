#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eyeid/geometry.hpp"

namespace eyeid {

enum class CoordinateSpace { kDegrees, kPixels };

struct GazeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  bool valid = true;
};

struct GazeRecording {
  std::vector<GazeSample> samples;
  double sample_rate_hz = 250.0;
  ScreenGeometry geometry;
  CoordinateSpace space = CoordinateSpace::kDegrees;
  std::string participant_id;
  std::string session_label;
  std::optional<std::string> gender;
  std::optional<double> age;
  // False for datasets without a validity channel; blinks are then never extracted.
  bool has_validity = true;

  std::size_t size() const { return samples.size(); }
  double sample_period() const { return 1.0 / sample_rate_hz; }

  /// Checks rate, sample count, increasing timestamps, and that timestamp
  /// spacing matches the declared rate within 1 %.
  void validate() const;
};

/// Maximal run of invalid samples; indices inclusive.
struct InvalidRun {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  double duration_s = 0.0;

  std::size_t count() const { return end_index - start_index + 1; }
  bool operator==(const InvalidRun&) const = default;
};

struct InterpolatedRecording {
  GazeRecording recording;
  std::size_t trimmed_leading = 0;
  std::size_t trimmed_trailing = 0;
};

bool is_missing(const GazeSample& s);

std::vector<InvalidRun> detect_invalid_runs(const GazeRecording& rec);

/// Linear (in time) interpolation across interior invalid runs. Leading and
/// trailing invalid runs are trimmed. Validity flags are carried through
/// unchanged.
InterpolatedRecording interpolate_invalid(const GazeRecording& rec);

/// Pixel recordings are mapped to viewing angles; degree recordings are
/// returned as-is. Missing coordinates stay missing.
GazeRecording to_degrees(const GazeRecording& rec);
GazeRecording to_pixels(const GazeRecording& rec);

/// Keeps the first or last `seconds` of a recording.
enum class TruncateFrom { kStart, kEnd };
GazeRecording truncate(const GazeRecording& rec, double seconds, TruncateFrom from);

/// Least-squares smoothing coefficients for a window of `window_len` uniformly
/// spaced samples, evaluated at window position `eval_pos`.
std::vector<double> savitzky_golay_coefficients(int window_len, int eval_pos,
                                                int poly_order);

/// Per-position stencils for one signal length. Interior samples use the
/// centered frame; the first and last (frame-1)/2 samples use the truncated
/// asymmetric window with the fit evaluated at the sample's own position.
struct SavitzkyGolayPlan {
  int frame_size = 15;
  int poly_order = 6;
  std::vector<double> center;
  std::vector<std::vector<double>> head;  // head[i]: window [0, i+half]
  std::vector<std::vector<double>> tail;  // tail[k]: window [n-1-k-half, n-1]

  static SavitzkyGolayPlan make(int poly_order, int frame_size);
  int half() const { return frame_size / 2; }
};

std::vector<double> savitzky_golay_filter(const std::vector<double>& signal,
                                          int poly_order = 6, int frame_size = 15);

/// Smooths both coordinate channels. Requires a connected (all finite)
/// recording with at least `frame_size` samples.
GazeRecording savitzky_golay(const GazeRecording& rec, int poly_order = 6,
                             int frame_size = 15);

}  // namespace eyeid
