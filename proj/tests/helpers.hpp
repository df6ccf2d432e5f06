#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "eyeid/preprocess.hpp"
#include "eyeid/segmentation.hpp"

namespace testutil {

inline eyeid::GazeRecording recording(const std::vector<double>& x, const std::vector<double>& y,
                                      double rate = 250.0) {
  eyeid::GazeRecording r;
  r.sample_rate_hz = rate;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.samples.push_back({static_cast<double>(i) / rate, x[i], y[i], true});
  }
  return r;
}

inline eyeid::GazeRecording constant_recording(std::size_t n, double rate = 250.0) {
  return recording(std::vector<double>(n, 1.0), std::vector<double>(n, 2.0), rate);
}

inline void blank(eyeid::GazeRecording& r, std::size_t from, std::size_t count) {
  for (std::size_t i = from; i < from + count; ++i) {
    r.samples[i].x = std::numeric_limits<double>::quiet_NaN();
    r.samples[i].y = std::numeric_limits<double>::quiet_NaN();
    r.samples[i].valid = false;
  }
}

inline eyeid::Segment segment(eyeid::SegmentKind kind, std::size_t start, std::size_t end,
                              double rate = 250.0) {
  eyeid::Segment s;
  s.kind = kind;
  s.start_index = start;
  s.end_index = end;
  for (std::size_t i = start; i <= end; ++i) {
    s.points.push_back({static_cast<double>(i), 0.0});
  }
  s.duration_s = static_cast<double>(end - start + 1) / rate;
  return s;
}

inline eyeid::Segment points_segment(const std::vector<eyeid::Point2>& pts,
                                     eyeid::SegmentKind kind = eyeid::SegmentKind::kFixation,
                                     double rate = 250.0) {
  eyeid::Segment s;
  s.kind = kind;
  s.start_index = 0;
  s.end_index = pts.size() - 1;
  s.points = pts;
  s.duration_s = static_cast<double>(pts.size()) / rate;
  return s;
}

}  // namespace testutil
