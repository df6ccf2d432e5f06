#include "eyeid/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "eyeid/error.hpp"

namespace eyeid {

namespace {

Segment make_segment(const GazeRecording& rec, SegmentKind kind, std::size_t start,
                     std::size_t end) {
  Segment seg;
  seg.kind = kind;
  seg.start_index = start;
  seg.end_index = end;
  seg.points.reserve(end - start + 1);
  for (std::size_t i = start; i <= end; ++i) {
    seg.points.push_back({rec.samples[i].x, rec.samples[i].y});
  }
  seg.duration_s = static_cast<double>(end - start + 1) / rec.sample_rate_hz;
  return seg;
}

// `b` must directly follow `a`; the result takes `kind`.
Segment concat(const Segment& a, const Segment& b, SegmentKind kind) {
  Segment out;
  out.kind = kind;
  out.start_index = a.start_index;
  out.end_index = b.end_index;
  out.points = a.points;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  out.duration_s = a.duration_s + b.duration_s;
  return out;
}

void fuse_equal_neighbours(std::vector<Segment>& segs) {
  std::vector<Segment> out;
  out.reserve(segs.size());
  for (auto& s : segs) {
    if (!out.empty() && out.back().kind == s.kind) {
      out.back() = concat(out.back(), s, s.kind);
    } else {
      out.push_back(std::move(s));
    }
  }
  segs = std::move(out);
}

}  // namespace

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kFixation: return "fixation";
    case SegmentKind::kSaccade: return "saccade";
    case SegmentKind::kBlink: return "blink";
  }
  return "unknown";
}

void IvtParams::validate() const {
  if (!std::isfinite(velocity_threshold_deg_s) || velocity_threshold_deg_s <= 0.0) {
    throw UsageError("velocity threshold must be positive");
  }
  if (!std::isfinite(min_fixation_duration_s) || min_fixation_duration_s < 0.0) {
    throw UsageError("minimum fixation duration must be non-negative");
  }
}

void BlinkParams::validate() const {
  if (!(min_duration_s > 0.0 && min_duration_s < max_duration_s)) {
    throw UsageError("blink duration gate requires 0 < min < max");
  }
}

std::vector<double> pointwise_angular_velocity(const GazeRecording& rec) {
  const auto& s = rec.samples;
  if (s.size() < 2) return {};
  std::vector<double> v(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    v[i] = std::hypot(s[i + 1].x - s[i].x, s[i + 1].y - s[i].y) * rec.sample_rate_hz;
  }
  return v;
}

std::vector<Segment> ivt_segment(const GazeRecording& rec, const IvtParams& params) {
  params.validate();
  const std::size_t n = rec.samples.size();
  if (n == 0) return {};
  const auto v = pointwise_angular_velocity(rec);

  auto is_fix = [&](std::size_t i) {
    if (v.empty()) return true;
    return v[std::min(i, v.size() - 1)] < params.velocity_threshold_deg_s;
  };

  struct Run {
    SegmentKind kind;
    std::size_t start;
    std::size_t end;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    const SegmentKind k = is_fix(i) ? SegmentKind::kFixation : SegmentKind::kSaccade;
    if (!runs.empty() && runs.back().kind == k) {
      runs.back().end = i;
    } else {
      runs.push_back({k, i, i});
    }
  }

  for (auto& r : runs) {
    const double duration = static_cast<double>(r.end - r.start + 1) / rec.sample_rate_hz;
    if (r.kind == SegmentKind::kFixation && duration < params.min_fixation_duration_s) {
      r.kind = SegmentKind::kSaccade;
    }
  }
  // A lone sub-MFD fixation spanning the whole recording has no saccade to join.
  if (runs.size() == 1 && runs.front().kind == SegmentKind::kSaccade &&
      is_fix(runs.front().start)) {
    return {};
  }

  std::vector<Segment> segs;
  for (const auto& r : runs) {
    if (!segs.empty() && segs.back().kind == r.kind) {
      segs.back() = concat(segs.back(), make_segment(rec, r.kind, r.start, r.end), r.kind);
    } else {
      segs.push_back(make_segment(rec, r.kind, r.start, r.end));
    }
  }
  return segs;
}

std::vector<Segment> extract_blinks(const std::vector<InvalidRun>& runs,
                                    const BlinkParams& params) {
  params.validate();
  // Durations are count/rate; the tolerance absorbs rounding at the gate edges.
  constexpr double kEps = 1e-9;
  std::vector<Segment> out;
  for (const auto& r : runs) {
    if (r.duration_s + kEps >= params.min_duration_s &&
        r.duration_s - kEps <= params.max_duration_s) {
      Segment seg;
      seg.kind = SegmentKind::kBlink;
      seg.start_index = r.start_index;
      seg.end_index = r.end_index;
      seg.duration_s = r.duration_s;
      out.push_back(std::move(seg));
    }
  }
  return out;
}

std::vector<Segment> enforce_min_points(std::vector<Segment> segments,
                                        std::size_t min_points) {
  auto floor_of = [&](const Segment& s) {
    return s.kind == SegmentKind::kSaccade ? std::max<std::size_t>(min_points, 3)
                                           : min_points;
  };
  fuse_equal_neighbours(segments);
  while (true) {
    auto it = std::find_if(segments.begin(), segments.end(),
                           [&](const Segment& s) { return s.count() < floor_of(s); });
    if (it == segments.end()) return segments;
    if (segments.size() == 1) {
      throw DataError("no segment survives the minimum point count of " +
                      std::to_string(min_points));
    }
    const auto i = static_cast<std::size_t>(it - segments.begin());
    if (i + 1 < segments.size()) {
      segments[i + 1] = concat(segments[i], segments[i + 1], segments[i + 1].kind);
    } else {
      segments[i - 1] = concat(segments[i - 1], segments[i], segments[i - 1].kind);
    }
    segments.erase(segments.begin() + static_cast<std::ptrdiff_t>(i));
    fuse_equal_neighbours(segments);
  }
}

std::size_t count_kind(const std::vector<Segment>& segments, SegmentKind kind) {
  return static_cast<std::size_t>(std::count_if(
      segments.begin(), segments.end(), [&](const Segment& s) { return s.kind == kind; }));
}

}  // namespace eyeid
