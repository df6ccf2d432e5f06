#include <doctest.h>

#include <cmath>

#include "eyeid/error.hpp"
#include "eyeid/segmentation.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace eyeid;

namespace {

// Builds a trajectory whose per-sample velocity label follows `plan`
// (true = fixation): fixation samples stay put, saccade samples step 1 deg.
GazeRecording from_labels(const std::vector<bool>& plan, double rate = 250.0) {
  std::vector<double> x(plan.size(), 0.0), y(plan.size(), 0.0);
  for (std::size_t i = 0; i + 1 < plan.size(); ++i) x[i + 1] = x[i] + (plan[i] ? 0.0 : 1.0);
  return testutil::recording(x, y, rate);
}

std::vector<bool> pattern(std::initializer_list<std::pair<bool, std::size_t>> parts) {
  std::vector<bool> out;
  for (const auto& [fix, n] : parts) out.insert(out.end(), n, fix);
  return out;
}

GazeRecording random_recording(oracle::Gen& g, std::size_t n) {
  std::vector<double> x(n), y(n);
  double cx = 0, cy = 0;
  bool moving = false;
  std::size_t left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (left == 0) {
      moving = !moving;
      left = 1 + g.index(moving ? 12 : 60);
    }
    --left;
    const double speed = moving ? g.uniform(0.05, 1.5) : g.uniform(0.0, 0.15);
    const double a = g.uniform(0, 6.283);
    cx += speed * std::cos(a);
    cy += speed * std::sin(a);
    x[i] = cx;
    y[i] = cy;
  }
  return testutil::recording(x, y);
}

void check_tiling(const std::vector<Segment>& segs, std::size_t n) {
  if (segs.empty()) return;
  CHECK(segs.front().start_index == 0);
  CHECK(segs.back().end_index == n - 1);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].points.size() == segs[i].count());
    if (i == 0) continue;
    CHECK(segs[i].start_index == segs[i - 1].end_index + 1);
    CHECK(segs[i].kind != segs[i - 1].kind);
  }
}

std::vector<oracle::Run> as_runs(const std::vector<Segment>& segs) {
  std::vector<oracle::Run> out;
  for (const auto& s : segs) out.push_back({s.kind == SegmentKind::kFixation, s.start_index, s.end_index});
  return out;
}

// Label-array version of the minimum-point merge rule.
std::vector<oracle::Run> brute_min_points(std::vector<oracle::Run> runs, std::size_t floor) {
  if (runs.empty()) return runs;
  std::vector<int> label(runs.back().end + 1);
  for (const auto& r : runs) {
    for (std::size_t i = r.start; i <= r.end; ++i) label[i] = r.fixation;
  }
  auto read = [&] {
    std::vector<oracle::Run> out;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (i == 0 || label[i] != label[i - 1]) out.push_back({label[i] == 1, i, i});
      out.back().end = i;
    }
    return out;
  };
  for (;;) {
    auto cur = read();
    std::size_t k = 0;
    for (; k < cur.size(); ++k) {
      const std::size_t f = cur[k].fixation ? floor : std::max<std::size_t>(floor, 3);
      if (cur[k].end - cur[k].start + 1 < f) break;
    }
    if (k == cur.size() || cur.size() == 1) return cur;
    const int target = k + 1 < cur.size() ? cur[k + 1].fixation : cur[k - 1].fixation;
    for (std::size_t i = cur[k].start; i <= cur[k].end; ++i) label[i] = target;
  }
}

}  // namespace

TEST_CASE("point-wise angular velocity") {
  const auto still = testutil::constant_recording(5);
  for (double v : pointwise_angular_velocity(still)) CHECK(v == 0.0);

  const auto step = testutil::recording({0.0, 0.1, 0.1}, {0.0, 0.0, 0.0});
  const auto v = pointwise_angular_velocity(step);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(v[1] == 0.0);

  const auto diag = testutil::recording({0.0, 0.03}, {0.0, 0.04});
  CHECK(pointwise_angular_velocity(diag)[0] == doctest::Approx(12.5).epsilon(1e-12));
}

TEST_CASE("IVT trivial cases") {
  const auto still = testutil::constant_recording(100);
  auto segs = ivt_segment(still, {});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].kind == SegmentKind::kFixation);
  CHECK(segs[0].duration_s == doctest::Approx(0.4));

  const auto fast = from_labels(std::vector<bool>(40, false));
  segs = ivt_segment(fast, {});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].kind == SegmentKind::kSaccade);

  // A recording that is one short fixation has no saccade to merge into.
  CHECK(ivt_segment(testutil::constant_recording(10), {}).empty());
}

TEST_CASE("short fixation between saccades is absorbed") {
  const auto plan = pattern({{true, 50}, {false, 10}, {true, 15}, {false, 10}, {true, 50}});
  const auto rec = from_labels(plan);
  const auto segs = ivt_segment(rec, {50.0, 0.100});
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].kind == SegmentKind::kFixation);
  CHECK(segs[0].end_index == 49);
  CHECK(segs[1].kind == SegmentKind::kSaccade);
  CHECK(segs[1].count() == 35);
  CHECK(segs[2].kind == SegmentKind::kFixation);
  CHECK(as_runs(segs) == oracle::ivt([&] {
          std::vector<double> x;
          for (const auto& s : rec.samples) x.push_back(s.x);
          return x;
        }(), std::vector<double>(rec.samples.size(), 0.0), 250.0, 50.0, 0.1));

  // MFD exactly met keeps the fixation.
  const auto exact = from_labels(pattern({{true, 50}, {false, 10}, {true, 25}, {false, 10}, {true, 50}}));
  CHECK(ivt_segment(exact, {50.0, 0.100}).size() == 5);
}

TEST_CASE("IVT equals the brute-force segmenter on random inputs") {
  oracle::Gen g(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rec = random_recording(g, 50 + g.index(400));
    const double vt = g.uniform(5.0, 150.0);
    const double mfd = trial % 10 == 0 ? 0.0 : g.uniform(0.0, 0.2);
    std::vector<double> x, y;
    for (const auto& s : rec.samples) {
      x.push_back(s.x);
      y.push_back(s.y);
    }
    const auto segs = ivt_segment(rec, {vt, mfd});
    CHECK(as_runs(segs) == oracle::ivt(x, y, 250.0, vt, mfd));
    check_tiling(segs, rec.samples.size());
    for (const auto& s : segs) {
      CHECK(s.duration_s == doctest::Approx(static_cast<double>(s.count()) / 250.0));
      if (s.kind == SegmentKind::kFixation) CHECK(s.duration_s >= mfd - 1e-12);
    }
  }
}

TEST_CASE("MFD zero is plain velocity thresholding") {
  oracle::Gen g(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rec = random_recording(g, 200);
    const double vt = g.uniform(10.0, 100.0);
    const auto v = pointwise_angular_velocity(rec);
    const auto segs = ivt_segment(rec, {vt, 0.0});
    for (const auto& s : segs) {
      for (std::size_t i = s.start_index; i <= s.end_index; ++i) {
        const double vi = v[std::min(i, v.size() - 1)];
        CHECK((s.kind == SegmentKind::kFixation) == (vi < vt));
      }
    }
  }
}

TEST_CASE("total fixation time shrinks as VT drops") {
  oracle::Gen g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rec = random_recording(g, 300);
    const double mfd = g.uniform(0.0, 0.1);
    double prev = 1e9;
    for (double vt = 150.0; vt >= 5.0; vt -= 5.0) {
      double total = 0.0;
      for (const auto& s : ivt_segment(rec, {vt, mfd})) {
        if (s.kind == SegmentKind::kFixation) total += s.duration_s;
      }
      CHECK(total <= prev + 1e-12);
      prev = total;
    }
  }
}

TEST_CASE("blink duration gate") {
  const BlinkParams gate;
  std::vector<InvalidRun> runs;
  std::size_t at = 0;
  for (double ms : {50.0, 80.0, 300.0, 500.0, 600.0}) {
    const auto n = static_cast<std::size_t>(ms / 4.0 + 0.5);
    runs.push_back({at, at + n - 1, static_cast<double>(n) / 250.0});
    at += n + 10;
  }
  const auto blinks = extract_blinks(runs, gate);
  REQUIRE(blinks.size() == 3);
  CHECK(blinks[0].duration_s == doctest::Approx(0.08));
  CHECK(blinks[1].duration_s == doctest::Approx(0.30));
  CHECK(blinks[2].duration_s == doctest::Approx(0.50));
  for (const auto& b : blinks) CHECK(b.kind == SegmentKind::kBlink);

  CHECK_THROWS_AS((BlinkParams{0.5, 0.08}.validate()), UsageError);
}

TEST_CASE("blinks come from preserved flags, not from interpolated values") {
  auto r = testutil::constant_recording(300);
  testutil::blank(r, 100, 50);
  const auto before = extract_blinks(detect_invalid_runs(r));
  const auto after = extract_blinks(detect_invalid_runs(interpolate_invalid(r).recording));
  REQUIRE(before.size() == 1);
  REQUIRE(after.size() == 1);
  CHECK(before[0].start_index == after[0].start_index);
  CHECK(before[0].duration_s == after[0].duration_s);
}

TEST_CASE("minimum point enforcement") {
  using testutil::segment;
  const auto F = SegmentKind::kFixation;
  const auto S = SegmentKind::kSaccade;

  // Two-point saccade disappears and the fixations fuse.
  auto out = enforce_min_points({segment(F, 0, 29), segment(S, 30, 31), segment(F, 32, 60)}, 3);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == F);
  CHECK(out[0].count() == 61);
  CHECK(out[0].points.size() == 61);

  // Nothing below the floor: unchanged.
  const std::vector<Segment> ok{segment(F, 0, 9), segment(S, 10, 14), segment(F, 15, 30)};
  out = enforce_min_points(ok, 3);
  CHECK(as_runs(out) == as_runs(ok));

  // Three-point fixation with floor 5 joins the following (longer) saccade.
  const std::vector<Segment> jounce{segment(F, 0, 19), segment(S, 20, 25), segment(F, 26, 28),
                                    segment(S, 29, 40), segment(F, 41, 60)};
  out = enforce_min_points(jounce, 5);
  REQUIRE(out.size() == 3);
  CHECK(out[1].kind == S);
  CHECK(out[1].start_index == 20);
  CHECK(out[1].end_index == 40);
  CHECK(as_runs(out) == brute_min_points(as_runs(jounce), 5));

  CHECK_THROWS_AS(enforce_min_points({segment(F, 0, 0), segment(S, 1, 1)}, 3), DataError);
}

TEST_CASE("minimum point enforcement matches the label-array rule") {
  oracle::Gen g(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Segment> segs;
    std::size_t at = 0;
    bool fix = g.index(2) == 0;
    const std::size_t count = 2 + g.index(12);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t len = 1 + g.index(8);
      segs.push_back(testutil::segment(fix ? SegmentKind::kFixation : SegmentKind::kSaccade, at,
                                       at + len - 1));
      at += len;
      fix = !fix;
    }
    const std::size_t floor = 1 + g.index(6);
    const auto expected = brute_min_points(as_runs(segs), floor);
    bool collapsed = false;
    for (const auto& r : expected) {
      const std::size_t f = r.fixation ? floor : std::max<std::size_t>(floor, 3);
      if (r.end - r.start + 1 < f) collapsed = true;
    }
    if (collapsed) {
      CHECK_THROWS_AS(enforce_min_points(segs, floor), DataError);
      continue;
    }
    const auto out = enforce_min_points(segs, floor);
    CHECK(as_runs(out) == expected);
    check_tiling(out, at);
    for (const auto& s : out) {
      CHECK(s.count() >= (s.kind == SegmentKind::kSaccade ? std::max<std::size_t>(floor, 3) : floor));
    }
  }
}
