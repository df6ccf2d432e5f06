#include <doctest.h>

#include <atomic>
#include <cmath>

#include "eyeid/error.hpp"
#include "eyeid/optimize.hpp"
#include "oracles.hpp"

using namespace eyeid;

TEST_CASE("simplex finds the minimum of a shifted quadratic") {
  oracle::Gen g(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + g.index(4);
    std::vector<double> c(n), scale(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = g.uniform(-2, 2);
      scale[i] = g.uniform(0.5, 5);
    }
    const Objective f = [&](std::span<const double> x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += scale[i] * (x[i] - c[i]) * (x[i] - c[i]);
      return s;
    };
    SimplexConfig cfg;
    cfg.initial_step = 0.5;
    const auto r = nelder_mead(f, std::vector<double>(n, 0.0), cfg);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.x[i] - c[i]) < 1e-4);
    CHECK(r.f < 1e-8);
    for (std::size_t i = 1; i < r.best_history.size(); ++i) {
      CHECK(r.best_history[i] <= r.best_history[i - 1]);
    }
  }
}

TEST_CASE("constant objective terminates at the start point") {
  const auto r = nelder_mead([](std::span<const double>) { return 3.0; }, {1.0, 2.0});
  CHECK(r.f == 3.0);
  CHECK(r.x == std::vector<double>{1.0, 2.0});
  CHECK(r.iterations <= 1);
}

TEST_CASE("Rosenbrock agrees with a Newton reference") {
  const auto newton = oracle::newton_rosenbrock(-1.2, 1.0);
  REQUIRE(std::abs(newton.x - 1.0) < 1e-8);
  SimplexConfig cfg;
  cfg.initial_step = 0.1;
  cfg.f_tol = 1e-16;
  cfg.x_tol = 1e-12;
  const auto r = nelder_mead(
      [](std::span<const double> x) { return oracle::rosenbrock(x[0], x[1]); }, {-1.2, 1.0}, cfg);
  CHECK(std::abs(r.x[0] - newton.x) < 1e-4);
  CHECK(std::abs(r.x[1] - newton.y) < 1e-4);
  CHECK(r.iterations < cfg.max_iterations);
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    CHECK(r.best_history[i] <= r.best_history[i - 1]);
  }
}

TEST_CASE("simplex input validation") {
  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return 0.0; }, {}), UsageError);
  SimplexConfig bad;
  bad.expansion = 0.5;
  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return 0.0; }, {1.0}, bad), UsageError);
  CHECK_THROWS_AS(nelder_mead([](std::span<const double>) { return NAN; }, {1.0}), ComputeError);
}

namespace {

// Fusion accuracy over a fixed synthetic population of posteriors.
struct FusionBench {
  std::vector<Distribution> fix, sac, blink;
  std::vector<std::size_t> truth;

  FusionScore operator()(const FusionWeights& w) const {
    std::size_t ok = 0;
    double tb = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto r = fuse(fix[i], sac[i], blink[i], w);
      ok += r.predicted == truth[i];
      double s = 0;
      for (double v : r.p_final) s += v;
      tb += r.p_final[truth[i]] / s;
    }
    const double n = static_cast<double>(truth.size());
    return {static_cast<double>(ok) / n, tb / n};
  }
};

Distribution noisy(oracle::Gen& g, std::size_t classes, std::size_t truth, double signal) {
  Distribution d(classes);
  double s = 0;
  for (std::size_t c = 0; c < classes; ++c) s += (d[c] = g.uniform(0, 1) + (c == truth ? signal : 0.0));
  for (auto& v : d) v /= s;
  return d;
}

}  // namespace

TEST_CASE("pure-noise blink classifier does not gain weight") {
  oracle::Gen g(32);
  FusionBench b;
  for (int i = 0; i < 300; ++i) {
    const std::size_t t = g.index(8);
    b.truth.push_back(t);
    b.fix.push_back(noisy(g, 8, t, 0.6));
    b.sac.push_back(noisy(g, 8, t, 0.3));
    b.blink.push_back(noisy(g, 8, t, 0.0));
  }
  const FusionWeights w0{0.5, 0.5, 0.5};
  const auto tuned = tune_fusion_weights(b, w0);
  CHECK(tuned.accuracy >= tuned.initial_accuracy);
  CHECK(tuned.initial == w0);
  CHECK(tuned.weights.w_blink <= w0.w_blink);
  CHECK(b(tuned.weights).accuracy == tuned.accuracy);
}

TEST_CASE("identical classifiers keep the start weights") {
  oracle::Gen g(33);
  FusionBench b;
  for (int i = 0; i < 100; ++i) {
    const std::size_t t = g.index(5);
    b.truth.push_back(t);
    b.fix.push_back(noisy(g, 5, t, 0.4));
    b.sac.push_back(b.fix.back());
    b.blink.push_back(noisy(g, 5, t, 0.0));
  }
  FusionBench two = b;
  // Without a usable blink channel every ratio of the two weights is equivalent.
  const FusionEvaluator eval = [&](const FusionWeights& w) {
    return two(FusionWeights{w.w_fix, w.w_sac, 0.0});
  };
  const FusionWeights w0{0.5, 0.5, 0.0};
  const auto tuned = tune_fusion_weights(eval, w0);
  CHECK(tuned.weights == w0);
  CHECK(tuned.accuracy == tuned.initial_accuracy);
  CHECK(tuned.evaluations >= 1);
}

TEST_CASE("tuning never returns a worse point and caches evaluations") {
  oracle::Gen g(34);
  FusionBench b;
  for (int i = 0; i < 120; ++i) {
    const std::size_t t = g.index(6);
    b.truth.push_back(t);
    b.fix.push_back(noisy(g, 6, t, 0.2));
    b.sac.push_back(noisy(g, 6, t, 0.5));
    b.blink.push_back(noisy(g, 6, t, 0.1));
  }
  std::atomic<int> calls{0};
  const FusionEvaluator eval = [&](const FusionWeights& w) {
    ++calls;
    return b(w);
  };
  const auto tuned = tune_fusion_weights(eval, {0.9, 0.1, 0.0});
  CHECK(tuned.accuracy >= tuned.initial_accuracy);
  CHECK(tuned.evaluations == calls.load());
  CHECK(tuned.weights.w_fix >= 0.0);
  CHECK(tuned.weights.w_sac >= 0.0);
  CHECK(tuned.weights.w_blink >= 0.0);
}

TEST_CASE("grids") {
  CHECK(grid(10, 100, 10).size() == 10);
  CHECK(grid(0.05, 0.15, 0.01).size() == 11);
  CHECK(grid(0.05, 0.15, 0.001).size() == 101);
  CHECK(grid(5, 5, 1) == std::vector<double>{5});
  CHECK(grid(5, 4, 1).empty());
}

TEST_CASE("sweep on a single point and argmax consistency") {
  SweepPlan one;
  one.vt_min = one.vt_max = 40;
  one.mfd_min = one.mfd_max = 0.1;
  const auto r = sweep_ivt(
      [](const IvtParams& p) {
        SweepPoint s;
        s.accuracy_mean = p.velocity_threshold_deg_s;
        return s;
      },
      one);
  REQUIRE(r.table.size() == 1);
  CHECK(r.best.vt == 40);
  CHECK(r.best.mfd == doctest::Approx(0.1));

  // Smooth unimodal surface: stage 1 finds VT, stage 2 finds MFD on the fine grid.
  const SweepRun surface = [](const IvtParams& p) {
    SweepPoint s;
    const double dv = (p.velocity_threshold_deg_s - 37.0) / 30.0;
    const double dm = (p.min_fixation_duration_s - 0.083) / 0.05;
    s.accuracy_mean = 0.9 - dv * dv - dm * dm;
    s.fixation_count = static_cast<std::size_t>(p.velocity_threshold_deg_s);
    return s;
  };
  const auto full = sweep_ivt(surface, SweepPlan{});
  CHECK(full.best.vt == doctest::Approx(37.0));
  CHECK(full.best.mfd == doctest::Approx(0.083));
  for (const auto& p : full.table) CHECK(p.accuracy_mean <= full.best.accuracy_mean);
  std::size_t stage1 = 0;
  for (const auto& p : full.table) stage1 += std::abs(p.mfd - 0.1) < 1e-12;
  CHECK(stage1 >= 10);

  const auto vt_only = sweep_ivt(surface, SweepPlan{}, SweepStage::kVelocity);
  for (const auto& p : vt_only.table) CHECK(p.mfd == doctest::Approx(0.1));
  const auto mfd_only = sweep_ivt(surface, SweepPlan{}, SweepStage::kDuration);
  for (const auto& p : mfd_only.table) CHECK(p.vt == 50.0);
  CHECK(mfd_only.best.mfd == doctest::Approx(0.083));

  SweepPlan bad;
  bad.vt_min = 0;
  CHECK_THROWS_AS(sweep_ivt(surface, bad), UsageError);
}

TEST_CASE("fixation-count peak") {
  const auto r = peak_fixation_vt(
      [](double vt) { return static_cast<std::size_t>(1000 - std::abs(vt - 24.0) * 7); }, 10, 60, 1,
      3);
  CHECK(r.peak_vt == 24.0);
  CHECK(r.peak_count == 1000);
  CHECK(r.candidates == std::vector<double>{21, 22, 23, 24, 25, 26, 27});
  CHECK(r.counts.size() == 51);

  // Plateau: lowest VT wins; candidates clipped at the range edge.
  const auto flat = peak_fixation_vt([](double) { return std::size_t{5}; }, 10, 20, 1, 3);
  CHECK(flat.peak_vt == 10.0);
  CHECK(flat.candidates == std::vector<double>{10, 11, 12, 13});
  const auto rising = peak_fixation_vt([](double vt) { return static_cast<std::size_t>(vt); }, 10, 20, 1, 2);
  CHECK(rising.peak_vt == 20.0);
  CHECK(rising.candidates == std::vector<double>{18, 19, 20});
  CHECK_THROWS_AS(peak_fixation_vt([](double) { return std::size_t{0}; }, 5, 4, 1, 1), UsageError);
}
