#include "eyeid/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "eyeid/error.hpp"
#include "parallel.hpp"

namespace eyeid {

void SimplexConfig::validate() const {
  if (!(reflection > 0.0 && expansion > 1.0 && contraction > 0.0 && contraction < 1.0 &&
        shrink > 0.0 && shrink < 1.0)) {
    throw UsageError("simplex coefficients need alpha>0, gamma>1, 0<rho<1, 0<sigma<1");
  }
  if (max_iterations < 0 || !(initial_step > 0.0)) {
    throw UsageError("simplex needs a positive initial step and max_iterations >= 0");
  }
}

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0,
                          const SimplexConfig& cfg) {
  cfg.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw UsageError("nelder_mead: empty parameter vector");

  SimplexResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += cfg.initial_step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    vals[i] = eval(pts[i]);
    if (!std::isfinite(vals[i])) {
      throw ComputeError("nelder_mead: objective is not finite on the initial simplex");
    }
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<std::vector<double>> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      p2[i] = std::move(pts[order[i]]);
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };
  auto along = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (from[j] - centroid[j]);
  };

  sort_vertices();
  while (true) {
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter, std::abs(pts[i][j] - pts[0][j]));
    if (vals[n] - vals[0] < cfg.f_tol || diameter < cfg.x_tol ||
        res.iterations >= cfg.max_iterations) {
      break;
    }
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);

    along(-cfg.reflection, pts[n], xr);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      along(-cfg.reflection * cfg.expansion, pts[n], xe);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      bool accepted = false;
      if (fr < vals[n]) {
        along(-cfg.reflection * cfg.contraction, pts[n], xc);
        const double fc = eval(xc);
        if (fc <= fr) {
          pts[n] = xc;
          vals[n] = fc;
          accepted = true;
        }
      } else {
        along(cfg.contraction, pts[n], xc);
        const double fc = eval(xc);
        if (fc < vals[n]) {
          pts[n] = xc;
          vals[n] = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            pts[i][j] = pts[0][j] + cfg.shrink * (pts[i][j] - pts[0][j]);
          }
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_vertices();
    res.best_history.push_back(vals[0]);
  }
  res.x = pts[0];
  res.f = vals[0];
  return res;
}

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

double softplus_inverse(double w) {
  // Weights of exactly zero map to a small positive starting weight.
  constexpr double kFloor = 1e-3;
  w = std::max(w, kFloor);
  return w > 30.0 ? w : std::log(std::expm1(w));
}

}  // namespace

TunedWeights tune_fusion_weights(const FusionEvaluator& eval, const FusionWeights& w0,
                                 const SimplexConfig& cfg) {
  w0.validate();
  std::map<std::array<double, 3>, FusionScore> cache;
  TunedWeights out;
  auto score = [&](const FusionWeights& w) {
    const std::array<double, 3> key{w.w_fix, w.w_sac, w.w_blink};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ++out.evaluations;
    const FusionScore s = eval(w);
    cache.emplace(key, s);
    return s;
  };
  auto from_z = [](std::span<const double> z) {
    return FusionWeights{softplus(z[0]), softplus(z[1]), softplus(z[2])};
  };

  out.initial = w0;
  out.initial_accuracy = score(w0).accuracy;
  constexpr double kTieBreakWeight = 1e-3;
  const Objective objective = [&](std::span<const double> z) {
    const FusionScore s = score(from_z(z));
    return -(s.accuracy + kTieBreakWeight * s.tie_break);
  };
  const std::vector<double> z0{softplus_inverse(w0.w_fix), softplus_inverse(w0.w_sac),
                               softplus_inverse(w0.w_blink)};
  const SimplexResult res = nelder_mead(objective, z0, cfg);
  const FusionWeights found = from_z(res.x);
  const double found_accuracy = score(found).accuracy;

  if (found_accuracy > out.initial_accuracy) {
    out.weights = found;
    out.accuracy = found_accuracy;
  } else {
    out.weights = w0;
    out.accuracy = out.initial_accuracy;
  }
  return out;
}

void SweepPlan::validate() const {
  if (!(vt_min > 0.0 && vt_min <= vt_max && vt_coarse_step > 0.0 && vt_fine_step > 0.0)) {
    throw UsageError("sweep plan: VT range must be positive and non-empty with positive steps");
  }
  if (!(mfd_min >= 0.0 && mfd_min <= mfd_max && mfd_coarse_step > 0.0 &&
        mfd_fine_step > 0.0)) {
    throw UsageError("sweep plan: MFD range must be non-empty with positive steps");
  }
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  if (!(step > 0.0) || hi < lo) return out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

namespace {

// Evaluates `params` (skipping ones already in `table`) in parallel and appends
// them to `table` in grid order.
void evaluate_pass(const SweepRun& run, const std::vector<IvtParams>& params,
                   std::vector<SweepPoint>& table) {
  auto seen = [&](const IvtParams& p) {
    return std::any_of(table.begin(), table.end(), [&](const SweepPoint& s) {
      return std::abs(s.vt - p.velocity_threshold_deg_s) < 1e-9 &&
             std::abs(s.mfd - p.min_fixation_duration_s) < 1e-12;
    });
  };
  std::vector<IvtParams> todo;
  for (const auto& p : params)
    if (!seen(p)) todo.push_back(p);

  std::vector<SweepPoint> results(todo.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(todo.size()), [&](std::ptrdiff_t i) {
    const auto idx = static_cast<std::size_t>(i);
    SweepPoint pt = run(todo[idx]);
    pt.vt = todo[idx].velocity_threshold_deg_s;
    pt.mfd = todo[idx].min_fixation_duration_s;
    results[idx] = pt;
  });
  table.insert(table.end(), results.begin(), results.end());
}

std::size_t argmax_accuracy(const std::vector<SweepPoint>& table, std::size_t from = 0) {
  std::size_t best = from;
  for (std::size_t i = from; i < table.size(); ++i) {
    if (table[i].accuracy_mean > table[best].accuracy_mean) best = i;
  }
  return best;
}

}  // namespace

SweepResult sweep_ivt(const SweepRun& run, const SweepPlan& plan, SweepStage stage) {
  plan.validate();
  SweepResult res;
  double best_vt = plan.stage2_vt;

  if (stage != SweepStage::kDuration) {
    std::vector<IvtParams> coarse;
    for (double vt : grid(plan.vt_min, plan.vt_max, plan.vt_coarse_step)) {
      coarse.push_back({vt, plan.stage1_mfd});
    }
    evaluate_pass(run, coarse, res.table);
    const double centre = res.table[argmax_accuracy(res.table)].vt;
    const double lo = std::max(plan.vt_min, centre - plan.vt_coarse_step + plan.vt_fine_step);
    const double hi = std::min(plan.vt_max, centre + plan.vt_coarse_step - plan.vt_fine_step);
    std::vector<IvtParams> fine;
    for (double vt : grid(lo, hi, plan.vt_fine_step)) fine.push_back({vt, plan.stage1_mfd});
    evaluate_pass(run, fine, res.table);
    best_vt = res.table[argmax_accuracy(res.table)].vt;
  }

  if (stage != SweepStage::kVelocity) {
    std::vector<IvtParams> coarse;
    for (double mfd : grid(plan.mfd_min, plan.mfd_max, plan.mfd_coarse_step)) {
      coarse.push_back({best_vt, mfd});
    }
    evaluate_pass(run, coarse, res.table);
    // Stage-2 winner among stage-2 points plus the stage-1 point at best_vt.
    std::vector<SweepPoint> at_vt;
    for (const auto& p : res.table)
      if (std::abs(p.vt - best_vt) < 1e-9) at_vt.push_back(p);
    const double centre = at_vt[argmax_accuracy(at_vt)].mfd;
    const double lo = std::max(plan.mfd_min, centre - plan.mfd_coarse_step + plan.mfd_fine_step);
    const double hi = std::min(plan.mfd_max, centre + plan.mfd_coarse_step - plan.mfd_fine_step);
    std::vector<IvtParams> fine;
    for (double mfd : grid(lo, hi, plan.mfd_fine_step)) fine.push_back({best_vt, mfd});
    evaluate_pass(run, fine, res.table);
  }

  res.best = res.table[argmax_accuracy(res.table)];
  return res;
}

PeakFixation peak_fixation_vt(const std::function<std::size_t(double)>& fixation_count,
                              double vt_min, double vt_max, double step,
                              std::size_t neighborhood) {
  const auto vts = grid(vt_min, vt_max, step);
  if (vts.empty()) throw UsageError("peak_fixation_vt: empty VT range");
  std::vector<std::size_t> counts(vts.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(vts.size()), [&](std::ptrdiff_t i) {
    counts[static_cast<std::size_t>(i)] = fixation_count(vts[static_cast<std::size_t>(i)]);
  });
  PeakFixation out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < vts.size(); ++i) {
    out.counts.emplace_back(vts[i], counts[i]);
    if (counts[i] > counts[best]) best = i;
  }
  out.peak_vt = vts[best];
  out.peak_count = counts[best];
  const std::size_t lo = best >= neighborhood ? best - neighborhood : 0;
  const std::size_t hi = std::min(vts.size() - 1, best + neighborhood);
  for (std::size_t i = lo; i <= hi; ++i) out.candidates.push_back(vts[i]);
  return out;
}

}  // namespace eyeid
