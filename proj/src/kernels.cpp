#include "eyeid/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "eyeid/error.hpp"

namespace eyeid::kernels {

namespace {

void check_sg(std::span<const double> in, const SavitzkyGolayPlan& plan,
              std::span<double> out) {
  if (in.size() != out.size()) throw ComputeError("savitzky_golay: size mismatch");
  if (in.size() < static_cast<std::size_t>(plan.frame_size)) {
    throw DataError("savitzky_golay: signal shorter than frame size");
  }
}

// Value of output sample i; identical arithmetic order in both variants.
inline double sg_at(std::span<const double> in, const SavitzkyGolayPlan& plan,
                    std::ptrdiff_t i) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.size());
  const std::ptrdiff_t half = plan.half();
  const std::vector<double>* coeffs = nullptr;
  std::ptrdiff_t start = 0;
  if (i < half) {
    coeffs = &plan.head[static_cast<std::size_t>(i)];
    start = 0;
  } else if (i >= n - half) {
    const std::ptrdiff_t k = n - 1 - i;
    coeffs = &plan.tail[static_cast<std::size_t>(k)];
    start = n - static_cast<std::ptrdiff_t>(coeffs->size());
  } else {
    coeffs = &plan.center;
    start = i - half;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs->size(); ++j) {
    acc += (*coeffs)[j] * in[static_cast<std::size_t>(start) + j];
  }
  return acc;
}

inline double rbf_at(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<const double> widths, Eigen::Index n, Eigen::Index k) {
  const double d2 = (points.row(n) - centers.row(k)).squaredNorm();
  const double w = widths[static_cast<std::size_t>(k)];
  return std::exp(-d2 / (2.0 * w * w));
}

inline void nearest_at(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                       Eigen::Index n, int& best, double& best_d2) {
  best = 0;
  best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centers.rows(); ++k) {
    const double d2 = (points.row(n) - centers.row(k)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(k);
    }
  }
}

void check_rbf(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
               std::span<const double> widths) {
  if (points.cols() != centers.cols()) throw ComputeError("rbf: dimension mismatch");
  if (static_cast<Eigen::Index>(widths.size()) != centers.rows()) {
    throw ComputeError("rbf: one width per center required");
  }
}

}  // namespace

namespace serial {

void savitzky_golay(std::span<const double> in, const SavitzkyGolayPlan& plan,
                    std::span<double> out) {
  check_sg(in, plan, out);
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sg_at(in, plan, i);
}

void rbf_activations(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<const double> widths, Eigen::MatrixXd& out) {
  check_rbf(points, centers, widths);
  out.resize(points.rows(), centers.rows());
  for (Eigen::Index n = 0; n < points.rows(); ++n)
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
      out(n, k) = rbf_at(points, centers, widths, n, k);
}

void nearest_centers(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<int> assignment, std::span<double> dist2) {
  for (Eigen::Index n = 0; n < points.rows(); ++n) {
    nearest_at(points, centers, n, assignment[static_cast<std::size_t>(n)],
               dist2[static_cast<std::size_t>(n)]);
  }
}

}  // namespace serial

namespace omp {

void savitzky_golay(std::span<const double> in, const SavitzkyGolayPlan& plan,
                    std::span<double> out) {
  check_sg(in, plan, out);
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sg_at(in, plan, i);
}

void rbf_activations(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<const double> widths, Eigen::MatrixXd& out) {
  check_rbf(points, centers, widths);
  out.resize(points.rows(), centers.rows());
  const Eigen::Index rows = points.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < rows; ++n)
    for (Eigen::Index k = 0; k < centers.rows(); ++k)
      out(n, k) = rbf_at(points, centers, widths, n, k);
}

void nearest_centers(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<int> assignment, std::span<double> dist2) {
  const Eigen::Index rows = points.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < rows; ++n) {
    nearest_at(points, centers, n, assignment[static_cast<std::size_t>(n)],
               dist2[static_cast<std::size_t>(n)]);
  }
}

}  // namespace omp

}  // namespace eyeid::kernels
