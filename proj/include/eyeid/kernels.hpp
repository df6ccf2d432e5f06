#pragma once

#include <span>

#include <Eigen/Dense>

#include "eyeid/preprocess.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and benchmarks; both must
// produce identical results for identical inputs.
namespace eyeid::kernels {

namespace serial {

void savitzky_golay(std::span<const double> in, const SavitzkyGolayPlan& plan,
                    std::span<double> out);

/// out(n, k) = exp(-|x_n - c_k|^2 / (2 width_k^2)); rows of `points` and
/// `centers` are feature vectors.
void rbf_activations(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<const double> widths, Eigen::MatrixXd& out);

/// Index of and squared distance to the nearest center for every point;
/// ties go to the lower center index.
void nearest_centers(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<int> assignment, std::span<double> dist2);

}  // namespace serial

namespace omp {

void savitzky_golay(std::span<const double> in, const SavitzkyGolayPlan& plan,
                    std::span<double> out);

void rbf_activations(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<const double> widths, Eigen::MatrixXd& out);

void nearest_centers(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                     std::span<int> assignment, std::span<double> dist2);

}  // namespace omp

}  // namespace eyeid::kernels
