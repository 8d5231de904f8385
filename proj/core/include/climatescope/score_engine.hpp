#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "climatescope/indicator_data.hpp"

namespace climatescope::score {

inline constexpr double kDefaultRidge = 1.0;
/// Default bandwidth is this multiple of the median heuristic.
inline constexpr double kDefaultBandwidthScale = 2.0;

/// RBF bandwidth sigma and ridge regularizer eta, both strictly positive.
class KernelConfig {
 public:
  KernelConfig(double bandwidth, double ridge = kDefaultRidge);

  double bandwidth() const noexcept { return bandwidth_; }
  double ridge() const noexcept { return ridge_; }

  friend bool operator==(const KernelConfig&, const KernelConfig&) = default;

 private:
  double bandwidth_;
  double ridge_;
};

/// Median of the pairwise Euclidean distances between rows. Throws
/// NumericError when every distance is zero and ContractError for n < 2.
double median_bandwidth(const Eigen::MatrixXd& points);
double median_bandwidth(const data::DataMatrix& matrix);

/// scale times the median-heuristic bandwidth, with the given ridge.
KernelConfig auto_config(const data::DataMatrix& matrix, double ridge = kDefaultRidge,
                         double scale = kDefaultBandwidthScale);

/// k(a, b) = exp(-|a - b|^2 / (2 sigma^2)) for every row pair of `a` and `b`.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double bandwidth);

/// d k(x_i, x_j) / d x_j[dim], given the kernel value.
inline double rbf_first_derivative(double kernel_value, double xi_d, double xj_d,
                                   double bandwidth) {
  return kernel_value * (xi_d - xj_d) / (bandwidth * bandwidth);
}

/// d^2 k(x_i, x_j) / d x_j[dim]^2, given the kernel value.
inline double rbf_second_derivative(double kernel_value, double xi_d, double xj_d,
                                    double bandwidth) {
  const double s2 = bandwidth * bandwidth;
  const double diff = xi_d - xj_d;
  return kernel_value * (diff * diff / (s2 * s2) - 1.0 / s2);
}

/// Kernel table over the samples together with the row-summed derivative
/// tables the Stein estimators consume. Per-entry derivatives are computed on
/// demand from the stored kernel values.
struct KernelTables {
  Eigen::MatrixXd points;     // n x d samples
  Eigen::MatrixXd gram;       // K[i][j]
  Eigen::MatrixXd grad_sum;   // sum_j d k(x_i, x_j) / d x_j[dim]     (n x d)
  Eigen::MatrixXd hess_sum;   // sum_j d^2 k(x_i, x_j) / d x_j[dim]^2 (n x d)
  double bandwidth = 1.0;

  double first_derivative(Eigen::Index i, Eigen::Index j, Eigen::Index dim) const {
    return rbf_first_derivative(gram(i, j), points(i, dim), points(j, dim), bandwidth);
  }
  double second_derivative(Eigen::Index i, Eigen::Index j, Eigen::Index dim) const {
    return rbf_second_derivative(gram(i, j), points(i, dim), points(j, dim), bandwidth);
  }
};

/// Requires a standardized matrix with finite entries.
KernelTables rbf_kernel(const data::DataMatrix& matrix, const KernelConfig& config);

/// Per-sample score vectors and (optionally) the diagonal of the score
/// Jacobian, tied to the configuration and shape that produced them.
struct ScoreEstimate {
  Eigen::MatrixXd scores;         // n x d
  Eigen::MatrixXd jacobian_diag;  // n x d, empty until estimated
  KernelConfig config{1.0};

  bool has_jacobian() const noexcept { return jacobian_diag.size() != 0; }
};

inline constexpr std::size_t kMinSteinSamples = 10;

/// First-order Stein estimate: scores = -(K + eta I)^{-1} G.
ScoreEstimate stein_score(const data::DataMatrix& matrix, const KernelConfig& config);

/// Second-order Stein estimate of d s_j / d x_j:
/// -(s * s) + (K + eta I)^{-1} H, elementwise product on the first term.
ScoreEstimate stein_jacobian_diag(const data::DataMatrix& matrix, const KernelConfig& config,
                                  const ScoreEstimate& score);

/// Both estimates from a single factorization of K + eta I.
ScoreEstimate stein_score_and_jacobian(const data::DataMatrix& matrix,
                                       const KernelConfig& config);

}  // namespace climatescope::score
