#include "climatescope/score_engine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "climatescope/error.hpp"

namespace climatescope::score {

namespace {

void require_standardized(const data::DataMatrix& matrix) {
  if (!matrix.standardized()) {
    throw ContractError("score estimation requires a standardized matrix");
  }
  if (!matrix.values().allFinite()) {
    throw NumericError("score estimation input contains non-finite values");
  }
}

void require_samples(const data::DataMatrix& matrix) {
  if (matrix.rows() < kMinSteinSamples) {
    throw ContractError(fmt::format("Stein estimation needs at least {} samples, got {}",
                                    kMinSteinSamples, matrix.rows()));
  }
  if (matrix.cols() == 0) {
    throw ContractError("Stein estimation needs at least one variable");
  }
}

/// Cholesky factor of K + eta I with a failure diagnostic.
Eigen::LLT<Eigen::MatrixXd> factor_regularized(const Eigen::MatrixXd& gram, double ridge) {
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericError(fmt::format(
        "Cholesky factorization of K + eta I failed (n = {}, eta = {})", gram.rows(), ridge));
  }
  const double rcond = llt.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) {
    throw NumericError(fmt::format(
        "K + eta I is numerically singular (reciprocal condition estimate {})", rcond));
  }
  return llt;
}

Eigen::MatrixXd solve_checked(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& rhs) {
  Eigen::MatrixXd x = llt.solve(rhs);
  if (!x.allFinite()) {
    throw NumericError(fmt::format(
        "Stein solve produced non-finite values (reciprocal condition estimate {})",
        llt.rcond()));
  }
  return x;
}

}  // namespace

KernelConfig::KernelConfig(double bandwidth, double ridge) : bandwidth_(bandwidth), ridge_(ridge) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ContractError(fmt::format("kernel bandwidth must be positive, got {}", bandwidth));
  }
  if (!(ridge > 0.0) || !std::isfinite(ridge)) {
    throw ContractError(fmt::format("ridge must be positive, got {}", ridge));
  }
}

double median_bandwidth(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) {
    throw ContractError("median bandwidth needs at least two rows");
  }
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      distances.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  const std::size_t m = distances.size();
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  double median = *mid;
  if (m % 2 == 0) {
    median = 0.5 * (median + *std::max_element(distances.begin(), mid));
  }
  if (!(median > 0.0)) {
    if (*std::max_element(distances.begin(), distances.end()) == 0.0) {
      throw NumericError("degenerate sample: all rows are identical");
    }
    // More than half the pairs coincide; fall back to the smallest positive gap.
    double smallest = 0.0;
    for (double v : distances) {
      if (v > 0.0 && (smallest == 0.0 || v < smallest)) {
        smallest = v;
      }
    }
    median = smallest;
  }
  return median;
}

double median_bandwidth(const data::DataMatrix& matrix) {
  return median_bandwidth(matrix.values());
}

KernelConfig auto_config(const data::DataMatrix& matrix, double ridge, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ContractError(fmt::format("bandwidth scale must be positive, got {}", scale));
  }
  return KernelConfig(scale * median_bandwidth(matrix), ridge);
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double bandwidth) {
  if (a.cols() != b.cols()) {
    throw ContractError("kernel inputs have different widths");
  }
  const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k(i, j) = std::exp(scale * (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return k;
}

KernelTables rbf_kernel(const data::DataMatrix& matrix, const KernelConfig& config) {
  require_standardized(matrix);
  const Eigen::MatrixXd& x = matrix.values();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double sigma = config.bandwidth();
  const double scale = -1.0 / (2.0 * sigma * sigma);

  KernelTables t;
  t.points = x;
  t.bandwidth = sigma;
  t.gram.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    t.gram(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::exp(scale * (x.row(i) - x.row(j)).squaredNorm());
      t.gram(i, j) = v;
      t.gram(j, i) = v;
    }
  }

  t.grad_sum = Eigen::MatrixXd::Zero(n, d);
  t.hess_sum = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index dim = 0; dim < d; ++dim) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double g = 0.0;
      double h = 0.0;
      const double xi = x(i, dim);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double k = t.gram(j, i);  // column access; K is symmetric
        g += rbf_first_derivative(k, xi, x(j, dim), sigma);
        h += rbf_second_derivative(k, xi, x(j, dim), sigma);
      }
      t.grad_sum(i, dim) = g;
      t.hess_sum(i, dim) = h;
    }
  }
  return t;
}

ScoreEstimate stein_score(const data::DataMatrix& matrix, const KernelConfig& config) {
  require_standardized(matrix);
  require_samples(matrix);
  const auto tables = rbf_kernel(matrix, config);
  const auto llt = factor_regularized(tables.gram, config.ridge());
  ScoreEstimate out{-solve_checked(llt, tables.grad_sum), Eigen::MatrixXd(), config};
  return out;
}

ScoreEstimate stein_jacobian_diag(const data::DataMatrix& matrix, const KernelConfig& config,
                                  const ScoreEstimate& score) {
  require_standardized(matrix);
  require_samples(matrix);
  if (!(score.config == config)) {
    throw ContractError("score estimate was produced with a different kernel configuration");
  }
  if (score.scores.rows() != static_cast<Eigen::Index>(matrix.rows()) ||
      score.scores.cols() != static_cast<Eigen::Index>(matrix.cols())) {
    throw ContractError(fmt::format("score estimate is {}x{} but the matrix is {}x{}",
                                    score.scores.rows(), score.scores.cols(), matrix.rows(),
                                    matrix.cols()));
  }
  const auto tables = rbf_kernel(matrix, config);
  const auto llt = factor_regularized(tables.gram, config.ridge());
  ScoreEstimate out = score;
  out.jacobian_diag = -score.scores.cwiseProduct(score.scores) + solve_checked(llt, tables.hess_sum);
  return out;
}

ScoreEstimate stein_score_and_jacobian(const data::DataMatrix& matrix, const KernelConfig& config) {
  require_standardized(matrix);
  require_samples(matrix);
  const auto tables = rbf_kernel(matrix, config);
  const auto llt = factor_regularized(tables.gram, config.ridge());

  const Eigen::Index d = tables.grad_sum.cols();
  Eigen::MatrixXd rhs(tables.grad_sum.rows(), 2 * d);
  rhs << tables.grad_sum, tables.hess_sum;
  const Eigen::MatrixXd solved = solve_checked(llt, rhs);

  ScoreEstimate out;
  out.config = config;
  out.scores = -solved.leftCols(d);
  out.jacobian_diag = -out.scores.cwiseProduct(out.scores) + solved.rightCols(d);
  return out;
}

}  // namespace climatescope::score
