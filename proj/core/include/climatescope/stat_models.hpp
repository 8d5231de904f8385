#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "climatescope/indicator_data.hpp"
#include "climatescope/score_engine.hpp"

namespace climatescope::stats {

/// Pearson coefficient, clamped to [-1, 1]. Throws DataError if either
/// input is constant.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

struct CorrelationMatrix {
  std::vector<std::string> variable_names;
  Eigen::MatrixXd values;  // symmetric, unit diagonal
};

CorrelationMatrix pearson_matrix(const data::DataMatrix& matrix);

/// Header row of names (first cell empty) followed by one labelled row per
/// variable. Values use shortest round-trip formatting.
std::string correlation_to_csv(const CorrelationMatrix& correlation);
CorrelationMatrix correlation_from_csv(std::string_view csv_text);

enum class ModelKind { kKernelRidge, kTree };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

/// One-line description of the method for reports.
std::string_view method_note(ModelKind kind);

/// Kernel ridge regression on the centred target. Stands in for SVR: same
/// RBF machinery, closed-form solve.
struct KernelRidgeModel {
  Eigen::MatrixXd inputs;        // training rows
  Eigen::VectorXd coefficients;  // (K + eta I)^{-1} (y - mean(y))
  double bandwidth = 1.0;
  double ridge = 1.0;
  double intercept = 0.0;        // mean(y)
};

/// Internal nodes have a feature index and two children; leaves have
/// feature == -1. Rows with x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean target of the node's training rows
  std::size_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct RegressionModel {
  ModelKind kind = ModelKind::kKernelRidge;
  std::string target;
  std::vector<std::string> features;
  std::size_t feature_count = 0;
  std::variant<KernelRidgeModel, RegressionTree> body;
};

RegressionModel fit_kernel_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                 const score::KernelConfig& config);

struct TreeParams {
  std::optional<std::size_t> max_depth;  // nullopt: unlimited
  std::size_t min_leaf = 1;
};

/// Greedy CART on squared error. Candidate thresholds are midpoints between
/// consecutive distinct sorted values; ties go to the lower feature index,
/// then the lower threshold.
RegressionModel fit_regression_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                    const TreeParams& params = {});

Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& features);

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

MetricsReport evaluate(const Eigen::Ref<const Eigen::VectorXd>& target,
                       const Eigen::Ref<const Eigen::VectorXd>& predicted);

struct TrainTestSplit {
  data::DataMatrix train;
  data::DataMatrix test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

inline constexpr double kDefaultTestFraction = 0.2;
inline constexpr std::uint64_t kDefaultSplitSeed = 42;

/// Seeded shuffle, then the first round(fraction * n) rows form the test set.
TrainTestSplit train_test_split(const data::DataMatrix& matrix, double test_fraction,
                                std::uint64_t seed);

inline constexpr double kDefaultModelRidge = 0.1;

struct HoldoutOptions {
  ModelKind method = ModelKind::kKernelRidge;
  double test_fraction = kDefaultTestFraction;
  std::uint64_t seed = kDefaultSplitSeed;
  double ridge = kDefaultModelRidge;             // kernel ridge only
  TreeParams tree{std::size_t{4}, std::size_t{5}};  // tree only
};

struct HoldoutResult {
  RegressionModel model;
  MetricsReport metrics;  // on the test rows
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Splits the rows, fits `target` on every other column using the training
/// rows and scores the held-out rows. Features are z-scored with training
/// moments; the kernel bandwidth is the median heuristic on the training
/// features. Throws ContractError for an unknown target or a one-column
/// matrix.
HoldoutResult holdout_evaluate(const data::DataMatrix& matrix, std::string_view target,
                               const HoldoutOptions& options = {});

}  // namespace climatescope::stats
