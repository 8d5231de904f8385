#include "climatescope/stat_models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include "climatescope/error.hpp"
#include "csv_field.hpp"
#include "climatescope/random.hpp"

namespace climatescope::stats {

namespace {

Eigen::VectorXd demeaned(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.array() - v.mean();
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double sum_sq_error(const Eigen::VectorXd& target, const std::vector<std::size_t>& rows) {
  if (rows.empty()) {
    return 0.0;
  }
  double mean = 0.0;
  for (auto r : rows) mean += target(static_cast<Eigen::Index>(r));
  mean /= static_cast<double>(rows.size());
  double sse = 0.0;
  for (auto r : rows) {
    const double e = target(static_cast<Eigen::Index>(r)) - mean;
    sse += e * e;
  }
  return sse;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params)
      : x_(x), y_(y), params_(params) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    TreeNode node;
    node.samples = rows.size();
    double mean = 0.0;
    for (auto r : rows) mean += y_(static_cast<Eigen::Index>(r));
    node.value = mean / static_cast<double>(rows.size());
    tree_.nodes.push_back(node);

    const double sse = sum_sq_error(y_, rows);
    const bool depth_left = !params_.max_depth || depth < *params_.max_depth;
    if (!depth_left || sse <= 0.0 || rows.size() < 2 * params_.min_leaf) {
      return id;
    }
    const auto split = best_split(rows);
    if (split.feature < 0 || !(split.sse < sse)) {
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
      (x_(static_cast<Eigen::Index>(r), split.feature) < split.threshold ? left : right).push_back(r);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& stored = tree_.nodes[static_cast<std::size_t>(id)];
    stored.feature = split.feature;
    stored.threshold = split.threshold;
    stored.left = l;
    stored.right = r;
    return id;
  }

  SplitCandidate best_split(const std::vector<std::size_t>& rows) const {
    SplitCandidate best;
    const std::size_t m = rows.size();
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::vector<std::size_t> sorted = rows;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
      });
      // prefix sums over the sorted order
      std::vector<double> sum(m + 1, 0.0);
      std::vector<double> sum_sq(m + 1, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        const double v = y_(static_cast<Eigen::Index>(sorted[k]));
        sum[k + 1] = sum[k] + v;
        sum_sq[k + 1] = sum_sq[k] + v * v;
      }
      for (std::size_t k = params_.min_leaf; k + params_.min_leaf <= m; ++k) {
        const double lo = x_(static_cast<Eigen::Index>(sorted[k - 1]), f);
        const double hi = x_(static_cast<Eigen::Index>(sorted[k]), f);
        if (!(lo < hi)) {
          continue;
        }
        const double nl = static_cast<double>(k);
        const double nr = static_cast<double>(m - k);
        const double sl = sum[k];
        const double sr = sum[m] - sum[k];
        const double sse_l = std::max(0.0, sum_sq[k] - sl * sl / nl);
        const double sse_r = std::max(0.0, (sum_sq[m] - sum_sq[k]) - sr * sr / nr);
        const double total = sse_l + sse_r;
        // strict improvement keeps the lower feature / lower threshold on ties
        if (total < best.sse) {
          best = {static_cast<int>(f), 0.5 * (lo + hi), total};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  TreeParams params_;
  RegressionTree tree_;
};

double parse_cell(const std::string& text, std::size_t row, std::size_t col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("non-numeric correlation cell '" + text + "'", row, col);
  }
  return v;
}

}  // namespace

double pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    throw ContractError("pearson inputs have different lengths");
  }
  if (x.size() < 2) {
    throw ContractError("pearson needs at least two observations");
  }
  const Eigen::VectorXd dx = demeaned(x);
  const Eigen::VectorXd dy = demeaned(y);
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DataError("pearson correlation of a constant column");
  }
  return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const data::DataMatrix& matrix) {
  const auto d = static_cast<Eigen::Index>(matrix.cols());
  const auto& x = matrix.values();
  CorrelationMatrix out{matrix.variable_names(), Eigen::MatrixXd::Identity(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = demeaned(x.col(j)).squaredNorm();
    if (!(var > 1e-24 * std::max(1.0, x.col(j).squaredNorm()))) {
      throw DegenerateColumnError(matrix.variable_names()[static_cast<std::size_t>(j)]);
    }
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      const double r = pearson(x.col(a), x.col(b));
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

std::string correlation_to_csv(const CorrelationMatrix& correlation) {
  std::string out = "variable";
  for (const auto& name : correlation.variable_names) {
    out += "," + detail::csv_field(name);
  }
  out += '\n';
  for (Eigen::Index a = 0; a < correlation.values.rows(); ++a) {
    out += detail::csv_field(correlation.variable_names[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < correlation.values.cols(); ++b) {
      out += fmt::format(",{}", correlation.values(a, b));
    }
    out += '\n';
  }
  return out;
}

CorrelationMatrix correlation_from_csv(std::string_view csv_text) {
  boost::escaped_list_separator<char> sep('\x01', ',', '"');
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < csv_text.size()) {
    auto end = csv_text.find('\n', start);
    if (end == std::string_view::npos) end = csv_text.size();
    std::string line(csv_text.substr(start, end - start));
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    boost::tokenizer<boost::escaped_list_separator<char>> tok(line, sep);
    rows.emplace_back(tok.begin(), tok.end());
  }
  if (rows.empty() || rows.front().size() < 2) {
    throw ParseError("correlation CSV needs a header with at least one variable", 1, 1);
  }
  const std::size_t d = rows.front().size() - 1;
  if (rows.size() != d + 1) {
    throw ParseError(fmt::format("expected {} data rows, found {}", d, rows.size() - 1));
  }
  CorrelationMatrix out;
  out.variable_names.assign(rows.front().begin() + 1, rows.front().end());
  out.values.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t a = 0; a < d; ++a) {
    const auto& row = rows[a + 1];
    if (row.size() != d + 1) {
      throw ParseError("ragged correlation row", a + 2, row.size());
    }
    if (row[0] != out.variable_names[a]) {
      throw ParseError("row label '" + row[0] + "' does not match the header", a + 2, 1);
    }
    for (std::size_t b = 0; b < d; ++b) {
      out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          parse_cell(row[b + 1], a + 2, b + 2);
    }
  }
  return out;
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kKernelRidge ? "kernel-ridge" : "tree";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  if (text == "kernel-ridge") return ModelKind::kKernelRidge;
  if (text == "tree") return ModelKind::kTree;
  return std::nullopt;
}

std::string_view method_note(ModelKind kind) {
  return kind == ModelKind::kKernelRidge
             ? "Kernel ridge regression with an RBF kernel stands in for support vector regression."
             : "Greedy CART regression tree on squared error.";
}

RegressionModel fit_kernel_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                 const score::KernelConfig& config) {
  if (features.rows() < 2) {
    throw ContractError("kernel ridge regression needs at least two rows");
  }
  if (features.rows() != target.size()) {
    throw ContractError("feature and target row counts differ");
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw NumericError("kernel ridge inputs contain non-finite values");
  }
  KernelRidgeModel krr;
  krr.inputs = features;
  krr.bandwidth = config.bandwidth();
  krr.ridge = config.ridge();
  krr.intercept = target.mean();

  Eigen::MatrixXd system = score::rbf_gram(features, features, config.bandwidth());
  system.diagonal().array() += config.ridge();
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericError(fmt::format("kernel ridge factorization failed (eta = {})", config.ridge()));
  }
  krr.coefficients = llt.solve(demeaned(target));
  if (!krr.coefficients.allFinite()) {
    throw NumericError(fmt::format("kernel ridge solve is numerically singular (rcond {})",
                                   llt.rcond()));
  }

  RegressionModel model;
  model.kind = ModelKind::kKernelRidge;
  model.feature_count = static_cast<std::size_t>(features.cols());
  model.body = std::move(krr);
  return model;
}

RegressionModel fit_regression_tree(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                                    const TreeParams& params) {
  if (features.rows() != target.size()) {
    throw ContractError("feature and target row counts differ");
  }
  if (params.min_leaf < 1) {
    throw ContractError("min_leaf must be at least 1");
  }
  if (features.rows() == 0 || static_cast<std::size_t>(features.rows()) < params.min_leaf) {
    throw ContractError("regression tree needs at least min_leaf rows");
  }
  RegressionModel model;
  model.kind = ModelKind::kTree;
  model.feature_count = static_cast<std::size_t>(features.cols());
  model.body = TreeBuilder(features, target, params).build();
  return model;
}

Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& features) {
  if (static_cast<std::size_t>(features.cols()) != model.feature_count) {
    throw ContractError(fmt::format("model expects {} features, got {}", model.feature_count,
                                    features.cols()));
  }
  if (const auto* krr = std::get_if<KernelRidgeModel>(&model.body)) {
    Eigen::VectorXd out = score::rbf_gram(features, krr->inputs, krr->bandwidth) * krr->coefficients;
    return out.array() + krr->intercept;
  }
  const auto& tree = std::get<RegressionTree>(model.body);
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const TreeNode* node = &tree.nodes.front();
    while (!node->is_leaf()) {
      const int next = features(i, node->feature) < node->threshold ? node->left : node->right;
      node = &tree.nodes[static_cast<std::size_t>(next)];
    }
    out(i) = node->value;
  }
  return out;
}

MetricsReport evaluate(const Eigen::Ref<const Eigen::VectorXd>& target,
                       const Eigen::Ref<const Eigen::VectorXd>& predicted) {
  if (target.size() != predicted.size()) {
    throw ContractError(fmt::format("evaluate: {} targets but {} predictions", target.size(),
                                    predicted.size()));
  }
  if (target.size() < 2) {
    throw ContractError("evaluate needs at least two observations");
  }
  const double ss_tot = demeaned(target).squaredNorm();
  if (!(ss_tot > 0.0)) {
    throw DataError("R^2 is undefined for a constant target");
  }
  const Eigen::VectorXd err = target - predicted;
  const double m = static_cast<double>(target.size());
  MetricsReport report;
  report.mae = err.cwiseAbs().sum() / m;
  const double ss_res = err.squaredNorm();
  report.rmse = std::sqrt(ss_res / m);
  // sqrt rounding can put RMSE one ulp under MAE when all |e| are equal
  report.rmse = std::max(report.rmse, report.mae);
  report.r2 = 1.0 - ss_res / ss_tot;
  return report;
}

TrainTestSplit train_test_split(const data::DataMatrix& matrix, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractError("test fraction must lie in (0, 1)");
  }
  const std::size_t n = matrix.rows();
  const auto test_count = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_count == 0 || test_count >= n) {
    throw ContractError(fmt::format("test fraction {} on {} rows leaves an empty partition",
                                    test_fraction, n));
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  Rng rng(seed);
  seeded_shuffle(rows, rng);

  TrainTestSplit out;
  out.test_rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(test_count));
  out.train_rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(test_count), rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  out.test = matrix.select_rows(out.test_rows);
  out.train = matrix.select_rows(out.train_rows);
  return out;
}

HoldoutResult holdout_evaluate(const data::DataMatrix& matrix, std::string_view target,
                               const HoldoutOptions& options) {
  const auto target_index = matrix.index_of(target);
  if (!target_index) {
    throw ContractError(fmt::format("unknown target variable '{}'", target));
  }
  if (matrix.cols() < 2) {
    throw ContractError("modelling needs at least one feature column besides the target");
  }
  std::vector<std::size_t> feature_columns;
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    if (j != *target_index) {
      feature_columns.push_back(j);
    }
  }
  const auto split = train_test_split(matrix, options.test_fraction, options.seed);
  auto features_of = [&](const data::DataMatrix& part) {
    Eigen::MatrixXd x(part.values().rows(), static_cast<Eigen::Index>(feature_columns.size()));
    for (std::size_t k = 0; k < feature_columns.size(); ++k) {
      x.col(static_cast<Eigen::Index>(k)) = part.values().col(static_cast<Eigen::Index>(feature_columns[k]));
    }
    return x;
  };
  Eigen::MatrixXd x_train = features_of(split.train);
  Eigen::MatrixXd x_test = features_of(split.test);
  const Eigen::VectorXd y_train = split.train.values().col(static_cast<Eigen::Index>(*target_index));
  const Eigen::VectorXd y_test = split.test.values().col(static_cast<Eigen::Index>(*target_index));

  for (Eigen::Index k = 0; k < x_train.cols(); ++k) {
    const double mean = x_train.col(k).mean();
    const double sd = std::sqrt((x_train.col(k).array() - mean).square().mean());
    const double scale = sd > 0.0 ? sd : 1.0;
    x_train.col(k) = (x_train.col(k).array() - mean) / scale;
    x_test.col(k) = (x_test.col(k).array() - mean) / scale;
  }

  HoldoutResult out;
  if (options.method == ModelKind::kKernelRidge) {
    const score::KernelConfig config(score::median_bandwidth(x_train), options.ridge);
    out.model = fit_kernel_ridge(x_train, y_train, config);
  } else {
    out.model = fit_regression_tree(x_train, y_train, options.tree);
  }
  out.model.target = std::string(target);
  for (auto j : feature_columns) {
    out.model.features.push_back(matrix.variable_names()[j]);
  }
  out.metrics = evaluate(y_test, predict(out.model, x_test));
  out.train_rows = split.train_rows;
  out.test_rows = split.test_rows;
  return out;
}

}  // namespace climatescope::stats
