#include "climatescope/agents/tools.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "climatescope/document.hpp"
#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

// Six significant digits; artifacts embedded in transcripts must not depend
// on last-bit differences between platforms.
double stable(double value) {
  if (!std::isfinite(value) || value == 0.0) {
    return value == 0.0 ? 0.0 : value;
  }
  return std::strtod(fmt::format("{:.6g}", value).c_str(), nullptr);
}

std::string table_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out += (i == 0 ? "" : " | ") + cells[i];
  }
  return out + "\n";
}

}  // namespace

std::string format_value(double value) {
  const auto text = fmt::format("{:.4f}", value);
  return text == "-0.0000" ? "0.0000" : text;
}

MatrixToolBox::MatrixToolBox(data::DataMatrix matrix, ToolOptions options)
    : matrix_(std::move(matrix)), options_(std::move(options)) {
  if (matrix_.cols() < 2 || matrix_.rows() < 2) {
    throw ContractError("tool box needs a matrix with at least two rows and two columns");
  }
}

ToolResult MatrixToolBox::run(AnalysisTool tool, std::string_view /*task*/) {
  switch (tool) {
    case AnalysisTool::kSummarize: return summarize();
    case AnalysisTool::kCorrelate: return correlate();
    case AnalysisTool::kDiscover: return discover();
    case AnalysisTool::kModel: return model();
  }
  throw ContractError("unknown analysis tool");
}

ToolResult MatrixToolBox::summarize() const {
  auto stats = data::summary_stats(matrix_);
  ToolResult out;
  out.summary = fmt::format("Summary statistics ({} rows)\n", matrix_.rows());
  out.summary += table_row({"variable", "mean", "std", "min", "max"});
  for (auto& s : stats) {
    out.summary += table_row({s.variable, format_value(s.mean), format_value(s.std_dev),
                              format_value(s.min), format_value(s.max)});
    s.mean = stable(s.mean);
    s.std_dev = stable(s.std_dev);
    s.min = stable(s.min);
    s.max = stable(s.max);
  }
  out.artifacts.push_back({"stats.csv", doc::summary_stats_to_csv(stats)});
  return out;
}

ToolResult MatrixToolBox::correlate() const {
  auto corr = stats::pearson_matrix(matrix_);
  ToolResult out;
  out.summary = fmt::format("Pearson correlation ({} rows)\n", matrix_.rows());
  std::vector<std::string> header{"variable"};
  header.insert(header.end(), corr.variable_names.begin(), corr.variable_names.end());
  out.summary += table_row(header);
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    std::vector<std::string> row{corr.variable_names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) {
      row.push_back(format_value(corr.values(i, j)));
      corr.values(i, j) = stable(corr.values(i, j));
    }
    out.summary += table_row(row);
  }
  out.artifacts.push_back({"correlation.csv", stats::correlation_to_csv(corr)});
  return out;
}

ToolResult MatrixToolBox::discover() const {
  const auto standardized = data::ensure_standardized(matrix_);
  auto order = causal::topological_order(standardized, options_.discovery);
  auto full = prune::full_dag_from_order(order, standardized.variable_names());
  const auto candidates = full.graph.edges().size();
  auto pre = prune::preselect_parents(standardized, full, options_.r_threshold);
  auto pruned = prune::cam_prune(standardized, pre, options_.alpha, options_.smoother);

  const auto& names = pruned.variable_names;
  ToolResult out;
  out.summary = "Causal order (sources first): ";
  for (std::size_t k = 0; k < order.order.size(); ++k) {
    out.summary += (k == 0 ? "" : ", ") + names[order.order[k]];
  }
  out.summary += fmt::format("\nRetained edges ({} of {} candidates):\n",
                             pruned.graph.edges().size(), candidates);
  for (auto& [edge, p] : pruned.edge_pvalues) {
    out.summary += fmt::format("{} -> {} (p = {:.3g})\n", names[edge.first], names[edge.second], p);
    p = stable(p);
  }
  for (auto& round : pruned.order.trace) {
    round.bandwidth = stable(round.bandwidth);
    for (auto& v : round.variances) {
      v = stable(v);
    }
  }
  doc::GraphDocument graph_doc{std::move(pruned),
                               {options_.alpha, options_.r_threshold, options_.smoother.ridge},
                               candidates};
  out.artifacts.push_back({"graph.json", doc::to_document(graph_doc)});
  return out;
}

ToolResult MatrixToolBox::model() const {
  const std::string target =
      options_.target ? *options_.target : matrix_.variable_names().back();
  stats::HoldoutOptions holdout;
  holdout.method = options_.method;
  holdout.test_fraction = options_.test_fraction;
  holdout.seed = options_.seed;
  const auto result = stats::holdout_evaluate(matrix_, target, holdout);

  ToolResult out;
  out.summary = fmt::format(
      "Model {} for {} ({} train / {} test rows, seed {})\nMAE = {}, RMSE = {}, R2 = {}\n",
      stats::to_string(options_.method), target, result.train_rows.size(), result.test_rows.size(),
      options_.seed, format_value(result.metrics.mae), format_value(result.metrics.rmse),
      format_value(result.metrics.r2));
  doc::MetricsDocument metrics{target,
                               options_.method,
                               {stable(result.metrics.mae), stable(result.metrics.rmse),
                                stable(result.metrics.r2)},
                               options_.test_fraction,
                               options_.seed,
                               result.train_rows.size(),
                               result.test_rows.size(),
                               std::string(stats::method_note(options_.method))};
  out.artifacts.push_back({"metrics.json", doc::to_document(metrics)});
  return out;
}

}  // namespace climatescope::agents
