#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climatescope/causal_order.hpp"
#include "climatescope/graph_pruning.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/score_engine.hpp"
#include "climatescope/stat_models.hpp"

// Structured-text (JSON) documents exchanged between CLI stages. Every
// document carries {"format": "climatescope", "version": 1, "kind": ...};
// readers reject other kinds with ParseError.
namespace climatescope::doc {

inline constexpr int kFormatVersion = 1;

std::string to_document(const data::DataMatrix& matrix);
data::DataMatrix data_matrix_from_document(std::string_view text);

std::string to_document(const score::ScoreEstimate& estimate,
                        const std::vector<std::string>& variable_names);

/// Discovery settings recorded next to the order for reproducibility.
struct DiscoverySettings {
  std::optional<double> bandwidth;  // nullopt: per-round heuristic
  double bandwidth_scale = 1.0;
  double ridge = 0.0;
};

struct OrderDocument {
  std::vector<std::string> variable_names;
  causal::TopologicalOrder order;
  DiscoverySettings settings;
};

std::string to_document(const OrderDocument& order);
OrderDocument order_from_document(std::string_view text);

struct PruneSettings {
  double alpha = prune::kDefaultAlpha;
  double r_threshold = prune::kDefaultRThreshold;
  double smoother_ridge = 0.0;
};

struct GraphDocument {
  prune::CausalGraph graph;
  PruneSettings settings;
  std::size_t candidate_edges = 0;  // edges before preselection and pruning
};

std::string to_document(const GraphDocument& graph);
GraphDocument graph_from_document(std::string_view text);

struct MetricsDocument {
  std::string target;
  stats::ModelKind method = stats::ModelKind::kKernelRidge;
  stats::MetricsReport metrics;
  double test_fraction = stats::kDefaultTestFraction;
  std::uint64_t seed = stats::kDefaultSplitSeed;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::string note;
};

std::string to_document(const MetricsDocument& metrics);
MetricsDocument metrics_from_document(std::string_view text);

std::string to_document(const stats::RegressionModel& model);
stats::RegressionModel regression_model_from_document(std::string_view text);

/// CSV: variable,mean,std,min,max
std::string summary_stats_to_csv(const std::vector<data::ColumnSummary>& stats);
std::vector<data::ColumnSummary> summary_stats_from_csv(std::string_view text);

/// Kind tag of a document, or ParseError if it is not one of ours.
std::string document_kind(std::string_view text);

}  // namespace climatescope::doc
