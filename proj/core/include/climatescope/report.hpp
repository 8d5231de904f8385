#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climatescope/agents/message.hpp"
#include "climatescope/document.hpp"
#include "climatescope/graph_pruning.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/stat_models.hpp"

namespace climatescope::report {

/// Seven-dimension review record. Components are integers in [0, 10] or
/// absent. A stored overall is rendered as given, never recomputed.
struct RubricScore {
  std::optional<int> originality;
  std::optional<int> importance;
  std::optional<int> support_of_claims;
  std::optional<int> soundness;
  std::optional<int> clarity;
  std::optional<int> value_to_community;
  std::optional<int> contextualization;
  std::optional<double> overall;
};

/// (name, value) of each present component, in declaration order.
std::vector<std::pair<std::string, int>> present_components(const RubricScore& scores);

/// Throws ContractError for a component outside [0, 10].
void validate_rubric(const RubricScore& scores);

/// Component name -> weight.
using RubricWeights = std::map<std::string, double, std::less<>>;

/// Weighted mean of the present components; uniform when `weights` is
/// absent. Weights must be nonnegative, name only present components and sum
/// to 1 within 1e-9. Throws ContractError when no component is present.
double aggregate_rubric(const RubricScore& scores,
                        const std::optional<RubricWeights>& weights = std::nullopt);

std::string rubric_to_document(const RubricScore& scores);
RubricScore rubric_from_document(std::string_view text);

/// Nodes n0..n{d-1} labelled with variable names in index order, then edges
/// in lexicographic (parent, child) order labelled with their p-values.
std::string export_graph_dot(const prune::CausalGraph& graph);

/// Reads the subset of DOT that export_graph_dot writes.
prune::CausalGraph parse_graph_dot(std::string_view dot);

/// Artifacts of one analysis, as written by the CLI into a bundle directory.
struct AnalysisReport {
  std::string task;
  data::DataMatrix matrix;
  std::vector<data::ColumnSummary> summary;
  stats::CorrelationMatrix correlation;
  doc::OrderDocument order;
  doc::GraphDocument graph;
  doc::MetricsDocument metrics;
  std::optional<agents::Transcript> transcript;
  std::optional<RubricScore> rubric;
  std::vector<std::string> artifact_files;  // file names, sorted
};

inline constexpr std::string_view kRequiredArtifacts[] = {
    "matrix.json", "stats.csv", "correlation.csv", "order.json", "graph.json", "metrics.json"};
inline constexpr std::string_view kOptionalArtifacts[] = {"transcript.json", "rubric.json",
                                                          "task.txt"};

/// Throws RenderError naming the first missing required artifact, and
/// ParseError for a malformed one.
AnalysisReport load_bundle(const std::filesystem::path& directory);

/// Markdown-style document with the sections Task, Data Summary,
/// Correlations, Causal Discovery, Models & Metrics, Transcript Digest,
/// Rubric (only when present) and Reproducibility.
std::string render_report(const AnalysisReport& report);

/// Plot data as (file name, content): leaf_variances.csv with one row per
/// (round, variable) and a gnuplot script leaf_variances.gp that reads it.
std::vector<std::pair<std::string, std::string>> plot_files(const AnalysisReport& report);

}  // namespace climatescope::report
