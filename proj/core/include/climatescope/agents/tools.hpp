#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climatescope/agents/message.hpp"
#include "climatescope/agents/planning.hpp"
#include "climatescope/causal_order.hpp"
#include "climatescope/graph_pruning.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/stat_models.hpp"

namespace climatescope::agents {

struct ToolResult {
  std::string summary;  // plain-text table, quoted verbatim in messages
  std::vector<Artifact> artifacts;
};

/// Analysis operations bound for the pipeline. Errors propagate as
/// exceptions; the pipeline records them in the analysis-result.
class ToolBox {
 public:
  virtual ~ToolBox() = default;
  virtual ToolResult run(AnalysisTool tool, std::string_view task) = 0;
};

struct ToolOptions {
  causal::DiscoveryOptions discovery;
  double alpha = prune::kDefaultAlpha;
  double r_threshold = prune::kDefaultRThreshold;
  prune::SmootherOptions smoother;
  stats::ModelKind method = stats::ModelKind::kKernelRidge;
  double test_fraction = stats::kDefaultTestFraction;
  std::uint64_t seed = stats::kDefaultSplitSeed;
  std::optional<std::string> target;  // nullopt: last column
};

/// Tools over one data matrix:
///   summarize -> summary_stats
///   correlate -> pearson_matrix
///   discover  -> topological_order + preselect_parents + cam_prune
///   model     -> train_test_split + fit + evaluate on the held-out rows
class MatrixToolBox final : public ToolBox {
 public:
  explicit MatrixToolBox(data::DataMatrix matrix, ToolOptions options = {});

  ToolResult run(AnalysisTool tool, std::string_view task) override;

  const ToolOptions& options() const noexcept { return options_; }

 private:
  ToolResult summarize() const;
  ToolResult correlate() const;
  ToolResult discover() const;
  ToolResult model() const;

  data::DataMatrix matrix_;
  ToolOptions options_;
};

/// Numbers in tool summaries use four decimals so text stays stable across
/// platforms.
std::string format_value(double value);

}  // namespace climatescope::agents
