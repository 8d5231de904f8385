#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climatescope/agents/message.hpp"
#include "climatescope/agents/registry.hpp"

namespace climatescope::agents {

/// Analysis operation an analysis step asks the tool layer to run.
enum class AnalysisTool { kSummarize, kCorrelate, kDiscover, kModel };

std::string_view to_string(AnalysisTool tool);
std::optional<AnalysisTool> parse_analysis_tool(std::string_view text);

enum class StepStage { kHypothesis, kAnalysis, kInterpretation, kRetrieval, kVerification, kCritique, kReport };

std::string_view to_string(StepStage stage);

struct PlanStep {
  std::string id;  // "S1", "S2", ...
  std::string description;
  int agent = 0;
  Capability tool_tag = Capability::kNone;
  StepStage stage = StepStage::kHypothesis;
  std::optional<AnalysisTool> tool;  // analysis steps only

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Tools requested by keywords in the task, in the fixed order correlate,
/// discover, model. Empty when none is requested.
std::vector<AnalysisTool> requested_tools(std::string_view task);

/// Template expansion: hypothesis, one analysis step per requested tool (a
/// summary step when none is requested), interpretation, retrieval,
/// verification, critique, report. Throws ContractError on a blank task.
Plan make_plan(std::string_view task, const Registry& registry);

/// Throws ContractError if the plan is empty or names unknown agents.
void validate_plan(const Plan& plan, const Registry& registry);

/// A step is complete once its responsible agent has posted a message for
/// it; analysis steps need the analysis-result.
bool step_complete(const Transcript& transcript, const PlanStep& step);

/// Index of the first incomplete step, if any.
std::optional<std::size_t> current_step(const Transcript& transcript, const Plan& plan);

/// Strategist until it has spoken, then the Policy Planner until it has
/// posted the plan, then the responsible agent of the first incomplete step.
/// Once every step is complete: the Critic if it has not critiqued, else the
/// Code Developer.
int next_speaker(const Transcript& transcript, const Plan& plan, const Registry& registry);

}  // namespace climatescope::agents
