#include "climatescope/agents/planning.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include <fmt/format.h>

#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

constexpr std::array<std::pair<AnalysisTool, std::string_view>, 4> kToolNames{{
    {AnalysisTool::kSummarize, "summarize"},
    {AnalysisTool::kCorrelate, "correlate"},
    {AnalysisTool::kDiscover, "discover"},
    {AnalysisTool::kModel, "model"},
}};

struct KeywordRule {
  AnalysisTool tool;
  std::array<std::string_view, 4> stems;
};

constexpr std::array<KeywordRule, 3> kKeywordRules{{
    {AnalysisTool::kCorrelate, {"correlat", "associat", "relationship", ""}},
    {AnalysisTool::kDiscover, {"causal", "cause", "discover", "driver"}},
    {AnalysisTool::kModel, {"model", "predict", "regress", "forecast"}},
}};

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

bool has_message_from(const Transcript& transcript, int sender) {
  return std::any_of(transcript.messages.begin(), transcript.messages.end(),
                     [&](const Message& m) { return m.sender == sender; });
}

}  // namespace

std::string_view to_string(AnalysisTool tool) {
  for (const auto& [t, name] : kToolNames) {
    if (t == tool) {
      return name;
    }
  }
  return "summarize";
}

std::optional<AnalysisTool> parse_analysis_tool(std::string_view text) {
  for (const auto& [t, name] : kToolNames) {
    if (name == text) {
      return t;
    }
  }
  return std::nullopt;
}

std::string_view to_string(StepStage stage) {
  switch (stage) {
    case StepStage::kHypothesis: return "hypothesis";
    case StepStage::kAnalysis: return "analysis";
    case StepStage::kInterpretation: return "interpretation";
    case StepStage::kRetrieval: return "retrieval";
    case StepStage::kVerification: return "verification";
    case StepStage::kCritique: return "critique";
    case StepStage::kReport: return "report";
  }
  return "hypothesis";
}

std::vector<AnalysisTool> requested_tools(std::string_view task) {
  const auto text = lowercase(task);
  std::vector<AnalysisTool> out;
  for (const auto& rule : kKeywordRules) {
    const bool hit = std::any_of(rule.stems.begin(), rule.stems.end(), [&](std::string_view s) {
      return !s.empty() && text.find(s) != std::string::npos;
    });
    if (hit) {
      out.push_back(rule.tool);
    }
  }
  return out;
}

Plan make_plan(std::string_view task, const Registry& registry) {
  if (blank(task)) {
    throw ContractError("task text is empty");
  }
  Plan plan;
  auto add = [&](std::string description, int agent, Capability tag, StepStage stage,
                 std::optional<AnalysisTool> tool = std::nullopt) {
    plan.steps.push_back({fmt::format("S{}", plan.steps.size() + 1), std::move(description), agent,
                          tag, stage, tool});
  };

  add("Propose hypotheses for the task", kClimateScientist, Capability::kNone,
      StepStage::kHypothesis);
  auto tools = requested_tools(task);
  if (tools.empty()) {
    tools.push_back(AnalysisTool::kSummarize);
  }
  for (auto tool : tools) {
    add(fmt::format("Run the {} analysis on the data matrix", to_string(tool)), kDataModeler,
        Capability::kModel, StepStage::kAnalysis, tool);
  }
  add("Interpret the numeric analysis outputs", kPlotInterpreter, Capability::kInterpret,
      StepStage::kInterpretation);
  add("Retrieve supporting evidence from the local store", kKnowledgeRetriever,
      Capability::kRetrieve, StepStage::kRetrieval);
  add("Verify cited evidence against the store", kFactChecker, Capability::kVerify,
      StepStage::kVerification);
  add("Review the analysis for feasibility and alignment", kCritic, Capability::kCritique,
      StepStage::kCritique);
  add("Assemble the final report", kCodeDeveloper, Capability::kCode, StepStage::kReport);

  validate_plan(plan, registry);
  return plan;
}

void validate_plan(const Plan& plan, const Registry& registry) {
  if (plan.steps.empty()) {
    throw ContractError("plan has no steps");
  }
  for (const auto& s : plan.steps) {
    find_agent(registry, s.agent);
    if (s.stage == StepStage::kAnalysis && !s.tool) {
      throw ContractError(fmt::format("analysis step {} names no tool", s.id));
    }
  }
}

bool step_complete(const Transcript& transcript, const PlanStep& step) {
  return std::any_of(transcript.messages.begin(), transcript.messages.end(), [&](const Message& m) {
    if (m.step_id != step.id || m.sender != step.agent) {
      return false;
    }
    return step.stage != StepStage::kAnalysis || m.kind == MessageKind::kAnalysisResult;
  });
}

std::optional<std::size_t> current_step(const Transcript& transcript, const Plan& plan) {
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (!step_complete(transcript, plan.steps[i])) {
      return i;
    }
  }
  return std::nullopt;
}

int next_speaker(const Transcript& transcript, const Plan& plan, const Registry& registry) {
  int speaker = kCodeDeveloper;
  if (!has_message_from(transcript, kClimateStrategist)) {
    speaker = kClimateStrategist;
  } else if (!has_message_from(transcript, kPolicyPlanner)) {
    speaker = kPolicyPlanner;
  } else if (const auto step = current_step(transcript, plan)) {
    speaker = plan.steps[*step].agent;
  } else {
    const bool critiqued =
        std::any_of(transcript.messages.begin(), transcript.messages.end(), [](const Message& m) {
          return m.sender == kCritic && m.kind == MessageKind::kCritique;
        });
    speaker = critiqued ? kCodeDeveloper : kCritic;
  }
  // Registries without the standard agents fall back to the first profile.
  const bool known = std::any_of(registry.begin(), registry.end(),
                                 [&](const AgentProfile& a) { return a.id == speaker; });
  if (!known && !registry.empty()) {
    return registry.front().id;
  }
  return speaker;
}

}  // namespace climatescope::agents
