#include "climatescope/agents/registry.hpp"

#include <array>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

constexpr std::array<std::pair<Capability, std::string_view>, 9> kCapabilityNames{{
    {Capability::kPlan, "plan"},
    {Capability::kRetrieve, "retrieve"},
    {Capability::kModel, "model"},
    {Capability::kInterpret, "interpret"},
    {Capability::kVerify, "verify"},
    {Capability::kCode, "code"},
    {Capability::kCritique, "critique"},
    {Capability::kCoordinate, "coordinate"},
    {Capability::kNone, "none"},
}};

}  // namespace

std::string_view to_string(Capability capability) {
  for (const auto& [c, name] : kCapabilityNames) {
    if (c == capability) {
      return name;
    }
  }
  return "none";
}

std::optional<Capability> parse_capability(std::string_view text) {
  for (const auto& [c, name] : kCapabilityNames) {
    if (name == text) {
      return c;
    }
  }
  return std::nullopt;
}

Registry default_registry() {
  return {
      {kUser, "User", "User", "Initiates the task, sets objectives, and provides feedback.",
       {Capability::kNone}},
      {kClimateStrategist, "Climate Strategist", "LLM Agent",
       "Plans inputs and manages global strategy using external tools.", {Capability::kPlan}},
      {kClimateScientist, "Climate Scientist", "Domain Reasoning Agent",
       "Proposes hypotheses from climate science domains.", {Capability::kNone}},
      {kDialogueManager, "Dialogue Manager", "Coordinator Agent",
       "Coordinates message flow and agent turn-taking.", {Capability::kCoordinate}},
      {kPolicyPlanner, "Policy Planner", "Planning Agent",
       "Designs simulation-based policy plans.", {Capability::kPlan}},
      {kCritic, "Critic", "Evaluation Agent",
       "Reviews plans for feasibility and climate alignment.", {Capability::kCritique}},
      {kDataModeler, "Data Modeler", "Statistical Analysis Agent",
       "Extracts insights from climate and environmental data.", {Capability::kModel}},
      {kCodeDeveloper, "Code Developer", "Code Generation Agent",
       "Implements data processing and visualization scripts.", {Capability::kCode}},
      {kPlotInterpreter, "Plot Interpreter", "Visualization Analysis Agent",
       "Interprets graphical outputs and projections.", {Capability::kInterpret}},
      {kKnowledgeRetriever, "Knowledge Retriever", "Retrieval Agent",
       "Gathers information from reports and databases.", {Capability::kRetrieve}},
      {kFactChecker, "Fact Checker", "Verification Agent",
       "Validates and verifies cited content.", {Capability::kVerify}},
  };
}

void validate_registry(const Registry& registry) {
  std::set<int> seen;
  for (const auto& a : registry) {
    if (a.id <= 0) {
      throw ContractError(fmt::format("agent id {} is not positive", a.id));
    }
    if (!seen.insert(a.id).second) {
      throw ContractError(fmt::format("agent id {} is registered twice", a.id));
    }
  }
}

const AgentProfile& find_agent(const Registry& registry, int id) {
  for (const auto& a : registry) {
    if (a.id == id) {
      return a;
    }
  }
  throw ContractError(fmt::format("agent {} is not in the registry", id));
}

}  // namespace climatescope::agents
