#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace climatescope::agents {

enum class Capability { kPlan, kRetrieve, kModel, kInterpret, kVerify, kCode, kCritique, kCoordinate, kNone };

std::string_view to_string(Capability capability);
std::optional<Capability> parse_capability(std::string_view text);

struct AgentProfile {
  int id = 0;
  std::string name;
  std::string agent_class;       // e.g. "Retrieval Agent"
  std::string role_description;  // system profile
  std::set<Capability> capabilities;

  bool has(Capability c) const { return capabilities.contains(c); }
};

using Registry = std::vector<AgentProfile>;

inline constexpr int kUser = 1;
inline constexpr int kClimateStrategist = 2;
inline constexpr int kClimateScientist = 3;
inline constexpr int kDialogueManager = 4;
inline constexpr int kPolicyPlanner = 5;
inline constexpr int kCritic = 6;
inline constexpr int kDataModeler = 7;
inline constexpr int kCodeDeveloper = 8;
inline constexpr int kPlotInterpreter = 9;
inline constexpr int kKnowledgeRetriever = 10;
inline constexpr int kFactChecker = 11;

/// The eleven standard agents, ordered by id.
Registry default_registry();

/// Throws ContractError on duplicate or non-positive ids.
void validate_registry(const Registry& registry);

/// Throws ContractError if `id` is not registered.
const AgentProfile& find_agent(const Registry& registry, int id);

}  // namespace climatescope::agents
