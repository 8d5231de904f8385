#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "climatescope/agents/backend.hpp"
#include "climatescope/agents/message.hpp"
#include "climatescope/agents/planning.hpp"
#include "climatescope/agents/registry.hpp"
#include "climatescope/agents/tools.hpp"

namespace climatescope::agents {

inline constexpr std::size_t kDefaultMaxTurns = 30;
inline constexpr std::size_t kMinTurns = 3;

/// Turn loop: pick the speaker, ask the backend for its message, run the tool
/// an analysis-request names and append the analysis-result. Stops on a
/// final-report, after max_turns backend calls, or on a backend failure (an
/// error-flagged final-report from the failing speaker). Tool failures are
/// recorded in the analysis-result and the run continues. Throws
/// ContractError for max_turns < 3 or a blank task.
Transcript run_pipeline(std::string_view task, const Registry& registry, ReasoningBackend& backend,
                        ToolBox& tools, std::size_t max_turns = kDefaultMaxTurns);

/// Recomputes next_speaker for every prefix and checks it against each
/// non-user sender. Returns the seq of the first mismatch, or 0.
std::uint64_t replay_mismatch(const Transcript& transcript, const Plan& plan,
                              const Registry& registry);

}  // namespace climatescope::agents
