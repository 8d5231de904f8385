#pragma once

#include <string>
#include <string_view>

#include "climatescope/agents/message.hpp"
#include "climatescope/agents/planning.hpp"
#include "climatescope/agents/registry.hpp"

namespace climatescope::agents {

/// JSON document of kind "transcript". The plan is embedded when given.
std::string to_document(const Transcript& transcript, const Plan* plan = nullptr);
Transcript transcript_from_document(std::string_view text);

/// Readable rendering: one block per message headed by seq, sender name and
/// kind.
std::string render_text(const Transcript& transcript, const Registry& registry);

/// One line per message: seq, sender, kind, first body line.
std::string digest(const Transcript& transcript, const Registry& registry);

}  // namespace climatescope::agents
