#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace climatescope::agents {

enum class MessageKind {
  kTask,
  kPlan,
  kHypothesis,
  kAnalysisRequest,
  kAnalysisResult,
  kCritique,
  kVerification,
  kFinalReport,
};

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view text);

/// A serialized analysis output attached to a message. `name` is a stable
/// reference such as "correlation.csv" or "evidence:ipcc-ar6-urban".
struct Artifact {
  std::string name;
  std::string content;

  friend bool operator==(const Artifact&, const Artifact&) = default;
};

/// Every message is a broadcast to all agents.
struct Message {
  std::uint64_t seq = 0;
  int sender = 0;
  MessageKind kind = MessageKind::kTask;
  std::string step_id;  // empty outside plan steps
  std::string body;
  std::vector<Artifact> artifacts;
  bool error = false;

  friend bool operator==(const Message&, const Message&) = default;
};

enum class Termination { kRunning, kMaxTurns, kFinalReport, kBackendError };

std::string_view to_string(Termination termination);
std::optional<Termination> parse_termination(std::string_view text);

struct Transcript {
  std::string task;
  std::vector<Message> messages;
  Termination terminated_by = Termination::kRunning;
  std::size_t turn_count = 0;  // backend invocations; tool results are not turns
  std::string backend;

  bool terminated() const noexcept { return terminated_by != Termination::kRunning; }
};

/// Structural checks: first message is the user's task, seq strictly
/// increasing, final-report termination ends on a final-report message.
void validate_transcript(const Transcript& transcript);

}  // namespace climatescope::agents
