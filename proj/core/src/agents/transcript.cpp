#include "climatescope/agents/transcript.hpp"

#include <array>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "climatescope/document.hpp"
#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<MessageKind, std::string_view>, 8> kKindNames{{
    {MessageKind::kTask, "task"},
    {MessageKind::kPlan, "plan"},
    {MessageKind::kHypothesis, "hypothesis"},
    {MessageKind::kAnalysisRequest, "analysis-request"},
    {MessageKind::kAnalysisResult, "analysis-result"},
    {MessageKind::kCritique, "critique"},
    {MessageKind::kVerification, "verification"},
    {MessageKind::kFinalReport, "final-report"},
}};

constexpr std::array<std::pair<Termination, std::string_view>, 4> kTerminationNames{{
    {Termination::kRunning, "running"},
    {Termination::kMaxTurns, "max-turns"},
    {Termination::kFinalReport, "final-report"},
    {Termination::kBackendError, "backend-error"},
}};

std::string sender_name(const Registry& registry, int id) {
  for (const auto& a : registry) {
    if (a.id == id) {
      return a.name;
    }
  }
  return fmt::format("agent {}", id);
}

std::string_view first_line(std::string_view text) {
  return text.substr(0, text.find('\n'));
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "task";
}

std::optional<MessageKind> parse_message_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Termination termination) {
  for (const auto& [k, name] : kTerminationNames) {
    if (k == termination) return name;
  }
  return "running";
}

std::optional<Termination> parse_termination(std::string_view text) {
  for (const auto& [k, name] : kTerminationNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

void validate_transcript(const Transcript& transcript) {
  const auto& msgs = transcript.messages;
  if (msgs.empty() || msgs.front().sender != kUser || msgs.front().kind != MessageKind::kTask) {
    throw ContractError("transcript must open with the user's task");
  }
  for (std::size_t i = 1; i < msgs.size(); ++i) {
    if (msgs[i].seq <= msgs[i - 1].seq) {
      throw ContractError(fmt::format("seq {} does not increase after {}", msgs[i].seq,
                                      msgs[i - 1].seq));
    }
  }
  if (transcript.terminated_by == Termination::kFinalReport &&
      msgs.back().kind != MessageKind::kFinalReport) {
    throw ContractError("final-report termination without a final-report message");
  }
}

std::string to_document(const Transcript& transcript, const Plan* plan) {
  json j{{"format", "climatescope"}, {"version", doc::kFormatVersion}, {"kind", "transcript"}};
  j["task"] = transcript.task;
  j["backend"] = transcript.backend;
  j["terminated_by"] = to_string(transcript.terminated_by);
  j["turn_count"] = transcript.turn_count;
  if (plan != nullptr) {
    json steps = json::array();
    for (const auto& s : plan->steps) {
      json step{{"id", s.id},
                {"description", s.description},
                {"agent", s.agent},
                {"tool_tag", to_string(s.tool_tag)},
                {"stage", to_string(s.stage)}};
      if (s.tool) {
        step["tool"] = to_string(*s.tool);
      }
      steps.push_back(std::move(step));
    }
    j["plan"] = std::move(steps);
  }
  json messages = json::array();
  for (const auto& m : transcript.messages) {
    json msg{{"seq", m.seq},
             {"sender", m.sender},
             {"recipients", "broadcast"},
             {"kind", to_string(m.kind)},
             {"step", m.step_id},
             {"body", m.body},
             {"error", m.error}};
    json artifacts = json::array();
    for (const auto& a : m.artifacts) {
      artifacts.push_back({{"name", a.name}, {"content", a.content}});
    }
    msg["artifacts"] = std::move(artifacts);
    messages.push_back(std::move(msg));
  }
  j["messages"] = std::move(messages);
  return j.dump(1) + "\n";
}

Transcript transcript_from_document(std::string_view text) {
  if (doc::document_kind(text) != "transcript") {
    throw ParseError("expected a 'transcript' document");
  }
  try {
    const auto j = json::parse(text);
    Transcript t;
    t.task = j.at("task").get<std::string>();
    t.backend = j.value("backend", "");
    const auto term = parse_termination(j.at("terminated_by").get<std::string>());
    if (!term) {
      throw ParseError("unknown transcript termination");
    }
    t.terminated_by = *term;
    t.turn_count = j.at("turn_count").get<std::size_t>();
    for (const auto& m : j.at("messages")) {
      const auto kind = parse_message_kind(m.at("kind").get<std::string>());
      if (!kind) {
        throw ParseError(fmt::format("unknown message kind '{}'", m.at("kind").get<std::string>()));
      }
      Message msg{m.at("seq").get<std::uint64_t>(), m.at("sender").get<int>(), *kind,
                  m.value("step", ""), m.at("body").get<std::string>(), {}, m.value("error", false)};
      for (const auto& a : m.value("artifacts", json::array())) {
        msg.artifacts.push_back({a.at("name").get<std::string>(), a.at("content").get<std::string>()});
      }
      t.messages.push_back(std::move(msg));
    }
    try {
      validate_transcript(t);
    } catch (const ContractError& e) {
      throw ParseError(std::string("inconsistent transcript: ") + e.what());
    }
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid transcript document: ") + e.what());
  }
}

std::string render_text(const Transcript& transcript, const Registry& registry) {
  std::string out = fmt::format("Task: {}\nBackend: {}\nTurns: {}\nTerminated by: {}\n",
                                transcript.task, transcript.backend, transcript.turn_count,
                                to_string(transcript.terminated_by));
  for (const auto& m : transcript.messages) {
    out += fmt::format("\n#{} {} [{}{}{}]\n", m.seq, sender_name(registry, m.sender),
                       to_string(m.kind), m.step_id.empty() ? "" : ", step " + m.step_id,
                       m.error ? ", error" : "");
    out += m.body;
    if (!m.body.ends_with('\n')) {
      out += '\n';
    }
    for (const auto& a : m.artifacts) {
      out += fmt::format("  artifact: {}\n", a.name);
    }
  }
  return out;
}

std::string digest(const Transcript& transcript, const Registry& registry) {
  std::string out;
  for (const auto& m : transcript.messages) {
    out += fmt::format("{}. {} ({}{}): {}\n", m.seq, sender_name(registry, m.sender),
                       to_string(m.kind), m.error ? ", error" : "", first_line(m.body));
  }
  return out;
}

}  // namespace climatescope::agents
