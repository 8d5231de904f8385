#include "climatescope/agents/pipeline.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

bool planner_spoke(const Transcript& t) {
  return std::any_of(t.messages.begin(), t.messages.end(),
                     [](const Message& m) { return m.sender == kPolicyPlanner; });
}

// Step the speaker is answering for, if it owns the current step.
const PlanStep* owned_step(const Transcript& t, const Plan& plan, int speaker) {
  if (!planner_spoke(t)) {
    return nullptr;
  }
  const auto index = current_step(t, plan);
  return index && plan.steps[*index].agent == speaker ? &plan.steps[*index] : nullptr;
}

void append(Transcript& t, Message m) {
  m.seq = t.messages.empty() ? 1 : t.messages.back().seq + 1;
  t.messages.push_back(std::move(m));
}

}  // namespace

Transcript run_pipeline(std::string_view task, const Registry& registry, ReasoningBackend& backend,
                        ToolBox& tools, std::size_t max_turns) {
  if (max_turns < kMinTurns) {
    throw ContractError(fmt::format("max_turns must be at least {}", kMinTurns));
  }
  validate_registry(registry);
  const Plan plan = make_plan(task, registry);

  Transcript t;
  t.task = std::string(task);
  t.backend = backend.name();
  append(t, {0, kUser, MessageKind::kTask, {}, t.task, {}, false});

  while (!t.terminated()) {
    if (t.turn_count >= max_turns) {
      t.terminated_by = Termination::kMaxTurns;
      break;
    }
    const int speaker = next_speaker(t, plan, registry);
    const auto& agent = find_agent(registry, speaker);
    const PlanStep* step = owned_step(t, plan, speaker);
    ++t.turn_count;

    Message m;
    try {
      m = backend.respond(agent, t, plan);
    } catch (const std::exception& e) {
      append(t, {0, speaker, MessageKind::kFinalReport, step ? step->id : std::string{},
                 fmt::format("Backend failure: {}", e.what()), {}, true});
      t.terminated_by = Termination::kBackendError;
      break;
    }
    m.sender = speaker;
    m.step_id = step ? step->id : std::string{};
    const bool final = m.kind == MessageKind::kFinalReport;
    const bool request = m.kind == MessageKind::kAnalysisRequest;
    append(t, std::move(m));
    if (final) {
      t.terminated_by = Termination::kFinalReport;
      break;
    }

    if (request && step && step->stage == StepStage::kAnalysis) {
      Message result{0, step->agent, MessageKind::kAnalysisResult, step->id, {}, {}, false};
      try {
        auto out = tools.run(*step->tool, t.task);
        result.body = std::move(out.summary);
        result.artifacts = std::move(out.artifacts);
      } catch (const std::exception& e) {
        result.body = fmt::format("Tool {} failed: {}", to_string(*step->tool), e.what());
        result.error = true;
      }
      append(t, std::move(result));
    }
  }
  return t;
}

std::uint64_t replay_mismatch(const Transcript& transcript, const Plan& plan,
                              const Registry& registry) {
  Transcript prefix;
  prefix.task = transcript.task;
  for (const auto& m : transcript.messages) {
    if (m.sender != kUser && next_speaker(prefix, plan, registry) != m.sender) {
      return m.seq;
    }
    prefix.messages.push_back(m);
  }
  return 0;
}

}  // namespace climatescope::agents
