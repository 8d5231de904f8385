#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "climatescope/agents/backend.hpp"
#include "climatescope/agents/tools.hpp"
#include "climatescope/document.hpp"
#include "climatescope/error.hpp"
#include "climatescope/stat_models.hpp"

namespace climatescope::agents {

namespace {

constexpr std::string_view kEvidencePrefix = "evidence:";

bool spoke(const Transcript& t, int sender) {
  return std::any_of(t.messages.begin(), t.messages.end(),
                     [&](const Message& m) { return m.sender == sender; });
}

const PlanStep* own_step(const AgentProfile& agent, const Transcript& transcript, const Plan& plan) {
  if (!spoke(transcript, kPolicyPlanner)) {
    return nullptr;
  }
  const auto index = current_step(transcript, plan);
  if (!index || plan.steps[*index].agent != agent.id) {
    return nullptr;
  }
  return &plan.steps[*index];
}

MessageKind stage_kind(StepStage stage) {
  switch (stage) {
    case StepStage::kHypothesis: return MessageKind::kHypothesis;
    case StepStage::kAnalysis: return MessageKind::kAnalysisRequest;
    case StepStage::kInterpretation: return MessageKind::kHypothesis;
    case StepStage::kRetrieval: return MessageKind::kVerification;
    case StepStage::kVerification: return MessageKind::kVerification;
    case StepStage::kCritique: return MessageKind::kCritique;
    case StepStage::kReport: return MessageKind::kFinalReport;
  }
  return MessageKind::kPlan;
}

std::string joined(const std::vector<std::string>& items, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i == 0 ? "" : std::string(separator)) + items[i];
  }
  return out;
}

std::vector<std::string> tool_names(const Plan& plan) {
  std::vector<std::string> out;
  for (const auto& s : plan.steps) {
    if (s.tool) {
      out.emplace_back(to_string(*s.tool));
    }
  }
  return out;
}

std::vector<const Message*> results(const Transcript& t) {
  std::vector<const Message*> out;
  for (const auto& m : t.messages) {
    if (m.kind == MessageKind::kAnalysisResult) {
      out.push_back(&m);
    }
  }
  return out;
}

std::string interpret_correlation(std::string_view csv) {
  const auto corr = stats::correlation_from_csv(csv);
  const auto d = corr.values.rows();
  std::optional<std::pair<Eigen::Index, Eigen::Index>> best;
  std::size_t strong = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double r = std::abs(corr.values(i, j));
      if (r >= 0.5) {
        ++strong;
      }
      if (!best || r > std::abs(corr.values(best->first, best->second))) {
        best = std::make_pair(i, j);
      }
    }
  }
  if (!best) {
    return "Correlation table has a single variable.";
  }
  const auto [i, j] = *best;
  return fmt::format(
      "Strongest association: {} ~ {} (r = {}). {} of {} variable pairs have |r| >= 0.5.",
      corr.variable_names[static_cast<std::size_t>(i)],
      corr.variable_names[static_cast<std::size_t>(j)], format_value(corr.values(i, j)), strong,
      d * (d - 1) / 2);
}

std::string interpret_graph(std::string_view json) {
  const auto g = doc::graph_from_document(json);
  std::vector<std::string> edges;
  for (const auto& [u, v] : g.graph.graph.edges()) {
    edges.push_back(g.graph.variable_names[u] + " -> " + g.graph.variable_names[v]);
  }
  if (edges.empty()) {
    return "Causal graph retains no edges at the chosen significance level.";
  }
  return fmt::format("Causal graph retains {} edges: {}. These are statistical candidates only.",
                     edges.size(), joined(edges, ", "));
}

std::string interpret_metrics(std::string_view json) {
  const auto m = doc::metrics_from_document(json);
  return fmt::format("Model {} for {}: MAE {}, RMSE {}, R2 {}.", stats::to_string(m.method),
                     m.target, format_value(m.metrics.mae), format_value(m.metrics.rmse),
                     format_value(m.metrics.r2));
}

std::string interpret_stats(std::string_view csv) {
  const auto s = doc::summary_stats_from_csv(csv);
  return fmt::format("Summary statistics cover {} variables.", s.size());
}

Message interpretation(const Transcript& t) {
  std::vector<std::string> lines;
  for (const auto* r : results(t)) {
    if (r->error) {
      lines.push_back(fmt::format("Step {} produced no output: {}", r->step_id, r->body));
      continue;
    }
    for (const auto& a : r->artifacts) {
      try {
        if (a.name == "correlation.csv") {
          lines.push_back(interpret_correlation(a.content));
        } else if (a.name == "graph.json") {
          lines.push_back(interpret_graph(a.content));
        } else if (a.name == "metrics.json") {
          lines.push_back(interpret_metrics(a.content));
        } else if (a.name == "stats.csv") {
          lines.push_back(interpret_stats(a.content));
        }
      } catch (const Error& e) {
        lines.push_back(fmt::format("Artifact {} could not be read: {}", a.name, e.what()));
      }
    }
  }
  if (lines.empty()) {
    lines.emplace_back("No numeric artifacts to interpret.");
  }
  return {0, 0, MessageKind::kHypothesis, {}, "Interpretation:\n" + joined(lines, "\n"), {}, false};
}

Message retrieval(const Transcript& t, const EvidenceStore& store) {
  const auto keywords = task_keywords(t.task);
  const auto ids = store.search(t.task);
  Message m{0, 0, MessageKind::kVerification, {}, {}, {}, false};
  if (ids.empty()) {
    m.body = fmt::format("No evidence in the local store matches the keywords: {}.",
                         joined(keywords, ", "));
    return m;
  }
  m.body = fmt::format("Evidence retrieved for keywords {}:", joined(keywords, ", "));
  for (const auto& id : ids) {
    m.body += fmt::format("\n[{}]", id);
    m.artifacts.push_back({std::string(kEvidencePrefix) + id, std::string(*store.lookup(id))});
  }
  return m;
}

struct CitationCheck {
  std::size_t checked = 0;
  std::size_t total = 0;
  std::vector<std::string> lines;
};

CitationCheck check_citations(const Transcript& t, const EvidenceStore& store) {
  CitationCheck out;
  for (const auto& m : t.messages) {
    if (m.sender != kKnowledgeRetriever) {
      continue;
    }
    for (const auto& a : m.artifacts) {
      if (!a.name.starts_with(kEvidencePrefix)) {
        continue;
      }
      const auto id = a.name.substr(kEvidencePrefix.size());
      const auto stored = store.lookup(id);
      const bool ok = stored && *stored == a.content;
      ++out.total;
      out.checked += ok ? 1 : 0;
      out.lines.push_back(fmt::format("[{}] {}", id, ok ? "checked" : "unchecked"));
    }
  }
  return out;
}

Message verification(const Transcript& t, const EvidenceStore& store) {
  const auto check = check_citations(t, store);
  Message m{0, 0, MessageKind::kVerification, {}, {}, {}, false};
  if (check.total == 0) {
    m.body = "No citations to verify.";
  } else {
    m.body = fmt::format("Verification: {} of {} citations checked.\n{}", check.checked,
                         check.total, joined(check.lines, "\n"));
  }
  return m;
}

Message critique(const Transcript& t, const Plan& plan, const EvidenceStore& store) {
  const auto r = results(t);
  const auto failed = std::count_if(r.begin(), r.end(), [](const Message* m) { return m->error; });
  std::vector<std::string> lines;
  lines.push_back(fmt::format("Critique: {} analysis results, {} failed.", r.size(), failed));
  const auto tools = tool_names(plan);
  if (std::find(tools.begin(), tools.end(), "discover") != tools.end()) {
    lines.emplace_back("Causal edges are unvalidated by domain expertise.");
  }
  const auto check = check_citations(t, store);
  lines.push_back(fmt::format("{} of {} citations verified.", check.checked, check.total));
  lines.emplace_back(failed == 0 ? "The analysis is feasible to report."
                                 : "Report the failed steps explicitly.");
  return {0, 0, MessageKind::kCritique, {}, joined(lines, "\n"), {}, false};
}

Message final_report(const Transcript& t, const Plan& plan) {
  std::string body = fmt::format("Final report\nTask: {}\n", t.task);
  for (const auto& s : plan.steps) {
    if (s.stage != StepStage::kAnalysis) {
      continue;
    }
    for (const auto* r : results(t)) {
      if (r->step_id == s.id) {
        body += fmt::format("\n[{} {}]{}\n{}", s.id, to_string(*s.tool),
                            r->error ? " failed" : "", r->body);
        if (!body.ends_with('\n')) body += '\n';
      }
    }
  }
  for (const auto& m : t.messages) {
    if (m.sender == kPlotInterpreter || m.sender == kFactChecker || m.sender == kCritic) {
      body += "\n" + m.body + "\n";
    }
  }
  return {0, 0, MessageKind::kFinalReport, {}, body, {}, false};
}

}  // namespace

MessageKind expected_kind(const AgentProfile& agent, const Transcript& transcript,
                          const Plan& plan) {
  if (agent.id == kUser) {
    return MessageKind::kTask;
  }
  if (const auto* step = own_step(agent, transcript, plan)) {
    return stage_kind(step->stage);
  }
  if (agent.has(Capability::kCritique)) return MessageKind::kCritique;
  if (agent.has(Capability::kCode)) return MessageKind::kFinalReport;
  if (agent.has(Capability::kVerify)) return MessageKind::kVerification;
  return MessageKind::kPlan;
}

RuleBackend::RuleBackend(EvidenceStore evidence) : evidence_(std::move(evidence)) {}

Message RuleBackend::respond(const AgentProfile& agent, const Transcript& transcript,
                             const Plan& plan) {
  const auto* step = own_step(agent, transcript, plan);
  if (step) {
    switch (step->stage) {
      case StepStage::kHypothesis: {
        const auto tools = tool_names(plan);
        return {0, 0, MessageKind::kHypothesis, {},
                fmt::format("Hypothesis: the quantities named in the task ({}) are related in the "
                            "data matrix.\nTest: {}.",
                            joined(task_keywords(transcript.task), ", "), joined(tools, ", ")),
                {}, false};
      }
      case StepStage::kAnalysis:
        return {0, 0, MessageKind::kAnalysisRequest, {},
                fmt::format("Request: run {} on the data matrix.", to_string(*step->tool)), {},
                false};
      case StepStage::kInterpretation: return interpretation(transcript);
      case StepStage::kRetrieval: return retrieval(transcript, evidence_);
      case StepStage::kVerification: return verification(transcript, evidence_);
      case StepStage::kCritique: return critique(transcript, plan, evidence_);
      case StepStage::kReport: return final_report(transcript, plan);
    }
  }

  if (agent.has(Capability::kPlan)) {
    if (!spoke(transcript, kClimateStrategist)) {
      const auto tools = tool_names(plan);
      return {0, 0, MessageKind::kPlan, {},
              fmt::format("Strategy for \"{}\": analysis with {}, then interpretation, evidence "
                          "retrieval and verification, critique and a final report.",
                          transcript.task, joined(tools, ", ")),
              {}, false};
    }
    std::string body = "Plan:";
    for (const auto& s : plan.steps) {
      body += fmt::format("\n{} [agent {}, {}] {}", s.id, s.agent, to_string(s.tool_tag),
                          s.description);
    }
    return {0, 0, MessageKind::kPlan, {}, body, {}, false};
  }
  if (agent.has(Capability::kCritique)) return critique(transcript, plan, evidence_);
  if (agent.has(Capability::kCode)) return final_report(transcript, plan);
  if (agent.has(Capability::kVerify)) return verification(transcript, evidence_);

  return {0, 0, expected_kind(agent, transcript, plan), {},
          fmt::format("{} acknowledges {} messages.", agent.name, transcript.messages.size()), {},
          false};
}

}  // namespace climatescope::agents
