#include <set>

#include <gtest/gtest.h>

#include "climatescope/agents/evidence_store.hpp"
#include "climatescope/agents/planning.hpp"
#include "climatescope/agents/registry.hpp"
#include "climatescope/error.hpp"
#include "support.hpp"

namespace climatescope::agents {
namespace {

Message msg(std::uint64_t seq, int sender, MessageKind kind, std::string step = {}) {
  return {seq, sender, kind, std::move(step), "body", {}, false};
}

TEST(Registry, ElevenAgentsWithTableNames) {
  const auto r = default_registry();
  ASSERT_EQ(r.size(), 11u);
  EXPECT_NO_THROW(validate_registry(r));
  for (int id = 1; id <= 11; ++id) EXPECT_EQ(r[static_cast<std::size_t>(id - 1)].id, id);
  EXPECT_EQ(find_agent(r, kClimateStrategist).name, "Climate Strategist");
  EXPECT_EQ(find_agent(r, kKnowledgeRetriever).name, "Knowledge Retriever");
  EXPECT_EQ(find_agent(r, kFactChecker).name, "Fact Checker");
  EXPECT_TRUE(find_agent(r, kDataModeler).has(Capability::kModel));
  EXPECT_TRUE(find_agent(r, kDialogueManager).has(Capability::kCoordinate));
  EXPECT_TRUE(find_agent(r, kCritic).has(Capability::kCritique));
  EXPECT_THROW(find_agent(r, 12), ContractError);
}

TEST(Registry, RejectsDuplicateAndNonPositiveIds) {
  auto r = default_registry();
  r.push_back(r.front());
  EXPECT_THROW(validate_registry(r), ContractError);
  r = default_registry();
  r[0].id = 0;
  EXPECT_THROW(validate_registry(r), ContractError);
}

TEST(Capability, RoundTripsThroughText) {
  for (auto c : {Capability::kPlan, Capability::kRetrieve, Capability::kModel, Capability::kVerify}) {
    EXPECT_EQ(parse_capability(to_string(c)), c);
  }
  EXPECT_FALSE(parse_capability("fly").has_value());
}

TEST(RequestedTools, KeywordStemsInFixedOrder) {
  EXPECT_EQ(requested_tools("Predict emissions and find their causes, then correlate"),
            (std::vector<AnalysisTool>{AnalysisTool::kCorrelate, AnalysisTool::kDiscover,
                                       AnalysisTool::kModel}));
  EXPECT_EQ(requested_tools("What is the relationship between fuel and urbanization?"),
            (std::vector<AnalysisTool>{AnalysisTool::kCorrelate}));
  EXPECT_TRUE(requested_tools("describe the data").empty());
}

TEST(MakePlan, TemplateShape) {
  const auto r = default_registry();
  const auto plan = make_plan("correlate urbanization and clean fuel access", r);
  ASSERT_EQ(plan.steps.size(), 7u);
  const std::vector<int> agents{kClimateScientist, kDataModeler,  kPlotInterpreter, kKnowledgeRetriever,
                                kFactChecker,      kCritic,       kCodeDeveloper};
  for (std::size_t i = 0; i < agents.size(); ++i) {
    EXPECT_EQ(plan.steps[i].agent, agents[i]);
    EXPECT_EQ(plan.steps[i].id, "S" + std::to_string(i + 1));
  }
  EXPECT_EQ(plan.steps[1].tool, AnalysisTool::kCorrelate);
  EXPECT_EQ(plan.steps[1].tool_tag, Capability::kModel);
  EXPECT_NO_THROW(validate_plan(plan, r));
}

TEST(MakePlan, SummaryWhenNoToolIsNamedAndDeterministic) {
  const auto r = default_registry();
  const auto plan = make_plan("tell me about the sample", r);
  EXPECT_EQ(plan.steps[1].tool, AnalysisTool::kSummarize);
  EXPECT_EQ(plan, make_plan("tell me about the sample", r));
  EXPECT_THROW(make_plan("   ", r), ContractError);
}

TEST(ValidatePlan, RejectsUnknownAgentsAndToollessAnalysis) {
  const auto r = default_registry();
  auto plan = make_plan("model emissions", r);
  auto unknown = plan;
  unknown.steps[0].agent = 99;
  EXPECT_THROW(validate_plan(unknown, r), ContractError);
  plan.steps[1].tool.reset();
  EXPECT_THROW(validate_plan(plan, r), ContractError);
  EXPECT_THROW(validate_plan(Plan{}, r), ContractError);
}

TEST(NextSpeaker, WalksStrategistPlannerThenSteps) {
  const auto r = default_registry();
  const auto plan = make_plan("correlate urbanization and fuel", r);
  Transcript t;
  t.task = "correlate urbanization and fuel";
  t.messages.push_back(msg(1, kUser, MessageKind::kTask));
  EXPECT_EQ(next_speaker(t, plan, r), kClimateStrategist);
  t.messages.push_back(msg(2, kClimateStrategist, MessageKind::kPlan));
  EXPECT_EQ(next_speaker(t, plan, r), kPolicyPlanner);
  t.messages.push_back(msg(3, kPolicyPlanner, MessageKind::kPlan));
  EXPECT_EQ(next_speaker(t, plan, r), kClimateScientist);
  t.messages.push_back(msg(4, kClimateScientist, MessageKind::kHypothesis, "S1"));
  EXPECT_EQ(next_speaker(t, plan, r), kDataModeler);
  // A request alone does not complete an analysis step.
  t.messages.push_back(msg(5, kDataModeler, MessageKind::kAnalysisRequest, "S2"));
  EXPECT_FALSE(step_complete(t, plan.steps[1]));
  EXPECT_EQ(next_speaker(t, plan, r), kDataModeler);
  t.messages.push_back(msg(6, kDataModeler, MessageKind::kAnalysisResult, "S2"));
  EXPECT_TRUE(step_complete(t, plan.steps[1]));
  EXPECT_EQ(current_step(t, plan), 2u);
  EXPECT_EQ(next_speaker(t, plan, r), kPlotInterpreter);
}

TEST(NextSpeaker, AfterAllStepsCriticThenDeveloper) {
  const auto r = default_registry();
  Plan plan{{{"S1", "hypothesis", kClimateScientist, Capability::kNone, StepStage::kHypothesis, {}}}};
  Transcript t;
  t.messages = {msg(1, kUser, MessageKind::kTask), msg(2, kClimateStrategist, MessageKind::kPlan),
                msg(3, kPolicyPlanner, MessageKind::kPlan),
                msg(4, kClimateScientist, MessageKind::kHypothesis, "S1")};
  EXPECT_EQ(next_speaker(t, plan, r), kCritic);
  t.messages.push_back(msg(5, kCritic, MessageKind::kCritique));
  EXPECT_EQ(next_speaker(t, plan, r), kCodeDeveloper);
}

TEST(NextSpeaker, UnknownAgentFallsBackToFirstProfile) {
  Registry r{default_registry()[0]};
  Transcript t;
  t.messages = {msg(1, kUser, MessageKind::kTask)};
  EXPECT_EQ(next_speaker(t, make_plan("model x", default_registry()), r), kUser);
}

TEST(EvidenceStore, KeywordsAndWholeWordSearch) {
  EXPECT_EQ(task_keywords("Correlate urbanization with clean-fuel ACCESS, access!"),
            (std::vector<std::string>{"correlate", "urbanization", "clean", "fuel", "access"}));
  EvidenceStore store;
  store.add("b", "Access to clean cooking fuel rose.");
  store.add("a", "Urbanization trends in the region.");
  store.add("c", "Fuelwood and accessibility are different words.");
  EXPECT_EQ(store.search("clean fuel access and urbanization"),
            (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(store.lookup("a"), "Urbanization trends in the region.");
  EXPECT_FALSE(store.lookup("zzz").has_value());
}

TEST(EvidenceStore, LoadsBundledSnippets) {
  const auto store = EvidenceStore::load(testing::sample_dir() / "evidence");
  EXPECT_EQ(store.size(), 5u);
  EXPECT_THROW(EvidenceStore::load(testing::sample_dir() / "no_such_dir"), ConfigError);
}

}  // namespace
}  // namespace climatescope::agents
