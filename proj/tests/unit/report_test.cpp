#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "climatescope/agents/transcript.hpp"
#include "climatescope/causal_order.hpp"
#include "climatescope/document.hpp"
#include "climatescope/error.hpp"
#include "climatescope/report.hpp"
#include "support.hpp"

namespace climatescope::report {
namespace {

namespace fs = std::filesystem;

RubricScore stored_review() {
  RubricScore r;
  r.originality = 6;
  r.importance = 6;
  r.support_of_claims = 7;
  r.soundness = 5;
  r.clarity = 8;
  r.contextualization = 7;
  r.overall = 6.4;
  return r;
}

TEST(Rubric, UniformMeanOfPresentComponents) {
  // (6 + 6 + 7 + 5 + 8 + 7) / 6
  EXPECT_EQ(aggregate_rubric(stored_review()), 6.5);
  EXPECT_EQ(present_components(stored_review()).size(), 6u);
}

TEST(Rubric, WeightedMean) {
  const RubricWeights w{{"originality", 0.5}, {"clarity", 0.5}};
  EXPECT_DOUBLE_EQ(aggregate_rubric(stored_review(), w), 7.0);
  EXPECT_THROW(aggregate_rubric(stored_review(), RubricWeights{{"originality", 0.7}}), ContractError);
  EXPECT_THROW(aggregate_rubric(stored_review(), RubricWeights{{"value_to_community", 1.0}}),
               ContractError);
  EXPECT_THROW(aggregate_rubric(stored_review(),
                                RubricWeights{{"originality", 1.5}, {"clarity", -0.5}}),
               ContractError);
}

TEST(Rubric, ValidationAndEmptyRecord) {
  auto r = stored_review();
  r.clarity = 11;
  EXPECT_THROW(validate_rubric(r), ContractError);
  EXPECT_THROW(aggregate_rubric(RubricScore{}), ContractError);
}

TEST(Rubric, DocumentKeepsNullsAndStoredOverall) {
  const auto back = rubric_from_document(rubric_to_document(stored_review()));
  EXPECT_FALSE(back.value_to_community.has_value());
  EXPECT_EQ(back.overall, 6.4);
  EXPECT_EQ(back.soundness, 5);
}

TEST(Rubric, BundledReviewerRecordLoads) {
  const auto r = rubric_from_document(testing::read_file(testing::sample_dir() / "reviewer_rubric.json"));
  EXPECT_EQ(aggregate_rubric(r), 6.5);
  EXPECT_EQ(r.overall, 6.4);
}

prune::CausalGraph small_graph() {
  causal::TopologicalOrder o{{0, 1, 2}, {}};
  auto g = prune::full_dag_from_order(o, {"urban \"share\"", "fuel", "emissions"});
  g.graph.remove_edge(0, 2);
  g.edge_pvalues = {{{0, 1}, 1.25e-8}, {{1, 2}, 0.0004}};
  return g;
}

TEST(GraphDot, ExactTextForSmallGraph) {
  EXPECT_EQ(export_graph_dot(small_graph()),
            "digraph causal {\n"
            "  n0 [label=\"urban \\\"share\\\"\"];\n"
            "  n1 [label=\"fuel\"];\n"
            "  n2 [label=\"emissions\"];\n"
            "  n0 -> n1 [label=\"p=1.25e-08\"];\n"
            "  n1 -> n2 [label=\"p=0.0004\"];\n"
            "}\n");
}

TEST(GraphDot, RoundTripsNamesEdgesAndPValues) {
  const auto g = small_graph();
  const auto back = parse_graph_dot(export_graph_dot(g));
  EXPECT_EQ(back.variable_names, g.variable_names);
  EXPECT_EQ(back.graph, g.graph);
  EXPECT_EQ(back.edge_pvalues, g.edge_pvalues);
}

TEST(GraphDot, RejectsForeignDot) {
  EXPECT_THROW(parse_graph_dot("graph g {\n}\n"), ParseError);
  EXPECT_THROW(parse_graph_dot("digraph g {\n  n0 [label=\"a\"];\n"), ParseError);
  EXPECT_THROW(parse_graph_dot("digraph g {\n  n1 [label=\"a\"];\n}\n"), ParseError);
  EXPECT_THROW(parse_graph_dot("digraph g {\n  n0 [label=\"a\"];\n  a -- b;\n}\n"), ParseError);
}

// Writes every required artifact for a small synthetic analysis.
fs::path write_bundle(const std::string& name) {
  const auto dir = testing::scratch_dir(name);
  causal::AnmSpec spec{causal::chain_dag(3), std::vector(3, causal::Mechanism::kSin), 0.3, 3};
  const auto raw = causal::generate_anm(spec, 120);
  const auto z = data::standardize(raw);
  const auto order = causal::topological_order(z);
  const auto full = prune::full_dag_from_order(order, z.variable_names());
  const auto graph = prune::cam_prune(z, full);
  const auto holdout = stats::holdout_evaluate(raw, "X3");
  testing::write_file(dir / "matrix.json", doc::to_document(raw));
  testing::write_file(dir / "stats.csv", doc::summary_stats_to_csv(data::summary_stats(raw)));
  testing::write_file(dir / "correlation.csv", stats::correlation_to_csv(stats::pearson_matrix(raw)));
  testing::write_file(dir / "order.json", doc::to_document(doc::OrderDocument{
                                              z.variable_names(), order, {std::nullopt, 2.0, 1.0}}));
  testing::write_file(dir / "graph.json",
                      doc::to_document(doc::GraphDocument{graph, {1e-3, 0.05, 1e-3}, 3}));
  testing::write_file(dir / "metrics.json",
                      doc::to_document(doc::MetricsDocument{
                          "X3", stats::ModelKind::kKernelRidge, holdout.metrics, 0.2, 42,
                          holdout.train_rows.size(), holdout.test_rows.size(),
                          std::string(stats::method_note(stats::ModelKind::kKernelRidge))}));
  testing::write_file(dir / "task.txt", "find drivers of X3");
  return dir;
}

TEST(LoadBundle, MissingArtifactIsNamed) {
  const auto dir = write_bundle("missing_artifact");
  fs::remove(dir / "graph.json");
  try {
    load_bundle(dir);
    FAIL() << "expected RenderError";
  } catch (const RenderError& e) {
    EXPECT_NE(std::string(e.what()).find("graph.json"), std::string::npos);
  }
  EXPECT_THROW(load_bundle(dir / "nowhere"), RenderError);
}

TEST(RenderReport, SectionsInOrderAndDeterministic) {
  const auto dir = write_bundle("render_sections");
  const auto text = render_report(load_bundle(dir));
  EXPECT_EQ(text, render_report(load_bundle(dir)));
  std::size_t at = 0;
  for (const char* heading : {"## Task", "## Data Summary", "## Correlations", "## Causal Discovery",
                              "## Models & Metrics", "## Transcript Digest", "## Reproducibility"}) {
    const auto found = text.find(heading, at);
    ASSERT_NE(found, std::string::npos) << heading;
    at = found;
  }
  EXPECT_EQ(text.find("## Rubric"), std::string::npos);
  EXPECT_NE(text.find("unvalidated by domain expertise"), std::string::npos);
  EXPECT_NE(text.find("support vector regression"), std::string::npos);
  EXPECT_NE(text.find("No transcript in this bundle."), std::string::npos);
  EXPECT_NE(text.find("find drivers of X3"), std::string::npos);
}

TEST(RenderReport, StoredOverallShownVerbatim) {
  const auto dir = write_bundle("render_rubric");
  testing::write_file(dir / "rubric.json", rubric_to_document(stored_review()));
  const auto text = render_report(load_bundle(dir));
  EXPECT_NE(text.find("| overall (stored) | 6.4 |"), std::string::npos);
  EXPECT_NE(text.find("| originality | 6 |"), std::string::npos);
  EXPECT_NE(text.find("| soundness | 5 |"), std::string::npos);
  EXPECT_NE(text.find("| clarity | 8 |"), std::string::npos);
  EXPECT_NE(text.find("| value_to_community | not stated |"), std::string::npos);
  const auto from = text.find("## Rubric");
  const auto section = text.substr(from, text.find("## Reproducibility") - from);
  EXPECT_EQ(section.find("6.5"), std::string::npos);
}

TEST(RenderReport, UniformMeanWhenNoOverallIsStored) {
  const auto dir = write_bundle("render_rubric_mean");
  auto r = stored_review();
  r.overall.reset();
  testing::write_file(dir / "rubric.json", rubric_to_document(r));
  EXPECT_NE(render_report(load_bundle(dir)).find("| overall (uniform mean) | 6.5 |"),
            std::string::npos);
}

TEST(PlotFiles, OneRowPerRoundAndVariable) {
  const auto files = plot_files(load_bundle(write_bundle("plots")));
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].first, "leaf_variances.csv");
  // header + 3 + 2 + 1 rows
  EXPECT_EQ(std::count(files[0].second.begin(), files[0].second.end(), '\n'), 7);
  EXPECT_NE(files[1].second.find("leaf_variances.csv"), std::string::npos);
}

}  // namespace
}  // namespace climatescope::report
