#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "climatescope/causal_order.hpp"
#include "climatescope/error.hpp"
#include "climatescope/graph_pruning.hpp"
#include "support.hpp"

namespace climatescope::prune {
namespace {

using causal::AnmSpec;
using causal::Mechanism;

data::DataMatrix anm(const DirectedGraph& dag, std::uint64_t seed, std::size_t n) {
  AnmSpec spec{dag, std::vector<Mechanism>(dag.node_count(), Mechanism::kSin), 0.3, seed};
  return data::standardize(causal::generate_anm(spec, n));
}

causal::TopologicalOrder identity_order(std::size_t d) {
  causal::TopologicalOrder o;
  for (std::size_t j = 0; j < d; ++j) o.order.push_back(j);
  return o;
}

TEST(FullDag, HasEveryForwardEdge) {
  causal::TopologicalOrder o{{2, 0, 1}, {}};
  const auto g = full_dag_from_order(o, {"a", "b", "c"});
  EXPECT_EQ(g.graph.edge_count(), 3u);
  EXPECT_TRUE(g.graph.has_edge(2, 0));
  EXPECT_TRUE(g.graph.has_edge(2, 1));
  EXPECT_TRUE(g.graph.has_edge(0, 1));
  EXPECT_NO_THROW(g.validate());
  EXPECT_THROW(full_dag_from_order(o, {"a", "b"}), ContractError);
}

TEST(CausalGraph, ValidateCatchesOrderViolationsAndBadPValues) {
  auto g = full_dag_from_order(identity_order(3), {"a", "b", "c"});
  auto reversed = g;
  reversed.graph.add_edge(2, 0);
  EXPECT_THROW(reversed.validate(), ContractError);
  auto bad_p = g;
  bad_p.edge_pvalues[{0, 1}] = 1.5;
  EXPECT_THROW(bad_p.validate(), ContractError);
  auto orphan_p = g;
  orphan_p.graph.remove_edge(0, 1);
  orphan_p.edge_pvalues[{0, 1}] = 0.1;
  EXPECT_THROW(orphan_p.validate(), ContractError);
}

TEST(Preselect, DropsWeaklyCorrelatedPairsOnly) {
  const auto m = anm(causal::chain_dag(3), 1, 500);
  const auto full = full_dag_from_order(identity_order(3), m.variable_names());
  const auto kept = preselect_parents(m, full, 0.2);
  EXPECT_TRUE(kept.graph.has_edge(0, 1));
  for (const auto& e : kept.graph.edges()) EXPECT_TRUE(full.graph.has_edge(e.first, e.second));
  EXPECT_EQ(preselect_parents(m, full, 0.0).graph, full.graph);
  EXPECT_THROW(preselect_parents(m, full, 1.5), ContractError);
}

TEST(AdditiveFit, NoiselessLinearChildIsFitExactly) {
  const Eigen::MatrixXd x = testing::normal_matrix(300, 1, 3);
  Eigen::MatrixXd v(300, 2);
  v << x, 2.0 * x.array() + 1.0;
  const auto m = data::standardize(testing::raw_matrix(v));
  const std::vector<std::size_t> parents{0};
  const auto model = additive_fit(m, 1, parents);
  EXPECT_LT(model.residual_variance, 1e-6);
  EXPECT_TRUE(model.converged);
  EXPECT_LT((model.predict(m.values()) - m.values().col(1)).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(AdditiveFit, IrrelevantParentGetsSmallShare) {
  const Eigen::MatrixXd x = testing::normal_matrix(400, 3, 8);
  Eigen::MatrixXd v(400, 3);
  v.col(0) = x.col(0);
  v.col(1) = x.col(1);
  v.col(2) = x.col(0).array().sin() + 0.3 * x.col(2).array();
  const auto m = data::standardize(testing::raw_matrix(v));
  const std::vector<std::size_t> parents{0, 1};
  const auto model = additive_fit(m, 2, parents);
  const auto var = [](const Eigen::VectorXd& f) { return (f.array() - f.mean()).square().mean(); };
  EXPECT_LT(var(model.components[1].fitted), 0.1 * var(model.components[0].fitted));
}

TEST(AdditiveFit, Contracts) {
  const auto m = anm(causal::chain_dag(3), 0, 50);
  EXPECT_THROW(additive_fit(m, 1, std::vector<std::size_t>{}), ContractError);
  EXPECT_THROW(additive_fit(m, 1, std::vector<std::size_t>{1}), ContractError);
  EXPECT_THROW(additive_fit(m, 1, std::vector<std::size_t>{5}), ContractError);
}

TEST(AdditiveFit, SweepCapAttachesWarning) {
  const auto m = anm(causal::chain_dag(3), 2, 200);
  SmootherOptions opts;
  opts.max_sweeps = 1;
  opts.tolerance = 0.0;
  const auto model = additive_fit(m, 2, std::vector<std::size_t>{0, 1}, opts);
  EXPECT_FALSE(model.converged);
  EXPECT_TRUE(model.warning.has_value());
}

TEST(EdgeSignificance, NoiselessTrueParentIsHighlySignificant) {
  const Eigen::MatrixXd x = testing::normal_matrix(200, 1, 4);
  Eigen::MatrixXd v(200, 2);
  v << x, x.array().sin();
  const auto m = data::standardize(testing::raw_matrix(v));
  const auto model = additive_fit(m, 1, std::vector<std::size_t>{0});
  EXPECT_LT(edge_significance(m, model, 0), 1e-6);
  EXPECT_THROW(edge_significance(m, model, 1), ContractError);
}

TEST(EdgeSignificance, IndependentNonParentIsRarelyRejected) {
  int kept_null = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = testing::normal_matrix(300, 3, 100 + seed);
    Eigen::MatrixXd v(300, 3);
    v.col(0) = x.col(0);
    v.col(1) = x.col(1);
    v.col(2) = x.col(0).array().sin() + 0.3 * x.col(2).array();
    const auto m = data::standardize(testing::raw_matrix(v));
    const auto model = additive_fit(m, 2, std::vector<std::size_t>{0, 1});
    const double p = edge_significance(m, model, 1);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    kept_null += p > 0.001;
  }
  EXPECT_GE(kept_null, 8);
}

TEST(CamPrune, AlphaOneKeepsEverythingAndEmptyStaysEmpty) {
  const auto m = anm(causal::chain_dag(3), 3, 200);
  const auto full = full_dag_from_order(identity_order(3), m.variable_names());
  const auto same = cam_prune(m, full, 1.0);
  EXPECT_EQ(same.graph, full.graph);
  EXPECT_EQ(same.edge_pvalues.size(), 3u);
  auto empty = full;
  empty.graph = DirectedGraph(3);
  EXPECT_EQ(cam_prune(m, empty).graph.edge_count(), 0u);
}

TEST(CamPrune, OutputIsASubsetAndDeterministic) {
  const auto dag = causal::random_dag(5, 1.5, 7);
  const auto m = anm(dag, 7, 300);
  const auto full = full_dag_from_order(causal::topological_order(m), m.variable_names());
  const auto a = cam_prune(m, full);
  const auto b = cam_prune(m, full);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.edge_pvalues, b.edge_pvalues);
  EXPECT_NO_THROW(a.validate());
  for (const auto& e : a.graph.edges()) EXPECT_TRUE(full.graph.has_edge(e.first, e.second));
}

TEST(CamPrune, RejectsRawMatrixAndBadAlpha) {
  const auto m = anm(causal::chain_dag(3), 3, 60);
  const auto full = full_dag_from_order(identity_order(3), m.variable_names());
  const auto raw = data::DataMatrix::raw(m.variable_names(), m.values() * 3.0);
  EXPECT_THROW(cam_prune(raw, full), ContractError);
  EXPECT_THROW(cam_prune(m, full, 1.5), ContractError);
}

// Pruned graphs beat the fully connected order-respecting graph.
TEST(CamPrune, ImprovesStructuralHammingDistance) {
  int better = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto dag = causal::random_dag(5, 1.5, seed);
    const auto m = anm(dag, seed, 1000);
    const auto full = full_dag_from_order(causal::topological_order(m), m.variable_names());
    const auto pruned = cam_prune(m, preselect_parents(m, full));
    better += structural_hamming_distance(dag, pruned.graph) <
              structural_hamming_distance(dag, full.graph);
  }
  EXPECT_GE(better, 9);
}

}  // namespace
}  // namespace climatescope::prune
