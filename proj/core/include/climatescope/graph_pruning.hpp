#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climatescope/causal_order.hpp"
#include "climatescope/graph.hpp"
#include "climatescope/indicator_data.hpp"

namespace climatescope::prune {

inline constexpr double kDefaultAlpha = 1e-3;
inline constexpr double kDefaultRThreshold = 0.05;

/// DAG over named variables that respects a topological order. Retained
/// edges carry the p-value of their last significance test.
struct CausalGraph {
  std::vector<std::string> variable_names;
  DirectedGraph graph;
  std::map<Edge, double> edge_pvalues;
  causal::TopologicalOrder order;

  /// Throws ContractError if the graph is cyclic, an edge runs against the
  /// order, or a p-value is recorded for an absent edge or lies outside [0, 1].
  void validate() const;
};

/// Every edge u -> v with u before v: d(d-1)/2 edges.
CausalGraph full_dag_from_order(const causal::TopologicalOrder& order,
                                std::vector<std::string> variable_names);

/// Drops u -> v when |pearson(u, v)| < r_threshold. Never adds edges.
CausalGraph preselect_parents(const data::DataMatrix& matrix, const CausalGraph& graph,
                              double r_threshold = kDefaultRThreshold);

/// Univariate kernel-ridge smoother settings. Each parent's bandwidth is the
/// median heuristic on its own column unless pinned.
struct SmootherOptions {
  double ridge = 1e-4;
  std::optional<double> bandwidth;
  double tolerance = 1e-6;
  std::size_t max_sweeps = 100;
};

/// Caches (K_v + eta I)^{-1} per variable of one matrix. A component fitted
/// to partial residuals r is f = K a with a = (K + eta I)^{-1} r, i.e.
/// f = r - eta a, so the cached inverse is all a smoother needs.
class SmootherBank {
 public:
  SmootherBank(const data::DataMatrix& matrix, SmootherOptions options);

  struct Smoother {
    double bandwidth = 0.0;
    Eigen::MatrixXd inverse;  // (K + eta I)^{-1}
    double trace = 0.0;       // trace of K (K + eta I)^{-1}
  };

  const Smoother& get(std::size_t variable);
  const SmootherOptions& options() const noexcept { return options_; }
  const data::DataMatrix& matrix() const noexcept { return matrix_; }

 private:
  const data::DataMatrix& matrix_;
  SmootherOptions options_;
  std::map<std::size_t, Smoother> cache_;
};

struct AdditiveComponent {
  std::size_t parent = 0;
  Eigen::VectorXd inputs;        // training values of the parent column
  Eigen::VectorXd coefficients;  // kernel-ridge dual coefficients
  double bandwidth = 0.0;
  double offset = 0.0;           // centring constant subtracted from K a
  Eigen::VectorXd fitted;        // component values at the training rows
  double effective_df = 0.0;
};

/// y ~ intercept + sum_p f_p(x_p), fitted by backfitting.
struct AdditiveModel {
  std::size_t child = 0;
  std::vector<std::size_t> parents;
  std::vector<AdditiveComponent> components;
  double intercept = 0.0;
  double residual_variance = 0.0;
  double rss = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::optional<std::string> warning;  // set when backfitting hit the sweep cap
  SmootherOptions options;

  /// Predicts from full-width rows of the source matrix.
  Eigen::VectorXd predict(const Eigen::MatrixXd& rows) const;
  double total_df() const;
};

AdditiveModel additive_fit(const data::DataMatrix& matrix, std::size_t child,
                           std::span<const std::size_t> parents,
                           const SmootherOptions& options = {});
AdditiveModel additive_fit(SmootherBank& bank, std::size_t child,
                           std::span<const std::size_t> parents);

/// Nested-model F-test of `parent` in `model`, refitting without it. Degrees
/// of freedom are smoother-matrix traces; both fits exact gives p = 1.
double edge_significance(const data::DataMatrix& matrix, const AdditiveModel& model,
                         std::size_t parent);
double edge_significance(SmootherBank& bank, const AdditiveModel& model, std::size_t parent);

/// For every child with candidate parents, fits the additive model, tests
/// each parent and drops those with p > alpha. Output edges are a subset of
/// the input edges.
CausalGraph cam_prune(const data::DataMatrix& matrix, const CausalGraph& graph,
                      double alpha = kDefaultAlpha, const SmootherOptions& options = {});

}  // namespace climatescope::prune
