#include "climatescope/graph_pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <fmt/format.h>

#include "climatescope/error.hpp"
#include "climatescope/score_engine.hpp"
#include "climatescope/stat_models.hpp"

namespace climatescope::prune {

namespace {

Eigen::VectorXd centered(const Eigen::VectorXd& v) {
  return v.array() - v.mean();
}

std::string context(const CausalGraph& graph, std::size_t child, const std::exception& e) {
  return fmt::format("pruning parents of '{}': {}", graph.variable_names[child], e.what());
}

// Mean squared residual at or below this counts as an exact fit.
constexpr double kExactFitLevel = 1e-12;

}  // namespace

void CausalGraph::validate() const {
  const std::size_t d = graph.node_count();
  if (variable_names.size() != d) {
    throw ContractError("causal graph has a name count that differs from its node count");
  }
  if (!graph.is_acyclic()) {
    throw ContractError("causal graph contains a cycle");
  }
  if (!order.order.empty()) {
    causal::validate_order(order, d);
    const auto pos = order.positions();
    for (const auto& [u, v] : graph.edges()) {
      if (pos[u] >= pos[v]) {
        throw ContractError(fmt::format("edge {} -> {} runs against the topological order",
                                        variable_names[u], variable_names[v]));
      }
    }
  }
  for (const auto& [edge, p] : edge_pvalues) {
    if (!graph.has_edge(edge.first, edge.second)) {
      throw ContractError("p-value recorded for an absent edge");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("edge p-value outside [0, 1]");
    }
  }
}

CausalGraph full_dag_from_order(const causal::TopologicalOrder& order,
                                std::vector<std::string> variable_names) {
  const std::size_t d = order.order.size();
  causal::validate_order(order, d);
  if (variable_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) {
      variable_names.push_back("X" + std::to_string(j + 1));
    }
  }
  if (variable_names.size() != d) {
    throw ContractError("variable name count does not match the order length");
  }
  CausalGraph out{std::move(variable_names), DirectedGraph(d), {}, order};
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      out.graph.add_edge(order.order[a], order.order[b]);
    }
  }
  return out;
}

CausalGraph preselect_parents(const data::DataMatrix& matrix, const CausalGraph& graph,
                              double r_threshold) {
  if (!(r_threshold >= 0.0 && r_threshold <= 1.0)) {
    throw ContractError("r_threshold must lie in [0, 1]");
  }
  if (matrix.cols() != graph.graph.node_count()) {
    throw ContractError("matrix width does not match the graph");
  }
  CausalGraph out = graph;
  if (r_threshold == 0.0) {
    return out;
  }
  for (const auto& [u, v] : graph.graph.edges()) {
    const double r = stats::pearson(matrix.values().col(static_cast<Eigen::Index>(u)),
                                    matrix.values().col(static_cast<Eigen::Index>(v)));
    if (std::abs(r) < r_threshold) {
      out.graph.remove_edge(u, v);
      out.edge_pvalues.erase({u, v});
    }
  }
  return out;
}

SmootherBank::SmootherBank(const data::DataMatrix& matrix, SmootherOptions options)
    : matrix_(matrix), options_(options) {
  if (!(options_.ridge > 0.0)) {
    throw ContractError("smoother ridge must be positive");
  }
}

const SmootherBank::Smoother& SmootherBank::get(std::size_t variable) {
  if (auto it = cache_.find(variable); it != cache_.end()) {
    return it->second;
  }
  if (variable >= matrix_.cols()) {
    throw ContractError("smoother requested for a variable outside the matrix");
  }
  const Eigen::MatrixXd column = matrix_.values().col(static_cast<Eigen::Index>(variable));
  Smoother s;
  s.bandwidth = options_.bandwidth ? *options_.bandwidth : score::median_bandwidth(column);
  Eigen::MatrixXd system = score::rbf_gram(column, column, s.bandwidth);
  system.diagonal().array() += options_.ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericError(fmt::format("smoother factorization failed for '{}'",
                                   matrix_.variable_names()[variable]));
  }
  s.inverse = llt.solve(Eigen::MatrixXd::Identity(system.rows(), system.cols()));
  // tr(K (K + eta I)^{-1}) = n - eta tr((K + eta I)^{-1})
  s.trace = static_cast<double>(system.rows()) - options_.ridge * s.inverse.trace();
  return cache_.emplace(variable, std::move(s)).first->second;
}

Eigen::VectorXd AdditiveModel::predict(const Eigen::MatrixXd& rows) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(rows.rows(), intercept);
  for (const auto& c : components) {
    if (c.parent >= static_cast<std::size_t>(rows.cols())) {
      throw ContractError("prediction rows are narrower than the model's parents");
    }
    const Eigen::MatrixXd x = rows.col(static_cast<Eigen::Index>(c.parent));
    const Eigen::MatrixXd train = c.inputs;
    out.array() += (score::rbf_gram(x, train, c.bandwidth) * c.coefficients).array() - c.offset;
  }
  return out;
}

double AdditiveModel::total_df() const {
  double df = 1.0;  // intercept
  for (const auto& c : components) {
    df += c.effective_df;
  }
  return df;
}

AdditiveModel additive_fit(SmootherBank& bank, std::size_t child,
                           std::span<const std::size_t> parents) {
  const auto& matrix = bank.matrix();
  if (parents.empty()) {
    throw ContractError("additive_fit needs at least one parent");
  }
  if (child >= matrix.cols()) {
    throw ContractError("child index outside the matrix");
  }
  for (auto p : parents) {
    if (p == child) {
      throw ContractError("child cannot be its own parent");
    }
    if (p >= matrix.cols()) {
      throw ContractError("parent index outside the matrix");
    }
  }

  const auto& opts = bank.options();
  const Eigen::VectorXd y = matrix.values().col(static_cast<Eigen::Index>(child));
  const Eigen::Index n = y.size();

  AdditiveModel model;
  model.child = child;
  model.parents.assign(parents.begin(), parents.end());
  model.options = opts;
  model.intercept = y.mean();

  std::vector<const SmootherBank::Smoother*> smoothers;
  for (auto p : model.parents) {
    smoothers.push_back(&bank.get(p));
    AdditiveComponent c;
    c.parent = p;
    c.inputs = matrix.values().col(static_cast<Eigen::Index>(p));
    c.coefficients = Eigen::VectorXd::Zero(n);
    c.fitted = Eigen::VectorXd::Zero(n);
    c.bandwidth = smoothers.back()->bandwidth;
    c.effective_df = smoothers.back()->trace;
    model.components.push_back(std::move(c));
  }

  const Eigen::VectorXd y_centered = y.array() - model.intercept;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t k = 0; k < model.components.size(); ++k) {
      auto& c = model.components[k];
      const Eigen::VectorXd partial = y_centered - (total - c.fitted);
      c.coefficients = smoothers[k]->inverse * partial;
      const Eigen::VectorXd raw = partial - opts.ridge * c.coefficients;
      c.offset = raw.mean();
      const Eigen::VectorXd updated = raw.array() - c.offset;
      max_change = std::max(max_change, (updated - c.fitted).cwiseAbs().maxCoeff());
      total += updated - c.fitted;
      c.fitted = updated;
    }
    model.sweeps = sweep;
    if (max_change < opts.tolerance) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged) {
    model.warning = fmt::format("backfitting for '{}' did not converge within {} sweeps",
                                matrix.variable_names()[child], opts.max_sweeps);
  }
  const Eigen::VectorXd residual = y_centered - total;
  model.rss = residual.squaredNorm();
  model.residual_variance = model.rss / static_cast<double>(n);
  return model;
}

AdditiveModel additive_fit(const data::DataMatrix& matrix, std::size_t child,
                           std::span<const std::size_t> parents, const SmootherOptions& options) {
  SmootherBank bank(matrix, options);
  return additive_fit(bank, child, parents);
}

double edge_significance(SmootherBank& bank, const AdditiveModel& model, std::size_t parent) {
  const auto it = std::find(model.parents.begin(), model.parents.end(), parent);
  if (it == model.parents.end()) {
    throw ContractError(fmt::format("variable {} is not a parent in the model", parent));
  }
  const auto& matrix = bank.matrix();
  const double n = static_cast<double>(matrix.rows());

  std::vector<std::size_t> reduced_parents;
  for (auto p : model.parents) {
    if (p != parent) {
      reduced_parents.push_back(p);
    }
  }
  double rss_reduced = 0.0;
  double df_reduced = 1.0;
  if (reduced_parents.empty()) {
    const Eigen::VectorXd y = matrix.values().col(static_cast<Eigen::Index>(model.child));
    rss_reduced = centered(y).squaredNorm();
  } else {
    const auto reduced = additive_fit(bank, model.child, reduced_parents);
    rss_reduced = reduced.rss;
    df_reduced = reduced.total_df();
  }

  const double rss_full = model.rss;
  const double df_full = model.total_df();
  const bool full_exact = rss_full <= kExactFitLevel * n;
  const bool reduced_exact = rss_reduced <= kExactFitLevel * n;
  if (full_exact && reduced_exact) {
    return 1.0;
  }
  if (full_exact) {
    return 0.0;
  }
  const double df1 = df_full - df_reduced;
  const double df2 = n - df_full;
  if (!(df1 > 0.0) || !(df2 > 0.0)) {
    return 1.0;
  }
  const double f = ((rss_reduced - rss_full) / df1) / (rss_full / df2);
  if (!(f > 0.0)) {
    return 1.0;
  }
  if (!std::isfinite(f)) {
    return 0.0;
  }
  const boost::math::fisher_f_distribution<double> dist(df1, df2);
  return std::clamp(boost::math::cdf(boost::math::complement(dist, f)), 0.0, 1.0);
}

double edge_significance(const data::DataMatrix& matrix, const AdditiveModel& model,
                         std::size_t parent) {
  SmootherBank bank(matrix, model.options);
  return edge_significance(bank, model, parent);
}

CausalGraph cam_prune(const data::DataMatrix& matrix, const CausalGraph& graph, double alpha,
                      const SmootherOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("alpha must lie in [0, 1]");
  }
  if (matrix.cols() != graph.graph.node_count()) {
    throw ContractError("matrix width does not match the graph");
  }
  graph.validate();
  if (!matrix.standardized()) {
    throw ContractError("cam_prune requires a standardized matrix");
  }

  CausalGraph out = graph;
  SmootherBank bank(matrix, options);

  std::vector<std::size_t> children;
  if (!graph.order.order.empty()) {
    children = graph.order.order;
  } else {
    children = *graph.graph.topological_sort();
  }
  for (auto child : children) {
    const auto parents = graph.graph.parents(child);
    if (parents.empty()) {
      continue;
    }
    try {
      const auto model = additive_fit(bank, child, parents);
      for (auto p : parents) {
        const double pvalue = edge_significance(bank, model, p);
        if (pvalue > alpha) {
          out.graph.remove_edge(p, child);
          out.edge_pvalues.erase({p, child});
        } else {
          out.edge_pvalues[{p, child}] = pvalue;
        }
      }
    } catch (const NumericError& e) {
      throw NumericError(context(graph, child, e));
    } catch (const ContractError& e) {
      throw ContractError(context(graph, child, e));
    }
  }
  return out;
}

}  // namespace climatescope::prune
