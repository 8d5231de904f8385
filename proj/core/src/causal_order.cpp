#include "climatescope/causal_order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "climatescope/error.hpp"
#include "climatescope/random.hpp"

namespace climatescope::causal {

std::vector<std::size_t> TopologicalOrder::positions() const {
  std::vector<std::size_t> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pos[order[k]] = k;
  }
  return pos;
}

std::vector<VariableVariance> leaf_variances(const Eigen::MatrixXd& jacobian_diag,
                                             std::span<const std::size_t> active) {
  if (active.empty()) {
    throw ContractError("leaf_variances needs at least one active variable");
  }
  if (jacobian_diag.rows() == 0) {
    throw ContractError("leaf_variances needs at least one sample");
  }
  std::vector<VariableVariance> out;
  out.reserve(active.size());
  const double n = static_cast<double>(jacobian_diag.rows());
  for (auto j : active) {
    if (j >= static_cast<std::size_t>(jacobian_diag.cols())) {
      throw ContractError(fmt::format("active variable {} has no Jacobian column", j));
    }
    const auto col = jacobian_diag.col(static_cast<Eigen::Index>(j));
    const double mean = col.sum() / n;
    out.push_back({j, (col.array() - mean).square().sum() / n});
  }
  return out;
}

std::size_t select_leaf(std::span<const VariableVariance> variances) {
  if (variances.empty()) {
    throw ContractError("select_leaf on an empty variance set");
  }
  const VariableVariance* best = &variances.front();
  for (const auto& v : variances) {
    if (v.variance < best->variance ||
        (v.variance == best->variance && v.variable < best->variable)) {
      best = &v;
    }
  }
  return best->variable;
}

TopologicalOrder topological_order(const data::DataMatrix& matrix, const DiscoveryOptions& options) {
  if (!matrix.standardized()) {
    throw ContractError("topological_order requires a standardized matrix");
  }
  const std::size_t d = matrix.cols();
  if (d < 2) {
    throw ContractError("topological_order needs at least two variables");
  }

  std::vector<std::size_t> active(d);
  std::iota(active.begin(), active.end(), 0);

  TopologicalOrder result;
  std::vector<std::size_t> removed;
  for (std::size_t round = 0; round < d; ++round) {
    const auto sub = matrix.select_columns(active);
    LeafRound record;
    record.active = active;
    try {
      const auto config = options.bandwidth
                              ? score::KernelConfig(*options.bandwidth, options.ridge)
                              : score::auto_config(sub, options.ridge, options.bandwidth_scale);
      record.bandwidth = config.bandwidth();
      const auto estimate = score::stein_score_and_jacobian(sub, config);

      std::vector<std::size_t> local(active.size());
      std::iota(local.begin(), local.end(), 0);
      auto variances = leaf_variances(estimate.jacobian_diag, local);
      for (auto& v : variances) {
        record.variances.push_back(v.variance);
        v.variable = active[v.variable];
      }
      record.leaf = select_leaf(variances);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("leaf-removal round {} ({} active variables): {}", round + 1,
                                     active.size(), e.what()));
    }
    removed.push_back(record.leaf);
    std::erase(active, record.leaf);
    result.trace.push_back(std::move(record));
  }
  result.order.assign(removed.rbegin(), removed.rend());
  return result;
}

void validate_order(const TopologicalOrder& order, std::size_t d) {
  if (order.order.size() != d) {
    throw ContractError(fmt::format("order has {} entries for {} variables", order.order.size(), d));
  }
  std::vector<bool> seen(d, false);
  for (auto v : order.order) {
    if (v >= d || seen[v]) {
      throw ContractError("order is not a permutation of the variables");
    }
    seen[v] = true;
  }
  if (order.trace.empty()) {
    return;
  }
  if (order.trace.size() != d) {
    throw ContractError(fmt::format("trace has {} rounds for {} variables", order.trace.size(), d));
  }
  for (std::size_t k = 0; k < d; ++k) {
    const auto& r = order.trace[k];
    if (r.active.size() != d - k || r.variances.size() != r.active.size()) {
      throw ContractError(fmt::format("trace round {} has the wrong number of active variables", k));
    }
    if (order.order[d - 1 - k] != r.leaf) {
      throw ContractError(fmt::format("trace round {} leaf disagrees with the order", k));
    }
    const auto it = std::find(r.active.begin(), r.active.end(), r.leaf);
    if (it == r.active.end()) {
      throw ContractError(fmt::format("trace round {} removes an inactive variable", k));
    }
    const double chosen = r.variances[static_cast<std::size_t>(it - r.active.begin())];
    if (chosen > *std::min_element(r.variances.begin(), r.variances.end())) {
      throw ContractError(fmt::format("trace round {} leaf is not the variance minimum", k));
    }
  }
}

double order_divergence(const DirectedGraph& truth, std::span<const std::size_t> order) {
  if (order.size() != truth.node_count()) {
    throw ContractError("order length does not match graph size");
  }
  if (truth.edge_count() == 0) {
    return 0.0;
  }
  std::vector<std::size_t> pos(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pos[order[k]] = k;
  }
  std::size_t violations = 0;
  for (const auto& [u, v] : truth.edges()) {
    if (pos[v] < pos[u]) {
      ++violations;
    }
  }
  return static_cast<double>(violations) / static_cast<double>(truth.edge_count());
}

std::optional<Mechanism> parse_mechanism(std::string_view text) {
  if (text == "sin") return Mechanism::kSin;
  if (text == "tanh") return Mechanism::kTanh;
  if (text == "cubic") return Mechanism::kCubic;
  return std::nullopt;
}

data::DataMatrix generate_anm(const AnmSpec& spec, std::size_t n) {
  if (n < 1) {
    throw ContractError("generate_anm needs at least one sample");
  }
  if (!(spec.noise_std > 0.0)) {
    throw ContractError("noise_std must be positive");
  }
  const std::size_t d = spec.dag.node_count();
  if (spec.mechanisms.size() != d) {
    throw ContractError(fmt::format("{} mechanisms for {} nodes", spec.mechanisms.size(), d));
  }
  const auto topo = spec.dag.topological_sort();
  if (!topo) {
    throw ContractError("ANM graph contains a cycle");
  }

  Rng rng(spec.seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (auto v : *topo) {
    const auto parents = spec.dag.parents(v);
    const auto col = static_cast<Eigen::Index>(v);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (parents.empty()) {
        x(i, col) = standard_normal(rng);
        continue;
      }
      double input = 0.0;
      for (auto p : parents) {
        input += x(i, static_cast<Eigen::Index>(p));
      }
      double f = 0.0;
      switch (spec.mechanisms[v]) {
        case Mechanism::kSin: f = std::sin(input); break;
        case Mechanism::kTanh: f = std::tanh(input); break;
        case Mechanism::kCubic: f = input * input * input; break;
      }
      x(i, col) = f + spec.noise_std * standard_normal(rng);
    }
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) {
    names.push_back("X" + std::to_string(j + 1));
  }
  return data::DataMatrix::raw(std::move(names), std::move(x));
}

DirectedGraph chain_dag(std::size_t d) {
  DirectedGraph g(d);
  for (std::size_t j = 1; j < d; ++j) {
    g.add_edge(j - 1, j);
  }
  return g;
}

DirectedGraph random_dag(std::size_t d, double expected_degree, std::uint64_t seed) {
  DirectedGraph g(d);
  if (d < 2) {
    return g;
  }
  Rng rng(seed);
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  seeded_shuffle(perm, rng);
  const double p = std::min(1.0, expected_degree / static_cast<double>(d - 1));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      if (uniform_real(rng, 0.0, 1.0) < p) {
        g.add_edge(perm[a], perm[b]);
      }
    }
  }
  return g;
}

}  // namespace climatescope::causal
