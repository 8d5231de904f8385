#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "climatescope/graph.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/score_engine.hpp"

namespace climatescope::causal {

struct VariableVariance {
  std::size_t variable = 0;
  double variance = 0.0;
};

/// One leaf-removal round: which variables were still active, the variance
/// of each one's score-Jacobian diagonal, and the variable removed.
struct LeafRound {
  std::vector<std::size_t> active;
  std::vector<double> variances;  // aligned with `active`
  std::size_t leaf = 0;
  double bandwidth = 0.0;
};

/// Causal order (sources first, sinks last) with the full removal trace.
struct TopologicalOrder {
  std::vector<std::size_t> order;
  std::vector<LeafRound> trace;

  /// Position of each variable in `order`.
  std::vector<std::size_t> positions() const;
};

inline constexpr double kDiscoveryBandwidthScale = score::kDefaultBandwidthScale;
inline constexpr double kDiscoveryRidge = score::kDefaultRidge;

/// Bandwidth is re-derived per round as bandwidth_scale times the median
/// heuristic unless pinned. A pinned bandwidth ignores the scale.
struct DiscoveryOptions {
  std::optional<double> bandwidth;
  double bandwidth_scale = kDiscoveryBandwidthScale;
  double ridge = kDiscoveryRidge;
};

/// Population variance of each active column of `jacobian_diag`, in the
/// order of `active`.
std::vector<VariableVariance> leaf_variances(const Eigen::MatrixXd& jacobian_diag,
                                             std::span<const std::size_t> active);

/// Argmin of the variances; ties go to the smallest variable index.
std::size_t select_leaf(std::span<const VariableVariance> variances);

/// Iterative leaf removal. Each round re-estimates the score Jacobian on the
/// still-active columns and removes the one with least diagonal variance.
TopologicalOrder topological_order(const data::DataMatrix& matrix,
                                   const DiscoveryOptions& options = {});

/// Checks the structural invariants of an order/trace pair over d variables.
void validate_order(const TopologicalOrder& order, std::size_t d);

/// Fraction of true edges u -> v with v placed before u.
double order_divergence(const DirectedGraph& truth, std::span<const std::size_t> order);

enum class Mechanism { kSin, kTanh, kCubic };

std::optional<Mechanism> parse_mechanism(std::string_view text);

/// Additive noise model X_i = f_i(sum of parents) + eps_i.
struct AnmSpec {
  DirectedGraph dag;
  std::vector<Mechanism> mechanisms;  // one per node
  double noise_std = 0.3;
  std::uint64_t seed = 0;
};

/// Samples the model in topological order. Source nodes are standard
/// normal; every other node adds N(0, noise_std^2) to its mechanism output.
/// Variables are named X1..Xd.
data::DataMatrix generate_anm(const AnmSpec& spec, std::size_t n);

DirectedGraph chain_dag(std::size_t d);

/// Erdos-Renyi DAG with the given expected (total) degree per node over a
/// random node permutation.
DirectedGraph random_dag(std::size_t d, double expected_degree, std::uint64_t seed);

}  // namespace climatescope::causal
