// Acceptance suite: one line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cli.hpp"
#include "climatescope/agents/backend.hpp"
#include "climatescope/agents/pipeline.hpp"
#include "climatescope/agents/transcript.hpp"
#include "climatescope/causal_order.hpp"
#include "climatescope/graph_pruning.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/report.hpp"
#include "climatescope/score_engine.hpp"
#include "climatescope/stat_models.hpp"
#include "support.hpp"

namespace cs = climatescope;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

cs::data::DataMatrix anm(const cs::DirectedGraph& dag, std::uint64_t seed, std::size_t n) {
  cs::causal::AnmSpec spec{dag, std::vector<cs::causal::Mechanism>(dag.node_count(), cs::causal::Mechanism::kSin),
                           0.3, seed};
  return cs::data::standardize(cs::causal::generate_anm(spec, n));
}

Verdict gaussian_score_oracle() {
  std::vector<double> rmse, seconds;
  std::vector<std::vector<double>> jac_means(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto z = cs::data::standardize(cs::testing::raw_matrix(cs::testing::normal_matrix(1000, 3, seed)));
    const auto start = Clock::now();
    const auto est = cs::score::stein_score_and_jacobian(z, cs::score::auto_config(z));
    seconds.push_back(seconds_since(start));
    rmse.push_back(std::sqrt((est.scores + z.values()).squaredNorm() / static_cast<double>(z.values().size())));
    for (Eigen::Index j = 0; j < 3; ++j) jac_means[j].push_back(est.jacobian_diag.col(j).mean());
  }
  const double med_rmse = median(rmse);
  bool jac_ok = true;
  std::string jac_text;
  for (const auto& col : jac_means) {
    const double m = median(col);
    jac_ok = jac_ok && m >= -1.3 && m <= -0.7;
    jac_text += fmt::format(" {:.3f}", m);
  }
  const double slowest = *std::max_element(seconds.begin(), seconds.end());
  return {med_rmse < 0.15 && jac_ok && slowest < 10.0,
          fmt::format("median RMSE {:.4f} (< 0.15), median Jacobian column means{} (in [-1.3, -0.7]), "
                      "slowest seed {:.2f} s (< 10)",
                      med_rmse, jac_text, slowest)};
}

Verdict chain_recovery() {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto order = cs::causal::topological_order(anm(cs::causal::chain_dag(3), seed, 1000));
    exact += order.order == std::vector<std::size_t>{0, 1, 2};
  }
  std::vector<double> divergence;
  const auto chain4 = cs::causal::chain_dag(4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto order = cs::causal::topological_order(anm(chain4, seed, 1000));
    divergence.push_back(cs::causal::order_divergence(chain4, order.order));
  }
  const double med = median(divergence);
  return {exact >= 9 && med <= 0.1,
          fmt::format("d=3 exact orders {}/10 (>= 9), d=4 median divergence {:.3f} (<= 0.1)", exact, med)};
}

Verdict sixteen_variables() {
  std::vector<double> divergence;
  int improved = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto dag = cs::causal::random_dag(16, 2.0, seed);
    const auto m = anm(dag, seed, 1000);
    const auto start = Clock::now();
    const auto order = cs::causal::topological_order(m);
    const auto full = cs::prune::full_dag_from_order(order, m.variable_names());
    const auto pruned = cs::prune::cam_prune(m, cs::prune::preselect_parents(m, full));
    slowest = std::max(slowest, seconds_since(start));
    divergence.push_back(cs::causal::order_divergence(dag, order.order));
    improved += cs::structural_hamming_distance(pruned.graph, dag) <
                cs::structural_hamming_distance(full.graph, dag);
  }
  const double med = median(divergence);
  return {slowest < 300.0 && med <= 0.2 && improved >= 9,
          fmt::format("slowest seed {:.1f} s (< 300), median divergence {:.3f} (<= 0.2), "
                      "pruned SHD below full SHD {}/10 (>= 9)",
                      slowest, med, improved)};
}

Verdict pruning_precision() {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = anm(cs::causal::chain_dag(3), seed, 1000);
    const auto full = cs::prune::full_dag_from_order(cs::causal::topological_order(m), m.variable_names());
    const auto g = cs::prune::cam_prune(m, full, 0.001).graph;
    good += !g.has_edge(0, 2) && g.has_edge(0, 1) && g.has_edge(1, 2);
  }
  return {good >= 8, fmt::format("skip edge removed with both chain edges kept {}/10 (>= 8)", good)};
}

Verdict metrics_identities() {
  Eigen::VectorXd y(3), p(3);
  y << 1, 2, 3;
  p << 2, 3, 4;
  const auto m = cs::stats::evaluate(y, p);
  const bool fixed = std::abs(m.mae - 1) <= 1e-12 && std::abs(m.rmse - 1) <= 1e-12 &&
                     std::abs(m.r2 + 0.5) <= 1e-12;
  cs::Rng rng(5);
  int ordered = 0, iff = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = 2 + cs::uniform_index(rng, 30);
    Eigen::VectorXd t(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = cs::standard_normal(rng);
      q[i] = cs::standard_normal(rng);
    }
    ordered += cs::stats::evaluate(t, q).rmse >= cs::stats::evaluate(t, q).mae;
    // R^2 = 1 on exact predictions and below 1 on any perturbation.
    Eigen::VectorXd nudged = t;
    nudged[cs::uniform_index(rng, n)] += 1e-3;
    iff += cs::stats::evaluate(t, t).r2 == 1.0 && cs::stats::evaluate(t, nudged).r2 < 1.0;
  }
  return {fixed && ordered == 10000 && iff == 10000,
          fmt::format("fixed case (MAE {}, RMSE {}, R2 {}), RMSE >= MAE {}/10000, R2 = 1 iff exact {}/10000",
                      m.mae, m.rmse, m.r2, ordered, iff)};
}

Verdict correlation_properties() {
  cs::Rng rng(6);
  int affine = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 5 + cs::uniform_index(rng, 50);
    Eigen::VectorXd x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = cs::standard_normal(rng);
      y[i] = 0.5 * x[i] + cs::standard_normal(rng);
    }
    const double a = cs::uniform_real(rng, -5, 5), c = cs::uniform_real(rng, -5, 5);
    if (std::abs(a) < 0.01 || std::abs(c) < 0.01) { ++affine; continue; }
    const Eigen::VectorXd ax = (a * x).array() + cs::uniform_real(rng, -100, 100);
    const Eigen::VectorXd cy = (c * y).array() + cs::uniform_real(rng, -100, 100);
    const double expect = (a * c > 0 ? 1.0 : -1.0) * cs::stats::pearson(x, y);
    const double err = std::abs(cs::stats::pearson(ax, cy) - expect);
    worst = std::max(worst, err);
    affine += err <= 1e-9;
  }
  int perfect = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 3 + cs::uniform_index(rng, 50);
    Eigen::VectorXd x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = cs::standard_normal(rng);
    const double slope = cs::uniform_real(rng, 0.1, 10) * (trial % 2 == 0 ? 1 : -1);
    const Eigen::VectorXd y = (slope * x).array() + cs::uniform_real(rng, -10, 10);
    perfect += std::abs(cs::stats::pearson(x, y) - (slope > 0 ? 1.0 : -1.0)) <= 1e-12;
  }
  return {affine == 1000 && perfect == 100,
          fmt::format("affine invariance {}/1000 (worst {:.2e}), perfect linear +/-1 {}/100", affine, worst,
                      perfect)};
}

Verdict standardization() {
  cs::Rng rng(7);
  int idempotent = 0, invariant = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 3 + cs::uniform_index(rng, 40), d = 1 + cs::uniform_index(rng, 6);
    Eigen::MatrixXd x = cs::testing::normal_matrix(n, d, 1000 + trial);
    Eigen::MatrixXd y = x;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      y.col(j) = (y.col(j) * cs::uniform_real(rng, 0.01, 100)).array() + cs::uniform_real(rng, -1e3, 1e3);
    }
    const auto z = cs::data::standardize(cs::testing::raw_matrix(x));
    idempotent += (cs::data::standardize(z).values() - z.values()).cwiseAbs().maxCoeff() <= 1e-9;
    invariant += (cs::data::standardize(cs::testing::raw_matrix(y)).values() - z.values()).cwiseAbs().maxCoeff() <= 1e-9;
  }
  // Full discover output on raw data versus a rescaled, shifted copy.
  cs::causal::AnmSpec spec{cs::causal::chain_dag(4), std::vector<cs::causal::Mechanism>(4, cs::causal::Mechanism::kSin),
                           0.3, 11};
  const auto raw = cs::causal::generate_anm(spec, 300);
  Eigen::MatrixXd scaled = raw.values();
  const double scales[] = {1e3, 0.02, 7.5, 250.0};
  for (Eigen::Index j = 0; j < 4; ++j) scaled.col(j) = (scaled.col(j) * scales[j]).array() + 40.0 * j - 3.0;
  const auto discover = [](const cs::data::DataMatrix& m) {
    const auto z = cs::data::ensure_standardized(m);
    const auto order = cs::causal::topological_order(z);
    return cs::prune::cam_prune(z, cs::prune::preselect_parents(z, cs::prune::full_dag_from_order(order, z.variable_names())));
  };
  const auto a = discover(raw);
  const auto b = discover(cs::data::DataMatrix::raw(raw.variable_names(), scaled));
  bool same = a.order.order == b.order.order && a.graph == b.graph && a.order.trace.size() == b.order.trace.size();
  for (std::size_t r = 0; same && r < a.order.trace.size(); ++r) {
    for (std::size_t k = 0; k < a.order.trace[r].variances.size(); ++k) {
      same = same && std::abs(a.order.trace[r].variances[k] - b.order.trace[r].variances[k]) <=
                         1e-9 * std::max(1.0, std::abs(a.order.trace[r].variances[k]));
    }
  }
  for (const auto& [edge, p] : a.edge_pvalues) {
    const auto it = b.edge_pvalues.find(edge);
    same = same && it != b.edge_pvalues.end() && std::abs(it->second - p) <= 1e-9;
  }
  return {idempotent == 1000 && invariant == 1000 && same,
          fmt::format("idempotent {}/1000, positive-affine invariant {}/1000, discover output scale-invariant: {}",
                      idempotent, invariant, same ? "yes" : "no")};
}

Verdict orchestration() {
  using namespace cs::agents;
  const std::string task = "correlate urbanization and clean fuel access";
  const auto registry = default_registry();
  const auto evidence = EvidenceStore::load(cs::testing::sample_dir() / "evidence");
  const auto before = network_request_count();
  const auto plan = make_plan(task, registry);
  std::vector<std::string> runs;
  for (int k = 0; k < 2; ++k) {
    RuleBackend backend(evidence);
    MatrixToolBox tools(cs::testing::sample_matrix());
    runs.push_back(to_document(run_pipeline(task, registry, backend, tools), &plan));
  }
  const auto golden = cs::testing::read_file(cs::testing::golden_dir() / "correlate_urbanization_fuel.transcript.json");
  const bool golden_ok = runs[0] == golden && runs[1] == golden;

  const std::vector<std::string> vocab{"correlate", "urbanization", "fuel", "cause", "predict", "model",
                                       "access", "rural", "drivers", "emissions", "relationship", "the",
                                       "of", "and", "income", "forecast", "summary", "clean"};
  cs::Rng rng(8);
  int fuzz_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::string t;
    const auto words = 1 + cs::uniform_index(rng, 8);
    for (std::size_t w = 0; w < words; ++w) t += vocab[cs::uniform_index(rng, vocab.size())] + " ";
    const auto max_turns = kMinTurns + cs::uniform_index(rng, 25);
    RuleBackend backend(evidence);
    MatrixToolBox tools(cs::testing::sample_matrix());
    const auto tr = run_pipeline(t, registry, backend, tools, max_turns);
    bool ok = tr.terminated() && tr.turn_count <= max_turns &&
              replay_mismatch(tr, make_plan(t, registry), registry) == 0;
    try {
      validate_transcript(tr);
      for (const auto& m : tr.messages) find_agent(registry, m.sender);
    } catch (const std::exception&) {
      ok = false;
    }
    fuzz_ok += ok;
  }
  const auto requests = network_request_count() - before;
  return {golden_ok && fuzz_ok == 100 && requests == 0,
          fmt::format("golden transcript byte-identical over 2 runs: {}, fuzzed tasks valid {}/100, "
                      "network requests {}",
                      golden_ok ? "yes" : "no", fuzz_ok, requests)};
}

struct CliRun {
  int code = 0;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cs::cli::run(args, out, err);
  return {code, err.str()};
}

// Runs the documented CLI chain into `dir`; returns the first failing stage.
std::string run_cli_chain(const fs::path& dir, bool with_rubric) {
  const auto sample = cs::testing::sample_dir();
  const auto m = (dir / "matrix.json").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> stages{
      {"ingest", {"ingest", "--input", (sample / "worldbank_sample.csv").string(), "--missing", "interpolate", "--out", m}},
      {"stats", {"stats", "--matrix", m, "--out", (dir / "stats.csv").string()}},
      {"correlate", {"correlate", "--matrix", m, "--out", (dir / "correlation.csv").string()}},
      {"discover", {"discover", "--matrix", m, "--out", (dir / "order.json").string()}},
      {"prune", {"prune", "--matrix", m, "--order", (dir / "order.json").string(), "--out", (dir / "graph.json").string()}},
      {"model", {"model", "--matrix", m, "--target", "SYN.EMISSIONS.IDX", "--out", (dir / "metrics.json").string()}},
  };
  for (const auto& [name, args] : stages) {
    if (const auto r = cli(args); r.code != cs::cli::kSuccess) return name + ": " + r.err;
  }
  if (with_rubric) fs::copy_file(sample / "reviewer_rubric.json", dir / "rubric.json");
  if (const auto r = cli({"report", "--bundle", dir.string(), "--out", (dir / "report.md").string()});
      r.code != cs::cli::kSuccess) {
    return "report: " + r.err;
  }
  return {};
}

Verdict rubric() {
  const auto stored = cs::report::rubric_from_document(cs::testing::read_file(cs::testing::sample_dir() / "reviewer_rubric.json"));
  const double mean = cs::report::aggregate_rubric(stored);
  const auto dir = cs::testing::scratch_dir("acceptance_rubric");
  const auto failure = run_cli_chain(dir, true);
  if (!failure.empty()) return {false, "CLI chain failed at " + failure};
  const auto text = cs::testing::read_file(dir / "report.md");
  const bool rendered = text.find("| originality | 6 |") != std::string::npos &&
                        text.find("| soundness | 5 |") != std::string::npos &&
                        text.find("| clarity | 8 |") != std::string::npos &&
                        text.find("| overall (stored) | 6.4 |") != std::string::npos;
  return {mean == 6.5 && rendered,
          fmt::format("uniform mean {} (== 6.5), stored scores 6/5/8 and overall 6.4 rendered: {}", mean,
                      rendered ? "yes" : "no")};
}

Verdict cli_end_to_end() {
  std::vector<std::string> reports;
  for (int k = 0; k < 2; ++k) {
    const auto dir = cs::testing::scratch_dir("acceptance_cli");
    const auto failure = run_cli_chain(dir, false);
    if (!failure.empty()) return {false, "CLI chain failed at " + failure};
    reports.push_back(cs::testing::read_file(dir / "report.md"));
  }
  const std::vector<std::string> sections{"## Task", "## Data Summary", "## Correlations", "## Causal Discovery",
                                          "## Models & Metrics", "## Transcript Digest", "## Reproducibility"};
  int present = 0;
  for (const auto& s : sections) present += reports[0].find("\n" + s + "\n") != std::string::npos;
  const bool same = reports[0] == reports[1];
  return {present == 7 && same,
          fmt::format("all stages exit 0, sections present {}/7, identical report across 2 runs: {}", present,
                      same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, gaussian_score_oracle}, {2, chain_recovery},     {3, sixteen_variables}, {4, pruning_precision},
      {5, metrics_identities},    {6, correlation_properties}, {7, standardization}, {8, orchestration},
      {9, rubric},                {10, cli_end_to_end},
  };
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    Verdict v;
    const auto start = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << fmt::format("criterion {}: {} {} [{:.1f} s]", id, v.pass ? "PASS" : "FAIL", v.detail,
                             seconds_since(start))
              << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
