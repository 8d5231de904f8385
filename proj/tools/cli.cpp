#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "climatescope/agents/pipeline.hpp"
#include "climatescope/agents/transcript.hpp"
#include "climatescope/causal_order.hpp"
#include "climatescope/document.hpp"
#include "climatescope/error.hpp"
#include "climatescope/graph_pruning.hpp"
#include "climatescope/indicator_data.hpp"
#include "climatescope/report.hpp"
#include "climatescope/score_engine.hpp"
#include "climatescope/stat_models.hpp"
#include "climatescope/version.hpp"

namespace climatescope::cli {

namespace {

namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(fmt::format("cannot read '{}'", path));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_text(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream outf(p, std::ios::binary | std::ios::trunc);
  if (!outf || !(outf << content) || !outf.flush()) {
    throw DataError(fmt::format("cannot write '{}'", path));
  }
}

data::DataMatrix load_matrix(const std::string& path) {
  return doc::data_matrix_from_document(read_text(path));
}

struct IngestArgs {
  std::string input, format = "worldbank-wide", missing = "drop", out;
};
struct MatrixOutArgs {
  std::string matrix, out;
};
struct DiscoverArgs {
  std::string matrix, sigma = "auto", out, scores;
  double ridge = causal::kDiscoveryRidge;
  double bandwidth_scale = causal::kDiscoveryBandwidthScale;
};
struct PruneArgs {
  std::string matrix, order, out, dot;
  double alpha = prune::kDefaultAlpha;
  double r_threshold = prune::kDefaultRThreshold;
  double smoother_ridge = prune::SmootherOptions{}.ridge;
};
struct ModelArgs {
  std::string matrix, target, method = "kernel-ridge", out;
  double test_fraction = stats::kDefaultTestFraction;
  std::uint64_t seed = stats::kDefaultSplitSeed;
};
struct PipelineArgs {
  std::string task, data, backend = "rules", out, text, evidence, target;
  std::string method = "kernel-ridge";
  std::size_t max_turns = agents::kDefaultMaxTurns;
  std::string endpoint, model_name = agents::HttpBackendConfig{}.model;
  std::string credential_env = agents::kDefaultCredentialVariable;
  double timeout = 30.0;
};
struct ReportArgs {
  std::string bundle, out, plots;
};

int ingest(const IngestArgs& a, std::ostream& out) {
  if (a.format != "worldbank-wide") {
    throw ContractError(fmt::format("unsupported input format '{}'", a.format));
  }
  const auto policy = data::parse_missing_policy(a.missing);
  if (!policy) {
    throw ContractError(fmt::format("unknown missing-value policy '{}'", a.missing));
  }
  const auto series = data::parse_worldbank_wide(read_text(a.input));
  const auto matrix = data::align(series, *policy);
  write_text(a.out, doc::to_document(matrix));
  out << fmt::format("ingested {} rows x {} variables -> {}\n", matrix.rows(), matrix.cols(), a.out);
  return kSuccess;
}

int stats_cmd(const MatrixOutArgs& a, std::ostream& out) {
  const auto matrix = load_matrix(a.matrix);
  write_text(a.out, doc::summary_stats_to_csv(data::summary_stats(matrix)));
  out << fmt::format("summary statistics -> {}\n", a.out);
  return kSuccess;
}

int correlate(const MatrixOutArgs& a, std::ostream& out) {
  const auto matrix = load_matrix(a.matrix);
  write_text(a.out, stats::correlation_to_csv(stats::pearson_matrix(matrix)));
  out << fmt::format("correlation matrix -> {}\n", a.out);
  return kSuccess;
}

int discover(const DiscoverArgs& a, std::ostream& out) {
  const auto matrix = data::ensure_standardized(load_matrix(a.matrix));
  causal::DiscoveryOptions options;
  options.ridge = a.ridge;
  options.bandwidth_scale = a.bandwidth_scale;
  if (a.sigma != "auto") {
    try {
      std::size_t used = 0;
      options.bandwidth = std::stod(a.sigma, &used);
      if (used != a.sigma.size()) throw std::invalid_argument(a.sigma);
    } catch (const std::logic_error&) {
      throw ContractError(fmt::format("--sigma must be 'auto' or a number, got '{}'", a.sigma));
    }
  }
  const auto order = causal::topological_order(matrix, options);
  doc::OrderDocument document{matrix.variable_names(), order,
                              {options.bandwidth, options.bandwidth_scale, options.ridge}};
  write_text(a.out, doc::to_document(document));
  if (!a.scores.empty()) {
    const auto config = options.bandwidth
                            ? score::KernelConfig(*options.bandwidth, options.ridge)
                            : score::auto_config(matrix, options.ridge, options.bandwidth_scale);
    write_text(a.scores, doc::to_document(score::stein_score_and_jacobian(matrix, config),
                                          matrix.variable_names()));
  }
  std::string names;
  for (auto v : order.order) {
    names += (names.empty() ? "" : " ") + matrix.variable_names()[v];
  }
  out << fmt::format("order: {} -> {}\n", names, a.out);
  return kSuccess;
}

int prune_cmd(const PruneArgs& a, std::ostream& out) {
  const auto matrix = data::ensure_standardized(load_matrix(a.matrix));
  const auto order = doc::order_from_document(read_text(a.order));
  if (order.variable_names != matrix.variable_names()) {
    throw DataError("order and matrix name different variables");
  }
  const auto full = prune::full_dag_from_order(order.order, matrix.variable_names());
  const auto candidates = full.graph.edges().size();
  const auto pre = prune::preselect_parents(matrix, full, a.r_threshold);
  prune::SmootherOptions smoother;
  smoother.ridge = a.smoother_ridge;
  const auto graph = prune::cam_prune(matrix, pre, a.alpha, smoother);
  write_text(a.out, doc::to_document(doc::GraphDocument{
                        graph, {a.alpha, a.r_threshold, a.smoother_ridge}, candidates}));
  if (!a.dot.empty()) {
    write_text(a.dot, report::export_graph_dot(graph));
  }
  out << fmt::format("kept {} of {} candidate edges -> {}\n", graph.graph.edges().size(),
                     candidates, a.out);
  return kSuccess;
}

int model(const ModelArgs& a, std::ostream& out) {
  const auto matrix = load_matrix(a.matrix);
  const auto method = stats::parse_model_kind(a.method);
  if (!method) {
    throw ContractError(fmt::format("unknown method '{}'", a.method));
  }
  stats::HoldoutOptions options;
  options.method = *method;
  options.test_fraction = a.test_fraction;
  options.seed = a.seed;
  const auto result = stats::holdout_evaluate(matrix, a.target, options);
  doc::MetricsDocument metrics{a.target,       *method,
                               result.metrics, a.test_fraction,
                               a.seed,         result.train_rows.size(),
                               result.test_rows.size(),
                               std::string(stats::method_note(*method))};
  write_text(a.out, doc::to_document(metrics));
  out << fmt::format("{} on {}: MAE {:.4g}, RMSE {:.4g}, R2 {:.4g} -> {}\n", a.method, a.target,
                     result.metrics.mae, result.metrics.rmse, result.metrics.r2, a.out);
  return kSuccess;
}

int pipeline(const PipelineArgs& a, std::ostream& out) {
  const auto matrix = load_matrix(a.data);
  agents::ToolOptions tool_options;
  if (!a.target.empty()) tool_options.target = a.target;
  const auto method = stats::parse_model_kind(a.method);
  if (!method) {
    throw ContractError(fmt::format("unknown method '{}'", a.method));
  }
  tool_options.method = *method;
  agents::MatrixToolBox tools(matrix, tool_options);
  const auto registry = agents::default_registry();

  std::unique_ptr<agents::ReasoningBackend> backend;
  if (a.backend == "rules") {
    backend = std::make_unique<agents::RuleBackend>(
        a.evidence.empty() ? agents::EvidenceStore{} : agents::EvidenceStore::load(a.evidence));
  } else if (a.backend == "http") {
    agents::HttpBackendConfig config;
    config.endpoint = a.endpoint;
    config.model = a.model_name;
    config.credential_variable = a.credential_env;
    config.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000.0));
    backend = std::make_unique<agents::HttpBackend>(config);
  } else {
    throw ContractError(fmt::format("unknown backend '{}'", a.backend));
  }

  const auto transcript = agents::run_pipeline(a.task, registry, *backend, tools, a.max_turns);
  const auto plan = agents::make_plan(a.task, registry);
  write_text(a.out, agents::to_document(transcript, &plan));
  if (!a.text.empty()) {
    write_text(a.text, agents::render_text(transcript, registry));
  }
  out << fmt::format("{} messages, {} turns, terminated by {} -> {}\n",
                     transcript.messages.size(), transcript.turn_count,
                     agents::to_string(transcript.terminated_by), a.out);
  return transcript.terminated_by == agents::Termination::kBackendError ? kBackendError : kSuccess;
}

int report_cmd(const ReportArgs& a, std::ostream& out) {
  const auto bundle = report::load_bundle(a.bundle);
  write_text(a.out, report::render_report(bundle));
  if (!a.plots.empty()) {
    for (const auto& [name, content] : report::plot_files(bundle)) {
      write_text((fs::path(a.plots) / name).string(), content);
    }
  }
  out << fmt::format("report -> {}\n", a.out);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Indicator analysis: ingestion, causal discovery, modelling and reporting",
               "climatescope"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read option defaults from a key = value file");
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse an indicator CSV into a data matrix");
  ingest_cmd->add_option("--input", ingest_args.input, "Indicator CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--format", ingest_args.format, "Input layout")
      ->check(CLI::IsMember({"worldbank-wide"}))->capture_default_str();
  ingest_cmd->add_option("--missing", ingest_args.missing, "drop | interpolate")
      ->check(CLI::IsMember({"drop", "interpolate"}))->capture_default_str();
  ingest_cmd->add_option("--out", ingest_args.out, "Matrix document")->required();

  MatrixOutArgs stats_args;
  auto* stats_sub = app.add_subcommand("stats", "Per-variable summary statistics");
  stats_sub->add_option("--matrix", stats_args.matrix)->required()->check(CLI::ExistingFile);
  stats_sub->add_option("--out", stats_args.out, "CSV output")->required();

  MatrixOutArgs corr_args;
  auto* corr_sub = app.add_subcommand("correlate", "Pearson correlation matrix");
  corr_sub->add_option("--matrix", corr_args.matrix)->required()->check(CLI::ExistingFile);
  corr_sub->add_option("--out", corr_args.out, "CSV output")->required();

  DiscoverArgs disc_args;
  auto* disc_sub = app.add_subcommand("discover", "Topological order by iterative leaf removal");
  disc_sub->add_option("--matrix", disc_args.matrix)->required()->check(CLI::ExistingFile);
  disc_sub->add_option("--sigma", disc_args.sigma, "auto or a fixed kernel bandwidth")->capture_default_str();
  disc_sub->add_option("--bandwidth-scale", disc_args.bandwidth_scale,
                       "Multiplier on the median heuristic when --sigma is auto")
      ->check(CLI::PositiveNumber)->capture_default_str();
  disc_sub->add_option("--ridge", disc_args.ridge, "Stein ridge regularizer")
      ->check(CLI::PositiveNumber)->capture_default_str();
  disc_sub->add_option("--out", disc_args.out, "Order document")->required();
  disc_sub->add_option("--scores", disc_args.scores, "Also write the full-matrix score estimate");

  PruneArgs prune_args;
  auto* prune_sub = app.add_subcommand("prune", "Prune the order's full DAG");
  prune_sub->add_option("--matrix", prune_args.matrix)->required()->check(CLI::ExistingFile);
  prune_sub->add_option("--order", prune_args.order)->required()->check(CLI::ExistingFile);
  prune_sub->add_option("--alpha", prune_args.alpha, "Edge significance level")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  prune_sub->add_option("--r-threshold", prune_args.r_threshold, "Preselection |r| threshold")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  prune_sub->add_option("--smoother-ridge", prune_args.smoother_ridge, "Additive smoother ridge")
      ->check(CLI::PositiveNumber)->capture_default_str();
  prune_sub->add_option("--out", prune_args.out, "Graph document")->required();
  prune_sub->add_option("--dot", prune_args.dot, "Also write Graphviz DOT");

  ModelArgs model_args;
  auto* model_sub = app.add_subcommand("model", "Fit and score a regression on a holdout split");
  model_sub->add_option("--matrix", model_args.matrix)->required()->check(CLI::ExistingFile);
  model_sub->add_option("--target", model_args.target, "Target variable")->required();
  model_sub->add_option("--method", model_args.method, "kernel-ridge | tree")
      ->check(CLI::IsMember({"kernel-ridge", "tree"}))->capture_default_str();
  model_sub->add_option("--test-fraction", model_args.test_fraction)
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  model_sub->add_option("--seed", model_args.seed)->capture_default_str();
  model_sub->add_option("--out", model_args.out, "Metrics document")->required();

  PipelineArgs pipe_args;
  auto* pipe_sub = app.add_subcommand("pipeline", "Run the agent pipeline on a task");
  pipe_sub->add_option("--task", pipe_args.task, "Task text")->required();
  pipe_sub->add_option("--data", pipe_args.data, "Matrix document")->required()->check(CLI::ExistingFile);
  pipe_sub->add_option("--backend", pipe_args.backend, "rules | http")
      ->check(CLI::IsMember({"rules", "http"}))->capture_default_str();
  pipe_sub->add_option("--max-turns", pipe_args.max_turns)
      ->check(CLI::Range(std::size_t{agents::kMinTurns}, std::size_t{100000}))->capture_default_str();
  pipe_sub->add_option("--evidence", pipe_args.evidence, "Evidence snippet directory")
      ->check(CLI::ExistingDirectory);
  pipe_sub->add_option("--target", pipe_args.target, "Model target (default: last column)");
  pipe_sub->add_option("--method", pipe_args.method, "kernel-ridge | tree")
      ->check(CLI::IsMember({"kernel-ridge", "tree"}))->capture_default_str();
  pipe_sub->add_option("--endpoint", pipe_args.endpoint, "Chat-completion URL (http backend)");
  pipe_sub->add_option("--model-name", pipe_args.model_name)->capture_default_str();
  pipe_sub->add_option("--credential-env", pipe_args.credential_env,
                       "Environment variable holding the credential")->capture_default_str();
  pipe_sub->add_option("--timeout", pipe_args.timeout, "Backend timeout in seconds")
      ->check(CLI::PositiveNumber)->capture_default_str();
  pipe_sub->add_option("--out", pipe_args.out, "Transcript document")->required();
  pipe_sub->add_option("--text", pipe_args.text, "Also write a readable transcript");

  ReportArgs report_args;
  auto* report_sub = app.add_subcommand("report", "Render a bundle directory into a report");
  report_sub->add_option("--bundle", report_args.bundle)->required();
  report_sub->add_option("--out", report_args.out, "Report file")->required();
  report_sub->add_option("--plots", report_args.plots, "Directory for plot data and gnuplot script");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*ingest_cmd) return ingest(ingest_args, out);
    if (*stats_sub) return stats_cmd(stats_args, out);
    if (*corr_sub) return correlate(corr_args, out);
    if (*disc_sub) return discover(disc_args, out);
    if (*prune_sub) return prune_cmd(prune_args, out);
    if (*model_sub) return model(model_args, out);
    if (*pipe_sub) return pipeline(pipe_args, out);
    if (*report_sub) return report_cmd(report_args, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return kBackendError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kBackendError;
  } catch (const ContractError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace climatescope::cli
