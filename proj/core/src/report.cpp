#include "climatescope/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "climatescope/agents/registry.hpp"
#include "climatescope/agents/transcript.hpp"
#include "climatescope/error.hpp"
#include "climatescope/version.hpp"

namespace climatescope::report {

namespace {

using nlohmann::json;

struct ComponentField {
  std::string_view name;
  std::optional<int> RubricScore::*field;
};

constexpr ComponentField kComponents[] = {
    {"originality", &RubricScore::originality},
    {"importance", &RubricScore::importance},
    {"support_of_claims", &RubricScore::support_of_claims},
    {"soundness", &RubricScore::soundness},
    {"clarity", &RubricScore::clarity},
    {"value_to_community", &RubricScore::value_to_community},
    {"contextualization", &RubricScore::contextualization},
};

std::string num(double v) {
  const auto text = fmt::format("{:.6g}", v);
  return text == "-0" ? "0" : text;
}

std::string escape_label(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string unescape_label(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) ++i;
    out.push_back(text[i]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RenderError(fmt::format("cannot read bundle artifact {}", path.filename().string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string table_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string table_rule(std::size_t columns) {
  std::string out = "|";
  for (std::size_t i = 0; i < columns; ++i) out += "---|";
  return out + "\n";
}

}  // namespace

std::vector<std::pair<std::string, int>> present_components(const RubricScore& scores) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& c : kComponents) {
    if (const auto& v = scores.*(c.field)) {
      out.emplace_back(std::string(c.name), *v);
    }
  }
  return out;
}

void validate_rubric(const RubricScore& scores) {
  for (const auto& [name, value] : present_components(scores)) {
    if (value < 0 || value > 10) {
      throw ContractError(fmt::format("rubric component {} = {} is outside [0, 10]", name, value));
    }
  }
  if (scores.overall && !std::isfinite(*scores.overall)) {
    throw ContractError("rubric overall is not finite");
  }
}

double aggregate_rubric(const RubricScore& scores, const std::optional<RubricWeights>& weights) {
  validate_rubric(scores);
  const auto present = present_components(scores);
  if (present.empty()) {
    throw ContractError("rubric has no components to aggregate");
  }
  if (!weights) {
    double sum = 0.0;
    for (const auto& [name, value] : present) sum += value;
    return sum / static_cast<double>(present.size());
  }
  double total = 0.0;
  for (const auto& [name, w] : *weights) {
    const bool known = std::any_of(present.begin(), present.end(),
                                   [&](const auto& p) { return p.first == name; });
    if (!known && w != 0.0) {
      throw ContractError(fmt::format("weight given for absent component '{}'", name));
    }
    if (!(w >= 0.0)) {
      throw ContractError(fmt::format("weight for '{}' is negative", name));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError(fmt::format("rubric weights sum to {}, not 1", total));
  }
  double out = 0.0;
  for (const auto& [name, value] : present) {
    if (auto it = weights->find(name); it != weights->end()) out += it->second * value;
  }
  return out;
}

std::string rubric_to_document(const RubricScore& scores) {
  validate_rubric(scores);
  json j{{"format", "climatescope"}, {"version", doc::kFormatVersion}, {"kind", "rubric"}};
  for (const auto& c : kComponents) {
    const auto& v = scores.*(c.field);
    j[std::string(c.name)] = v ? json(*v) : json(nullptr);
  }
  j["overall"] = scores.overall ? json(*scores.overall) : json(nullptr);
  return j.dump(1) + "\n";
}

RubricScore rubric_from_document(std::string_view text) {
  if (doc::document_kind(text) != "rubric") {
    throw ParseError("expected a 'rubric' document");
  }
  RubricScore out;
  try {
    const auto j = json::parse(text);
    for (const auto& c : kComponents) {
      const auto key = std::string(c.name);
      if (j.contains(key) && !j.at(key).is_null()) {
        out.*(c.field) = j.at(key).get<int>();
      }
    }
    if (j.contains("overall") && !j.at("overall").is_null()) {
      out.overall = j.at("overall").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid rubric document: ") + e.what());
  }
  try {
    validate_rubric(out);
  } catch (const ContractError& e) {
    throw ParseError(e.what());
  }
  return out;
}

std::string export_graph_dot(const prune::CausalGraph& graph) {
  graph.validate();
  std::string out = "digraph causal {\n";
  for (std::size_t i = 0; i < graph.variable_names.size(); ++i) {
    out += fmt::format("  n{} [label=\"{}\"];\n", i, escape_label(graph.variable_names[i]));
  }
  for (const auto& e : graph.graph.edges()) {
    if (auto it = graph.edge_pvalues.find(e); it != graph.edge_pvalues.end()) {
      out += fmt::format("  n{} -> n{} [label=\"p={}\"];\n", e.first, e.second, it->second);
    } else {
      out += fmt::format("  n{} -> n{};\n", e.first, e.second);
    }
  }
  return out + "}\n";
}

prune::CausalGraph parse_graph_dot(std::string_view dot) {
  static const std::regex header_re(R"re(^\s*digraph\s+\w*\s*\{\s*$)re");
  static const std::regex node_re(R"re(^\s*n(\d+)\s*\[label="((?:[^"\\]|\\.)*)"\];\s*$)re");
  static const std::regex edge_re(R"re(^\s*n(\d+)\s*->\s*n(\d+)\s*(?:\[label="p=([^"]*)"\])?;\s*$)re");
  static const std::regex close_re(R"re(^\s*\}\s*$)re");

  std::vector<std::string> names;
  std::vector<std::tuple<std::size_t, std::size_t, std::optional<double>>> edges;
  std::istringstream in{std::string(dot)};
  std::string line;
  std::size_t row = 0;
  bool opened = false;
  bool closed = false;
  std::smatch m;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (closed) throw ParseError("content after the closing brace", row);
    if (!opened) {
      if (!std::regex_match(line, header_re)) throw ParseError("expected 'digraph ... {'", row);
      opened = true;
    } else if (std::regex_match(line, m, node_re)) {
      if (std::stoul(m[1].str()) != names.size()) {
        throw ParseError("node ids must be n0, n1, ... in order", row);
      }
      names.push_back(unescape_label(m[2].str()));
    } else if (std::regex_match(line, m, edge_re)) {
      std::optional<double> p;
      if (m[3].matched) {
        const auto text = m[3].str();
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
          throw ParseError("edge label is not a p-value", row);
        }
        p = value;
      }
      edges.emplace_back(std::stoul(m[1].str()), std::stoul(m[2].str()), p);
    } else if (std::regex_match(line, close_re)) {
      closed = true;
    } else {
      throw ParseError("unrecognized DOT statement", row);
    }
  }
  if (!closed) throw ParseError("missing closing brace", row);

  prune::CausalGraph out{names, DirectedGraph(names.size()), {}, {}};
  try {
    for (const auto& [u, v, p] : edges) {
      out.graph.add_edge(u, v);
      if (p) out.edge_pvalues[{u, v}] = *p;
    }
    out.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("invalid graph in DOT: ") + e.what());
  }
  return out;
}

AnalysisReport load_bundle(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw RenderError(fmt::format("bundle directory '{}' does not exist", directory.string()));
  }
  for (auto name : kRequiredArtifacts) {
    if (!std::filesystem::is_regular_file(directory / name)) {
      throw RenderError(fmt::format("bundle is missing required artifact {}", name));
    }
  }
  auto read = [&](std::string_view name) { return read_file(directory / name); };
  auto has = [&](std::string_view name) { return std::filesystem::is_regular_file(directory / name); };

  AnalysisReport r;
  r.matrix = doc::data_matrix_from_document(read("matrix.json"));
  r.summary = doc::summary_stats_from_csv(read("stats.csv"));
  r.correlation = stats::correlation_from_csv(read("correlation.csv"));
  r.order = doc::order_from_document(read("order.json"));
  r.graph = doc::graph_from_document(read("graph.json"));
  r.metrics = doc::metrics_from_document(read("metrics.json"));
  if (has("transcript.json")) {
    r.transcript = agents::transcript_from_document(read("transcript.json"));
  }
  if (has("rubric.json")) {
    r.rubric = rubric_from_document(read("rubric.json"));
  }
  if (has("task.txt")) {
    r.task = read("task.txt");
    while (!r.task.empty() && (r.task.back() == '\n' || r.task.back() == '\r')) r.task.pop_back();
  } else if (r.transcript) {
    r.task = r.transcript->task;
  }
  for (auto name : kRequiredArtifacts) r.artifact_files.emplace_back(name);
  for (auto name : kOptionalArtifacts) {
    if (has(name)) r.artifact_files.emplace_back(name);
  }
  std::sort(r.artifact_files.begin(), r.artifact_files.end());
  return r;
}

std::string render_report(const AnalysisReport& r) {
  std::string out = "# Climate analysis report\n";

  out += "\n## Task\n\n";
  out += r.task.empty() ? "(no task recorded)\n" : r.task + "\n";

  out += "\n## Data Summary\n\n";
  out += fmt::format("{} rows, {} variables.\n\n", r.matrix.rows(), r.matrix.cols());
  out += table_row({"variable", "mean", "std", "min", "max"}) + table_rule(5);
  for (const auto& s : r.summary) {
    out += table_row({s.variable, num(s.mean), num(s.std_dev), num(s.min), num(s.max)});
  }

  out += "\n## Correlations\n\n";
  std::vector<std::string> header{"variable"};
  header.insert(header.end(), r.correlation.variable_names.begin(), r.correlation.variable_names.end());
  out += table_row(header) + table_rule(header.size());
  for (Eigen::Index i = 0; i < r.correlation.values.rows(); ++i) {
    std::vector<std::string> row{r.correlation.variable_names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < r.correlation.values.cols(); ++j) {
      row.push_back(fmt::format("{:.4f}", r.correlation.values(i, j)));
    }
    out += table_row(row);
  }

  out += "\n## Causal Discovery\n\n";
  out += "> Status: unvalidated by domain expertise. Edges are statistical candidates.\n\n";
  const auto& names = r.order.variable_names;
  out += "Order (sources first): ";
  for (std::size_t k = 0; k < r.order.order.order.size(); ++k) {
    out += (k == 0 ? "" : ", ") + names[r.order.order.order[k]];
  }
  out += "\n\n" + table_row({"round", "removed leaf", "active", "bandwidth"}) + table_rule(4);
  for (std::size_t k = 0; k < r.order.order.trace.size(); ++k) {
    const auto& round = r.order.order.trace[k];
    out += table_row({std::to_string(k + 1), names[round.leaf], std::to_string(round.active.size()),
                      num(round.bandwidth)});
  }
  const auto& g = r.graph.graph;
  out += fmt::format("\nPruned graph: {} of {} candidate edges retained.\n\n",
                     g.graph.edges().size(), r.graph.candidate_edges);
  out += table_row({"parent", "child", "p-value"}) + table_rule(3);
  for (const auto& e : g.graph.edges()) {
    const auto it = g.edge_pvalues.find(e);
    out += table_row({g.variable_names[e.first], g.variable_names[e.second],
                      it == g.edge_pvalues.end() ? "-" : num(it->second)});
  }

  out += "\n## Models & Metrics\n\n";
  out += table_row({"target", "method", "MAE", "RMSE", "R2", "train rows", "test rows"}) + table_rule(7);
  out += table_row({r.metrics.target, std::string(stats::to_string(r.metrics.method)),
                    num(r.metrics.metrics.mae), num(r.metrics.metrics.rmse), num(r.metrics.metrics.r2),
                    std::to_string(r.metrics.train_rows), std::to_string(r.metrics.test_rows)});
  if (!r.metrics.note.empty()) out += "\n" + r.metrics.note + "\n";

  out += "\n## Transcript Digest\n\n";
  if (r.transcript) {
    out += fmt::format("Backend {}, {} turns, terminated by {}.\n\n", r.transcript->backend,
                       r.transcript->turn_count, agents::to_string(r.transcript->terminated_by));
    out += agents::digest(*r.transcript, agents::default_registry());
  } else {
    out += "No transcript in this bundle.\n";
  }

  if (r.rubric) {
    out += "\n## Rubric\n\n" + table_row({"component", "score"}) + table_rule(2);
    for (const auto& c : kComponents) {
      const auto& v = (*r.rubric).*(c.field);
      out += table_row({std::string(c.name), v ? std::to_string(*v) : "not stated"});
    }
    if (r.rubric->overall) {
      out += table_row({"overall (stored)", fmt::format("{}", *r.rubric->overall)});
    } else if (!present_components(*r.rubric).empty()) {
      out += table_row({"overall (uniform mean)", fmt::format("{}", aggregate_rubric(*r.rubric))});
    }
  }

  out += "\n## Reproducibility\n\n";
  out += fmt::format("- climatescope {}\n", kVersion);
  const auto& ds = r.order.settings;
  out += fmt::format("- discovery: bandwidth {}, ridge {}\n",
                     ds.bandwidth ? num(*ds.bandwidth) : fmt::format("auto x {}", num(ds.bandwidth_scale)),
                     num(ds.ridge));
  const auto& ps = r.graph.settings;
  out += fmt::format("- pruning: alpha {}, r-threshold {}, smoother ridge {}\n", num(ps.alpha),
                     num(ps.r_threshold), num(ps.smoother_ridge));
  out += fmt::format("- model split: test fraction {}, seed {}\n", num(r.metrics.test_fraction),
                     r.metrics.seed);
  if (r.transcript) out += fmt::format("- reasoning backend: {}\n", r.transcript->backend);
  out += "- artifacts: ";
  for (std::size_t k = 0; k < r.artifact_files.size(); ++k) {
    out += (k == 0 ? "" : ", ") + r.artifact_files[k];
  }
  return out + "\n";
}

std::vector<std::pair<std::string, std::string>> plot_files(const AnalysisReport& r) {
  std::string csv = "round,variable,variance,removed\n";
  const auto& names = r.order.variable_names;
  for (std::size_t k = 0; k < r.order.order.trace.size(); ++k) {
    const auto& round = r.order.order.trace[k];
    for (std::size_t i = 0; i < round.active.size(); ++i) {
      csv += fmt::format("{},{},{},{}\n", k + 1, names[round.active[i]], round.variances[i],
                         round.active[i] == round.leaf ? 1 : 0);
    }
  }
  const std::string script =
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set logscale y\n"
      "set xlabel 'removal round'\n"
      "set ylabel 'variance of score-Jacobian diagonal'\n"
      "plot 'leaf_variances.csv' using 1:3 with points pt 7 title 'active variables', \\\n"
      "     '' using 1:($4 == 1 ? $3 : 1/0) with points pt 6 ps 2 title 'removed leaf'\n";
  return {{"leaf_variances.csv", csv}, {"leaf_variances.gp", script}};
}

}  // namespace climatescope::report
