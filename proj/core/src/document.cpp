#include "climatescope/document.hpp"

#include <charconv>

#include <boost/tokenizer.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "climatescope/error.hpp"
#include "csv_field.hpp"

namespace climatescope::doc {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "climatescope";

json header(std::string_view kind) {
  return json{{"format", kFormatName}, {"version", kFormatVersion}, {"kind", kind}};
}

json parse(std::string_view text, std::string_view expected_kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    throw ParseError("not a climatescope document");
  }
  if (j.value("version", 0) != kFormatVersion) {
    throw ParseError(fmt::format("unsupported document version {}", j.value("version", 0)));
  }
  const auto kind = j.value("kind", "");
  if (kind != expected_kind) {
    throw ParseError(fmt::format("expected a '{}' document, found '{}'", expected_kind, kind));
  }
  return j;
}

// Converts nlohmann type errors into ParseError.
template <typename F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("invalid {} document: {}", what, e.what()));
  }
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rows_matrix(const json& rows, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ParseError(fmt::format("row {} has {} values, expected {}", i + 1, rows[i].size(), cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

json order_json(const causal::TopologicalOrder& order) {
  json trace = json::array();
  for (const auto& r : order.trace) {
    trace.push_back({{"active", r.active},
                     {"variances", r.variances},
                     {"leaf", r.leaf},
                     {"bandwidth", r.bandwidth}});
  }
  return {{"order", order.order}, {"trace", std::move(trace)}};
}

causal::TopologicalOrder order_from_json(const json& j) {
  causal::TopologicalOrder order;
  order.order = j.at("order").get<std::vector<std::size_t>>();
  for (const auto& r : j.at("trace")) {
    causal::LeafRound round;
    round.active = r.at("active").get<std::vector<std::size_t>>();
    round.variances = r.at("variances").get<std::vector<double>>();
    round.leaf = r.at("leaf").get<std::size_t>();
    round.bandwidth = r.value("bandwidth", 0.0);
    order.trace.push_back(std::move(round));
  }
  return order;
}

}  // namespace

std::string document_kind(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    throw ParseError("not a climatescope document");
  }
  return j.value("kind", "");
}

std::string to_document(const data::DataMatrix& matrix) {
  json j = header("data_matrix");
  j["variables"] = matrix.variable_names();
  j["standardized"] = matrix.standardized();
  j["column_means"] = matrix.column_means();
  j["column_stds"] = matrix.column_stds();
  json labels = json::array();
  for (const auto& l : matrix.row_labels()) {
    labels.push_back({{"entity", l.entity}, {"year", l.year}});
  }
  j["row_labels"] = std::move(labels);
  j["rows"] = matrix_rows(matrix.values());
  return j.dump(1) + "\n";
}

data::DataMatrix data_matrix_from_document(std::string_view text) {
  const auto j = parse(text, "data_matrix");
  return guarded("data_matrix", [&] {
    auto names = j.at("variables").get<std::vector<std::string>>();
    auto values = rows_matrix(j.at("rows"), names.size());
    std::vector<data::RowLabel> labels;
    for (const auto& l : j.value("row_labels", json::array())) {
      labels.push_back({l.at("entity").get<std::string>(), l.at("year").get<int>()});
    }
    try {
      return data::DataMatrix::restore(std::move(names), std::move(values),
                                       j.value("column_means", std::vector<double>{}),
                                       j.value("column_stds", std::vector<double>{}),
                                       j.value("standardized", false), std::move(labels));
    } catch (const ContractError& e) {
      throw ParseError(std::string("inconsistent data_matrix document: ") + e.what());
    }
  });
}

std::string to_document(const score::ScoreEstimate& estimate,
                        const std::vector<std::string>& variable_names) {
  json j = header("score_estimate");
  j["variables"] = variable_names;
  j["bandwidth"] = estimate.config.bandwidth();
  j["ridge"] = estimate.config.ridge();
  j["scores"] = matrix_rows(estimate.scores);
  j["jacobian_diag"] = matrix_rows(estimate.jacobian_diag);
  return j.dump(1) + "\n";
}

std::string to_document(const OrderDocument& order) {
  json j = header("topological_order");
  j["variables"] = order.variable_names;
  j.update(order_json(order.order));
  j["settings"] = {{"bandwidth", order.settings.bandwidth ? json(*order.settings.bandwidth)
                                                          : json("auto")},
                   {"bandwidth_scale", order.settings.bandwidth_scale},
                   {"ridge", order.settings.ridge}};
  return j.dump(1) + "\n";
}

OrderDocument order_from_document(std::string_view text) {
  const auto j = parse(text, "topological_order");
  return guarded("topological_order", [&] {
    OrderDocument out;
    out.variable_names = j.at("variables").get<std::vector<std::string>>();
    out.order = order_from_json(j);
    const auto& s = j.at("settings");
    if (s.at("bandwidth").is_number()) {
      out.settings.bandwidth = s.at("bandwidth").get<double>();
    }
    out.settings.bandwidth_scale = s.value("bandwidth_scale", 1.0);
    out.settings.ridge = s.at("ridge").get<double>();
    try {
      causal::validate_order(out.order, out.variable_names.size());
    } catch (const ContractError& e) {
      throw ParseError(std::string("inconsistent topological_order document: ") + e.what());
    }
    return out;
  });
}

std::string to_document(const GraphDocument& graph) {
  json j = header("causal_graph");
  j["variables"] = graph.graph.variable_names;
  json edges = json::array();
  for (const auto& e : graph.graph.graph.edges()) {
    json edge = {{"parent", e.first}, {"child", e.second}};
    if (auto it = graph.graph.edge_pvalues.find(e); it != graph.graph.edge_pvalues.end()) {
      edge["p_value"] = it->second;
    }
    edges.push_back(std::move(edge));
  }
  j["edges"] = std::move(edges);
  j["topological_order"] = order_json(graph.graph.order);
  j["candidate_edges"] = graph.candidate_edges;
  j["settings"] = {{"alpha", graph.settings.alpha},
                   {"r_threshold", graph.settings.r_threshold},
                   {"smoother_ridge", graph.settings.smoother_ridge}};
  return j.dump(1) + "\n";
}

GraphDocument graph_from_document(std::string_view text) {
  const auto j = parse(text, "causal_graph");
  return guarded("causal_graph", [&] {
    GraphDocument out;
    auto& g = out.graph;
    g.variable_names = j.at("variables").get<std::vector<std::string>>();
    g.graph = DirectedGraph(g.variable_names.size());
    g.order = order_from_json(j.at("topological_order"));
    try {
      for (const auto& e : j.at("edges")) {
        const auto u = e.at("parent").get<std::size_t>();
        const auto v = e.at("child").get<std::size_t>();
        g.graph.add_edge(u, v);
        if (e.contains("p_value")) {
          g.edge_pvalues[{u, v}] = e.at("p_value").get<double>();
        }
      }
      g.validate();
    } catch (const ContractError& e) {
      throw ParseError(std::string("inconsistent causal_graph document: ") + e.what());
    }
    out.candidate_edges = j.value("candidate_edges", std::size_t{0});
    const auto& s = j.at("settings");
    out.settings.alpha = s.at("alpha").get<double>();
    out.settings.r_threshold = s.at("r_threshold").get<double>();
    out.settings.smoother_ridge = s.value("smoother_ridge", 0.0);
    return out;
  });
}

std::string to_document(const MetricsDocument& metrics) {
  json j = header("metrics");
  j["target"] = metrics.target;
  j["method"] = stats::to_string(metrics.method);
  j["mae"] = metrics.metrics.mae;
  j["rmse"] = metrics.metrics.rmse;
  j["r2"] = metrics.metrics.r2;
  j["test_fraction"] = metrics.test_fraction;
  j["seed"] = metrics.seed;
  j["train_rows"] = metrics.train_rows;
  j["test_rows"] = metrics.test_rows;
  j["note"] = metrics.note;
  return j.dump(1) + "\n";
}

MetricsDocument metrics_from_document(std::string_view text) {
  const auto j = parse(text, "metrics");
  return guarded("metrics", [&] {
    MetricsDocument out;
    out.target = j.at("target").get<std::string>();
    const auto method = stats::parse_model_kind(j.at("method").get<std::string>());
    if (!method) {
      throw ParseError("unknown model method in metrics document");
    }
    out.method = *method;
    out.metrics = {j.at("mae").get<double>(), j.at("rmse").get<double>(), j.at("r2").get<double>()};
    out.test_fraction = j.at("test_fraction").get<double>();
    out.seed = j.at("seed").get<std::uint64_t>();
    out.train_rows = j.value("train_rows", std::size_t{0});
    out.test_rows = j.value("test_rows", std::size_t{0});
    out.note = j.value("note", "");
    return out;
  });
}

std::string to_document(const stats::RegressionModel& model) {
  json j = header("regression_model");
  j["method"] = stats::to_string(model.kind);
  j["target"] = model.target;
  j["features"] = model.features;
  j["feature_count"] = model.feature_count;
  if (const auto* krr = std::get_if<stats::KernelRidgeModel>(&model.body)) {
    j["bandwidth"] = krr->bandwidth;
    j["ridge"] = krr->ridge;
    j["intercept"] = krr->intercept;
    j["coefficients"] = std::vector<double>(krr->coefficients.begin(), krr->coefficients.end());
    j["inputs"] = matrix_rows(krr->inputs);
  } else {
    json nodes = json::array();
    for (const auto& n : std::get<stats::RegressionTree>(model.body).nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value},
                       {"samples", n.samples}});
    }
    j["nodes"] = std::move(nodes);
  }
  return j.dump(1) + "\n";
}

stats::RegressionModel regression_model_from_document(std::string_view text) {
  const auto j = parse(text, "regression_model");
  return guarded("regression_model", [&] {
    stats::RegressionModel model;
    const auto kind = stats::parse_model_kind(j.at("method").get<std::string>());
    if (!kind) {
      throw ParseError("unknown regression model method");
    }
    model.kind = *kind;
    model.target = j.at("target").get<std::string>();
    model.features = j.at("features").get<std::vector<std::string>>();
    model.feature_count = j.at("feature_count").get<std::size_t>();
    if (model.kind == stats::ModelKind::kKernelRidge) {
      stats::KernelRidgeModel krr;
      krr.bandwidth = j.at("bandwidth").get<double>();
      krr.ridge = j.at("ridge").get<double>();
      krr.intercept = j.at("intercept").get<double>();
      const auto coef = j.at("coefficients").get<std::vector<double>>();
      krr.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
      krr.inputs = rows_matrix(j.at("inputs"), model.feature_count);
      if (krr.inputs.rows() != krr.coefficients.size()) {
        throw ParseError("kernel ridge coefficient count differs from training rows");
      }
      model.body = std::move(krr);
    } else {
      stats::RegressionTree tree;
      for (const auto& n : j.at("nodes")) {
        tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                              n.at("left").get<int>(), n.at("right").get<int>(),
                              n.at("value").get<double>(), n.at("samples").get<std::size_t>()});
      }
      const auto count = static_cast<int>(tree.nodes.size());
      for (const auto& n : tree.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                             n.feature >= static_cast<int>(model.feature_count))) {
          throw ParseError("regression tree node has invalid children or feature");
        }
      }
      if (tree.nodes.empty()) {
        throw ParseError("regression tree has no nodes");
      }
      model.body = std::move(tree);
    }
    return model;
  });
}

std::string summary_stats_to_csv(const std::vector<data::ColumnSummary>& stats) {
  std::string out = "variable,mean,std,min,max\n";
  for (const auto& s : stats) {
    out += fmt::format("{},{},{},{},{}\n", detail::csv_field(s.variable), s.mean, s.std_dev, s.min, s.max);
  }
  return out;
}

std::vector<data::ColumnSummary> summary_stats_from_csv(std::string_view text) {
  std::vector<data::ColumnSummary> out;
  std::size_t start = 0;
  std::size_t row = 0;
  boost::escaped_list_separator<char> sep('\x01', ',', '"');
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    boost::tokenizer<boost::escaped_list_separator<char>> tok(line, sep);
    std::vector<std::string> f(tok.begin(), tok.end());
    if (row == 1) {
      if (f.size() != 5 || f[0] != "variable") {
        throw ParseError("summary CSV header must be variable,mean,std,min,max", 1, 1);
      }
      continue;
    }
    if (f.size() != 5) {
      throw ParseError("summary CSV row needs five fields", row, f.size());
    }
    data::ColumnSummary s;
    s.variable = f[0];
    double* targets[] = {&s.mean, &s.std_dev, &s.min, &s.max};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& cell = f[k + 1];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *targets[k]);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric summary cell '" + cell + "'", row, k + 2);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace climatescope::doc
