#include "climatescope/indicator_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>
#include <utility>

#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include "climatescope/error.hpp"
#include "csv_field.hpp"

namespace climatescope::data {

namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line, std::size_t row) {
  // Backslash is not an escape in CSV; use a control char nobody types.
  boost::escaped_list_separator<char> sep('\x01', ',', '"');
  std::vector<std::string> fields;
  try {
    Tokenizer tok(line, sep);
    for (const auto& field : tok) {
      fields.emplace_back(trim(field));
    }
  } catch (const boost::escaped_list_error& e) {
    throw ParseError(std::string("malformed quoting: ") + e.what(), row, 0);
  }
  return fields;
}

std::optional<int> parse_year(std::string_view text) {
  if (text.size() != 4) {
    return std::nullopt;
  }
  int year = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return year;
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}


void check_finite(const Eigen::MatrixXd& values) {
  if (!values.allFinite()) {
    throw ContractError("data matrix contains missing or non-finite entries");
  }
}

void check_names(const std::vector<std::string>& names, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(names.size()) != cols) {
    throw ContractError("variable name count does not match column count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) {
      throw ContractError("empty variable name");
    }
    if (!seen.insert(name).second) {
      throw ContractError("duplicate variable name '" + name + "'");
    }
  }
}

struct Moments {
  double mean;
  double std_dev;
};

Moments column_moments(const Eigen::Ref<const Eigen::VectorXd>& column) {
  const double n = static_cast<double>(column.size());
  const double mean = column.sum() / n;
  const double ss = (column.array() - mean).square().sum();
  return {mean, std::sqrt(ss / n)};
}

bool is_degenerate(const Moments& m) {
  return m.std_dev <= 1e-12 * std::max(1.0, std::abs(m.mean));
}

}  // namespace

std::vector<IndicatorSeries> parse_worldbank_wide(std::string_view csv_text) {
  if (csv_text.starts_with("\xEF\xBB\xBF")) {
    csv_text.remove_prefix(3);
  }

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= csv_text.size()) {
    auto end = csv_text.find('\n', start);
    if (end == std::string_view::npos) {
      end = csv_text.size();
    }
    lines.emplace_back(csv_text.substr(start, end - start));
    start = end + 1;
  }

  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) {
    ++header_line;
  }
  if (header_line == lines.size()) {
    throw ParseError("empty input: no header row");
  }

  const auto header = split_fields(lines[header_line], header_line + 1);
  if (header.size() < 3) {
    throw ParseError("header needs entity, indicator-code and at least one year column",
                     header_line + 1, header.size() + 1);
  }
  if (header[0].empty() || parse_year(header[0])) {
    throw ParseError("column 1 ('" + header[0] + "') must name the entity column",
                     header_line + 1, 1);
  }
  if (header[1].empty() || parse_year(header[1])) {
    throw ParseError("missing indicator-code column: column 2 is '" + header[1] + "'",
                     header_line + 1, 2);
  }
  std::vector<int> years;
  for (std::size_t c = 2; c < header.size(); ++c) {
    const auto year = parse_year(header[c]);
    if (!year) {
      throw ParseError("column " + std::to_string(c + 1) + " ('" + header[c] +
                           "') is not a four-digit year",
                       header_line + 1, c + 1);
    }
    if (!years.empty() && *year <= years.back()) {
      throw ParseError("column " + std::to_string(c + 1) + " ('" + header[c] +
                           "') breaks strictly increasing year order",
                       header_line + 1, c + 1);
    }
    years.push_back(*year);
  }

  std::vector<IndicatorSeries> out;
  for (std::size_t l = header_line + 1; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) {
      continue;
    }
    const std::size_t row = l + 1;
    const auto fields = split_fields(lines[l], row);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row, std::min(fields.size(), header.size()) + 1);
    }
    if (fields[0].empty()) {
      throw ParseError("empty entity", row, 1);
    }
    if (fields[1].empty()) {
      throw ParseError("empty indicator code", row, 2);
    }
    IndicatorSeries series{fields[1], fields[0], {}};
    series.year_values.reserve(years.size());
    for (std::size_t c = 2; c < fields.size(); ++c) {
      YearValue yv{years[c - 2], std::nullopt};
      if (!fields[c].empty()) {
        yv.value = parse_number(fields[c]);
        if (!yv.value) {
          throw ParseError("non-numeric cell '" + fields[c] + "'", row, c + 1);
        }
      }
      series.year_values.push_back(yv);
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::string to_worldbank_wide(std::span<const IndicatorSeries> series) {
  std::vector<int> years;
  if (!series.empty()) {
    for (const auto& yv : series.front().year_values) {
      years.push_back(yv.year);
    }
  }
  std::string out = "entity,indicator_code";
  for (int y : years) {
    out += fmt::format(",{}", y);
  }
  out += '\n';
  for (const auto& s : series) {
    if (s.year_values.size() != years.size()) {
      throw ContractError("series '" + s.indicator_code + "' for '" + s.entity +
                          "' does not share the common year columns");
    }
    out += detail::csv_field(s.entity);
    out += ',';
    out += detail::csv_field(s.indicator_code);
    for (std::size_t i = 0; i < years.size(); ++i) {
      if (s.year_values[i].year != years[i]) {
        throw ContractError("series years differ from the common year columns");
      }
      out += ',';
      if (s.year_values[i].value) {
        out += fmt::format("{}", *s.year_values[i].value);
      }
    }
    out += '\n';
  }
  return out;
}

std::optional<MissingPolicy> parse_missing_policy(std::string_view text) {
  if (text == "drop" || text == "drop-incomplete") {
    return MissingPolicy::kDropIncomplete;
  }
  if (text == "interpolate" || text == "linear-interpolate") {
    return MissingPolicy::kLinearInterpolate;
  }
  return std::nullopt;
}

DataMatrix DataMatrix::raw(std::vector<std::string> variable_names, Eigen::MatrixXd values,
                           std::vector<RowLabel> row_labels) {
  return restore(std::move(variable_names), std::move(values), {}, {}, false,
                 std::move(row_labels));
}

DataMatrix DataMatrix::restore(std::vector<std::string> variable_names, Eigen::MatrixXd values,
                               std::vector<double> column_means,
                               std::vector<double> column_stds, bool standardized,
                               std::vector<RowLabel> row_labels) {
  check_names(variable_names, values.cols());
  check_finite(values);
  if (!row_labels.empty() && static_cast<Eigen::Index>(row_labels.size()) != values.rows()) {
    throw ContractError("row label count does not match row count");
  }
  if (standardized) {
    if (column_means.size() != variable_names.size() ||
        column_stds.size() != variable_names.size()) {
      throw ContractError("standardized matrix needs one mean and std per column");
    }
    for (std::size_t j = 0; j < column_stds.size(); ++j) {
      if (!(column_stds[j] > 0.0) || !std::isfinite(column_means[j])) {
        throw ContractError("recorded std of '" + variable_names[j] + "' must be positive");
      }
    }
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto m = column_moments(values.col(j));
      if (std::abs(m.mean) > 1e-9 || std::abs(m.std_dev - 1.0) > 1e-9) {
        throw ContractError("column '" + variable_names[static_cast<std::size_t>(j)] +
                            "' is flagged standardized but has mean " +
                            fmt::format("{}", m.mean) + ", std " + fmt::format("{}", m.std_dev));
      }
    }
  } else {
    column_means.clear();
    column_stds.clear();
  }
  DataMatrix m;
  m.names_ = std::move(variable_names);
  m.values_ = std::move(values);
  m.means_ = std::move(column_means);
  m.stds_ = std::move(column_stds);
  m.labels_ = std::move(row_labels);
  m.standardized_ = standardized;
  return m;
}

std::optional<std::size_t> DataMatrix::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - names_.begin());
}

DataMatrix DataMatrix::select_columns(std::span<const std::size_t> columns) const {
  DataMatrix m;
  m.values_.resize(values_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto j = columns[k];
    if (j >= cols()) {
      throw ContractError("column index out of range");
    }
    m.values_.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(j));
    m.names_.push_back(names_[j]);
    if (standardized_) {
      m.means_.push_back(means_[j]);
      m.stds_.push_back(stds_[j]);
    }
  }
  check_names(m.names_, m.values_.cols());
  m.labels_ = labels_;
  m.standardized_ = standardized_;
  return m;
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), values_.cols());
  std::vector<RowLabel> labels;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= this->rows()) {
      throw ContractError("row index out of range");
    }
    values.row(static_cast<Eigen::Index>(k)) = values_.row(static_cast<Eigen::Index>(rows[k]));
    if (!labels_.empty()) {
      labels.push_back(labels_[rows[k]]);
    }
  }
  // A row subset of a standardized matrix is no longer standardized.
  return raw(names_, std::move(values), std::move(labels));
}

DataMatrix align(std::span<const IndicatorSeries> series, MissingPolicy policy) {
  if (series.size() < 2) {
    throw ContractError("align needs at least two series");
  }

  std::vector<std::string> variables;
  std::vector<std::string> entities;
  std::map<std::string, std::size_t> var_index;
  std::map<std::string, std::size_t> entity_index;
  std::set<int> year_set;
  std::map<std::pair<std::size_t, std::size_t>, const IndicatorSeries*> by_key;

  for (const auto& s : series) {
    if (s.indicator_code.empty()) {
      throw ContractError("series with empty indicator code");
    }
    for (std::size_t i = 1; i < s.year_values.size(); ++i) {
      if (s.year_values[i].year <= s.year_values[i - 1].year) {
        throw ContractError("series '" + s.indicator_code + "' for '" + s.entity +
                            "' has non-increasing years");
      }
    }
    auto [vit, vnew] = var_index.try_emplace(s.indicator_code, variables.size());
    if (vnew) {
      variables.push_back(s.indicator_code);
    }
    auto [eit, enew] = entity_index.try_emplace(s.entity, entities.size());
    if (enew) {
      entities.push_back(s.entity);
    }
    if (!by_key.emplace(std::pair{eit->second, vit->second}, &s).second) {
      throw DataError("conflict: duplicate series for entity '" + s.entity +
                      "' and indicator '" + s.indicator_code + "'");
    }
    for (const auto& yv : s.year_values) {
      year_set.insert(yv.year);
    }
  }

  const std::vector<int> years(year_set.begin(), year_set.end());
  const std::size_t d = variables.size();
  const std::size_t t = years.size();

  std::vector<double> row_buffer;
  std::vector<RowLabel> labels;
  std::size_t kept = 0;

  for (std::size_t e = 0; e < entities.size(); ++e) {
    // grid[v][y] on the union year grid
    std::vector<std::vector<std::optional<double>>> grid(d, std::vector<std::optional<double>>(t));
    for (std::size_t v = 0; v < d; ++v) {
      const auto it = by_key.find({e, v});
      if (it == by_key.end()) {
        continue;
      }
      for (const auto& yv : it->second->year_values) {
        const auto y = static_cast<std::size_t>(
            std::lower_bound(years.begin(), years.end(), yv.year) - years.begin());
        grid[v][y] = yv.value;
      }
      if (policy == MissingPolicy::kLinearInterpolate) {
        std::optional<std::size_t> prev;
        for (std::size_t y = 0; y < t; ++y) {
          if (!grid[v][y]) {
            continue;
          }
          if (prev && y > *prev + 1) {
            const double y0 = years[*prev];
            const double y1 = years[y];
            const double v0 = *grid[v][*prev];
            const double v1 = *grid[v][y];
            for (std::size_t g = *prev + 1; g < y; ++g) {
              const double w = (years[g] - y0) / (y1 - y0);
              grid[v][g] = v0 + w * (v1 - v0);
            }
          }
          prev = y;
        }
      }
    }
    for (std::size_t y = 0; y < t; ++y) {
      bool complete = true;
      for (std::size_t v = 0; v < d && complete; ++v) {
        complete = grid[v][y].has_value();
      }
      if (!complete) {
        continue;
      }
      for (std::size_t v = 0; v < d; ++v) {
        row_buffer.push_back(*grid[v][y]);
      }
      labels.push_back({entities[e], years[y]});
      ++kept;
    }
  }

  if (kept == 0) {
    throw DataError("no complete (entity, year) rows remain after the missing-value policy");
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < kept; ++r) {
    for (std::size_t v = 0; v < d; ++v) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(v)) = row_buffer[r * d + v];
    }
  }
  return DataMatrix::raw(std::move(variables), std::move(values), std::move(labels));
}

DataMatrix standardize(const DataMatrix& matrix) {
  if (matrix.rows() == 0) {
    throw ContractError("cannot standardize an empty matrix");
  }
  Eigen::MatrixXd z = matrix.values();
  std::vector<double> means(matrix.cols());
  std::vector<double> stds(matrix.cols());
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto m = column_moments(z.col(col));
    if (is_degenerate(m)) {
      throw DegenerateColumnError(matrix.variable_names()[j]);
    }
    z.col(col) = (z.col(col).array() - m.mean) / m.std_dev;
    if (matrix.standardized()) {
      // compose with the moments already recorded
      means[j] = matrix.column_means()[j] + matrix.column_stds()[j] * m.mean;
      stds[j] = matrix.column_stds()[j] * m.std_dev;
    } else {
      means[j] = m.mean;
      stds[j] = m.std_dev;
    }
  }
  return DataMatrix::restore(matrix.variable_names(), std::move(z), std::move(means),
                             std::move(stds), true, matrix.row_labels());
}

DataMatrix ensure_standardized(const DataMatrix& matrix) {
  return matrix.standardized() ? matrix : standardize(matrix);
}

std::vector<ColumnSummary> summary_stats(const DataMatrix& matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw ContractError("summary statistics of an empty matrix");
  }
  std::vector<ColumnSummary> out;
  out.reserve(matrix.cols());
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const auto col = matrix.values().col(static_cast<Eigen::Index>(j));
    const auto m = column_moments(col);
    out.push_back({matrix.variable_names()[j], m.mean, m.std_dev, col.minCoeff(), col.maxCoeff()});
  }
  return out;
}

}  // namespace climatescope::data
