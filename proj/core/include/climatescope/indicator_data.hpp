#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace climatescope::data {

struct YearValue {
  int year = 0;
  std::optional<double> value;  // nullopt for a missing cell

  friend bool operator==(const YearValue&, const YearValue&) = default;
};

/// One indicator for one entity, e.g. EG.CFT.ACCS.RU.ZS for a country.
/// Years are strictly increasing.
struct IndicatorSeries {
  std::string indicator_code;
  std::string entity;
  std::vector<YearValue> year_values;

  friend bool operator==(const IndicatorSeries&, const IndicatorSeries&) = default;
};

/// Parses the wide layout: `entity,indicator_code,<year>,<year>,...`, one row
/// per (entity, indicator). Empty cells become missing values. Fields may be
/// double-quoted.
std::vector<IndicatorSeries> parse_worldbank_wide(std::string_view csv_text);

/// Inverse of parse_worldbank_wide. All series must share the same years.
std::string to_worldbank_wide(std::span<const IndicatorSeries> series);

enum class MissingPolicy { kDropIncomplete, kLinearInterpolate };

std::optional<MissingPolicy> parse_missing_policy(std::string_view text);

struct RowLabel {
  std::string entity;
  int year = 0;

  friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

/// n x d observation table without missing entries.
///
/// A raw matrix carries no column moments. A standardized matrix has every
/// column at mean 0 and population standard deviation 1 and records the
/// moments of the raw data it came from, so values can be mapped back.
class DataMatrix {
 public:
  DataMatrix() = default;

  /// Raw (unstandardized) matrix. Throws ContractError on shape mismatch,
  /// duplicate names or non-finite entries.
  static DataMatrix raw(std::vector<std::string> variable_names, Eigen::MatrixXd values,
                        std::vector<RowLabel> row_labels = {});

  /// Fully specified matrix, used when loading documents. Validates the
  /// standardization invariants when `standardized` is set.
  static DataMatrix restore(std::vector<std::string> variable_names, Eigen::MatrixXd values,
                            std::vector<double> column_means, std::vector<double> column_stds,
                            bool standardized, std::vector<RowLabel> row_labels = {});

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& variable_names() const noexcept { return names_; }
  const std::vector<double>& column_means() const noexcept { return means_; }
  const std::vector<double>& column_stds() const noexcept { return stds_; }
  const std::vector<RowLabel>& row_labels() const noexcept { return labels_; }
  bool standardized() const noexcept { return standardized_; }

  std::optional<std::size_t> index_of(std::string_view name) const;

  DataMatrix select_columns(std::span<const std::size_t> columns) const;
  DataMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  std::vector<double> means_;
  std::vector<double> stds_;
  std::vector<RowLabel> labels_;
  bool standardized_ = false;
};

/// Joins series into one row per (entity, year) and one column per indicator
/// code (first-appearance order). Throws DataError on duplicate
/// (entity, indicator) pairs or when no complete row survives the policy.
DataMatrix align(std::span<const IndicatorSeries> series,
                 MissingPolicy policy = MissingPolicy::kDropIncomplete);

/// Column-wise z-scores with the population divisor n. Idempotent: a
/// standardized input is re-centred and its recorded moments composed.
DataMatrix standardize(const DataMatrix& matrix);

/// Standardizes unless the matrix already is.
DataMatrix ensure_standardized(const DataMatrix& matrix);

struct ColumnSummary {
  std::string variable;
  double mean = 0.0;
  double std_dev = 0.0;  // population divisor
  double min = 0.0;
  double max = 0.0;
};

std::vector<ColumnSummary> summary_stats(const DataMatrix& matrix);

}  // namespace climatescope::data
