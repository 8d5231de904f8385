#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climatescope/indicator_data.hpp"
#include "climatescope/random.hpp"

namespace climatescope::testing {

inline std::filesystem::path data_dir() { return CLIMATESCOPE_DATA_DIR; }
inline std::filesystem::path sample_dir() { return data_dir() / "sample"; }
inline std::filesystem::path golden_dir() { return CLIMATESCOPE_GOLDEN_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("climatescope_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::MatrixXd normal_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      x(i, j) = standard_normal(rng);
    }
  }
  return x;
}

inline std::vector<std::string> numbered_names(std::size_t d, const std::string& prefix = "X") {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

inline data::DataMatrix raw_matrix(const Eigen::MatrixXd& values) {
  return data::DataMatrix::raw(numbered_names(static_cast<std::size_t>(values.cols())), values);
}

/// The bundled indicator sample, interpolated, as one matrix.
inline data::DataMatrix sample_matrix() {
  const auto series = data::parse_worldbank_wide(read_file(sample_dir() / "worldbank_sample.csv"));
  return data::align(series, data::MissingPolicy::kLinearInterpolate);
}

}  // namespace climatescope::testing
