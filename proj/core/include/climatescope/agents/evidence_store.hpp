#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace climatescope::agents {

/// Text snippets keyed by id. On disk: one `<id>.txt` file per snippet.
class EvidenceStore {
 public:
  EvidenceStore() = default;

  /// Loads every *.txt file in `directory`. Throws ConfigError if the
  /// directory does not exist.
  static EvidenceStore load(const std::filesystem::path& directory);

  void add(std::string id, std::string text);

  std::optional<std::string_view> lookup(std::string_view id) const;

  /// Ids (sorted) of snippets containing at least one task keyword as a
  /// whole word, case-insensitively. Keywords are task words of four or more
  /// letters.
  std::vector<std::string> search(std::string_view task) const;

  std::size_t size() const noexcept { return snippets_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> snippets_;
};

/// Lowercased alphabetic words of length >= 4, deduplicated, in first
/// appearance order.
std::vector<std::string> task_keywords(std::string_view task);

}  // namespace climatescope::agents
