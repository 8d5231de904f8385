#include "climatescope/agents/evidence_store.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

constexpr std::array<std::string_view, 12> kStopWords{
    "about", "between", "does", "from", "into", "over", "that", "their", "this", "what", "with", "using"};

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

std::vector<std::string> task_keywords(std::string_view task) {
  std::vector<std::string> out;
  for (auto& w : words(task)) {
    if (w.size() < 4 ||
        std::find(kStopWords.begin(), kStopWords.end(), w) != kStopWords.end() ||
        std::find(out.begin(), out.end(), w) != out.end()) {
      continue;
    }
    out.push_back(std::move(w));
  }
  return out;
}

EvidenceStore EvidenceStore::load(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw ConfigError(fmt::format("evidence directory '{}' does not exist", directory.string()));
  }
  EvidenceStore store;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") {
      continue;
    }
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    store.add(entry.path().stem().string(), text.str());
  }
  return store;
}

void EvidenceStore::add(std::string id, std::string text) {
  if (id.empty()) {
    throw ContractError("evidence id is empty");
  }
  snippets_.insert_or_assign(std::move(id), std::move(text));
}

std::optional<std::string_view> EvidenceStore::lookup(std::string_view id) const {
  if (auto it = snippets_.find(id); it != snippets_.end()) {
    return std::string_view(it->second);
  }
  return std::nullopt;
}

std::vector<std::string> EvidenceStore::search(std::string_view task) const {
  const auto keywords = task_keywords(task);
  std::vector<std::string> out;
  for (const auto& [id, text] : snippets_) {
    const auto w = words(text);
    const std::set<std::string> vocabulary(w.begin(), w.end());
    const bool hit = std::any_of(keywords.begin(), keywords.end(),
                                 [&](const std::string& k) { return vocabulary.contains(k); });
    if (hit) {
      out.push_back(id);
    }
  }
  return out;
}

}  // namespace climatescope::agents
