#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace lrl {

struct DictionaryEntry {
  std::string english;
  double prob = 1.0;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

// Single-best target word -> English word lexicon.
struct Dictionary {
  std::map<std::string, DictionaryEntry, std::less<>> entries;
  // Number of distinct target words the dictionary was induced from.
  std::size_t vocabulary_size = 0;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
  double coverage() const noexcept {
    return vocabulary_size == 0 ? 0.0 : static_cast<double>(entries.size()) / static_cast<double>(vocabulary_size);
  }
  const DictionaryEntry* find(std::string_view target_word) const {
    auto it = entries.find(target_word);
    return it == entries.end() ? nullptr : &it->second;
  }
};

// Rows of "target<TAB>english<TAB>probability", sorted by target word.
std::string to_tsv(const Dictionary& dict);
// Accepts two-column rows too (probability 1) and skips tab-free "#" comment
// lines. vocabulary_size is set to the entry count.
Dictionary parse_dictionary_tsv(std::string_view content);
Dictionary load_dictionary(const std::string& path);

}  // namespace lrl
