#include "lrl/dictionary.hpp"

#include <charconv>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

std::string to_tsv(const Dictionary& dict) {
  std::string out;
  for (const auto& [target, entry] : dict.entries) {
    out += target;
    out += '\t';
    out += entry.english;
    out += '\t';
    out += format_double(entry.prob);
    out += '\n';
  }
  return out;
}

Dictionary parse_dictionary_tsv(std::string_view content) {
  Dictionary dict;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto t1 = line.find('\t');
    if (line.front() == '#' && t1 == std::string_view::npos) continue;
    if (t1 == std::string_view::npos) {
      throw DataError("dictionary line " + std::to_string(line_no) + ": expected target<TAB>english[<TAB>prob]");
    }
    const auto target = line.substr(0, t1);
    auto rest = line.substr(t1 + 1);
    const auto t2 = rest.find('\t');
    const auto english = rest.substr(0, t2);
    double prob = 1.0;
    if (t2 != std::string_view::npos) {
      const auto p = trim(rest.substr(t2 + 1));
      auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), prob);
      if (ec != std::errc{} || ptr != p.data() + p.size() || !(prob > 0.0) || prob > 1.0) {
        throw DataError("dictionary line " + std::to_string(line_no) + ": probability must be in (0, 1]");
      }
    }
    if (target.empty() || english.empty()) {
      throw DataError("dictionary line " + std::to_string(line_no) + ": empty word");
    }
    if (!dict.entries.emplace(std::string(target), DictionaryEntry{std::string(english), prob}).second) {
      throw DataError("dictionary line " + std::to_string(line_no) + ": duplicate entry '" + std::string(target) +
                      "'");
    }
  }
  dict.vocabulary_size = dict.entries.size();
  return dict;
}

Dictionary load_dictionary(const std::string& path) {
  try {
    return parse_dictionary_tsv(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace lrl
