#include "lrl/corpus.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "lrl/error.hpp"
#include "lrl/log.hpp"
#include "lrl/text.hpp"

namespace lrl {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  const std::string s = normalize_label(text);
  if (s == "train") return Split::train;
  if (s == "dev" || s == "validation" || s == "valid") return Split::dev;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + std::string(text) + "'");
}

std::string_view to_string(Task task) {
  return task == Task::classification ? "classification" : "multichoice";
}

Task parse_task(std::string_view text) {
  if (text == "classification") return Task::classification;
  if (text == "multichoice") return Task::multichoice;
  throw ConfigError("unknown task '" + std::string(text) + "'");
}

DataFormat parse_format(std::string_view text) {
  if (text == "jsonl") return DataFormat::jsonl;
  if (text == "tsv") return DataFormat::tsv;
  throw ConfigError("unknown data format '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// TaskLabelSet

TaskLabelSet::TaskLabelSet(std::vector<std::string> labels) {
  if (labels.empty()) throw ConfigError("label set is empty");
  for (auto& l : labels) {
    std::string norm = normalize_label(l);
    if (norm.empty()) throw ConfigError("label set contains an empty label");
    if (std::find(labels_.begin(), labels_.end(), norm) != labels_.end()) {
      throw ConfigError("duplicate label '" + norm + "'");
    }
    labels_.push_back(std::move(norm));
  }
}

TaskLabelSet TaskLabelSet::sib_topics() {
  return TaskLabelSet({"science/technology", "travel", "politics", "sports", "health", "entertainment",
                       "geography"});
}

bool TaskLabelSet::contains(std::string_view normalized) const { return index_of(normalized).has_value(); }

std::optional<std::size_t> TaskLabelSet::index_of(std::string_view normalized) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == normalized) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

template <typename Example>
SplitCounts count_splits(const std::vector<Example>& examples) {
  SplitCounts c;
  for (const auto& e : examples) {
    switch (e.split) {
      case Split::train: ++c.train; break;
      case Split::dev: ++c.dev; break;
      case Split::test: ++c.test; break;
    }
  }
  return c;
}

template <typename Example>
std::vector<Example> filter_split(const std::vector<Example>& examples, Split which) {
  std::vector<Example> out;
  for (const auto& e : examples) {
    if (e.split == which) out.push_back(e);
  }
  return out;
}

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

void check_encoding(std::string_view content) {
  if (starts_with_bom(content)) {
    throw DataError("input starts with a UTF-8 byte order mark; save the file as UTF-8 without BOM");
  }
  if (!is_valid_utf8(content)) throw DataError("input is not valid UTF-8");
}

// Splits into lines, keeping 1-based line numbers and dropping blank lines.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view content) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    std::string_view line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) out.emplace_back(line_no, line);
    if (end == content.size()) break;
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      cells.emplace_back(line.substr(pos));
      break;
    }
    cells.emplace_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return cells;
}

// Generic row view over either a JSON object or a TSV row with a header.
class Row {
 public:
  virtual ~Row() = default;
  virtual std::optional<std::string> get_string(const char* key) const = 0;
  virtual std::optional<json> get_json(const char* key) const = 0;

  std::string require(const char* key) const {
    auto v = get_string(key);
    if (!v) throw DataError(std::string("missing required field '") + key + "'");
    return *v;
  }
};

class JsonRow final : public Row {
 public:
  explicit JsonRow(const json& obj) : obj_(obj) {}

  std::optional<std::string> get_string(const char* key) const override {
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw DataError(std::string("field '") + key + "' must be a string");
  }
  std::optional<json> get_json(const char* key) const override {
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    return *it;
  }

 private:
  const json& obj_;
};

class TsvRow final : public Row {
 public:
  TsvRow(const std::map<std::string, std::size_t>& header, std::vector<std::string> cells)
      : header_(header), cells_(std::move(cells)) {}

  std::optional<std::string> get_string(const char* key) const override {
    auto it = header_.find(key);
    if (it == header_.end()) return std::nullopt;
    if (it->second >= cells_.size()) return std::nullopt;
    return cells_[it->second];
  }
  std::optional<json> get_json(const char* key) const override {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    return json(*s);
  }

 private:
  const std::map<std::string, std::size_t>& header_;
  std::vector<std::string> cells_;
};

template <typename Fn>
void for_each_row(std::string_view content, DataFormat format, const std::vector<const char*>& required_tsv,
                  Fn&& fn) {
  check_encoding(content);
  const auto lines = content_lines(content);
  if (format == DataFormat::jsonl) {
    for (const auto& [line_no, line] : lines) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
      }
      if (!obj.is_object()) throw DataError(line_prefix(line_no) + "expected a JSON object");
      try {
        fn(line_no, JsonRow(obj));
      } catch (const DataError& e) {
        throw DataError(line_prefix(line_no) + e.what());
      }
    }
    return;
  }
  if (lines.empty()) return;
  std::map<std::string, std::size_t> header;
  {
    const auto cells = split_tabs(lines.front().second);
    for (std::size_t i = 0; i < cells.size(); ++i) header[std::string(trim(cells[i]))] = i;
    for (const char* col : required_tsv) {
      if (!header.contains(col)) {
        throw DataError(line_prefix(lines.front().first) + "TSV header lacks required column '" + col + "'");
      }
    }
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [line_no, line] = lines[k];
    auto cells = split_tabs(line);
    if (cells.size() != header.size()) {
      throw DataError(line_prefix(line_no) + "expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    }
    try {
      fn(line_no, TsvRow(header, std::move(cells)));
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
  }
}

std::optional<std::string> optional_text(const Row& row, const char* key) {
  auto v = row.get_string(key);
  if (!v || v->empty()) return std::nullopt;
  return v;
}

}  // namespace

SplitCounts ClassificationDataset::split_counts() const { return count_splits(examples); }
std::vector<LabeledExample> ClassificationDataset::split(Split which) const { return filter_split(examples, which); }
SplitCounts MultiChoiceDataset::split_counts() const { return count_splits(examples); }
std::vector<MultiChoiceExample> MultiChoiceDataset::split(Split which) const {
  return filter_split(examples, which);
}

ClassificationDataset parse_classification(std::string_view content, DataFormat format, const TaskLabelSet& labels) {
  ClassificationDataset ds{labels, {}};
  std::unordered_set<std::string> seen;
  for_each_row(content, format, {"id", "text", "label", "split"}, [&](std::size_t, const Row& row) {
    LabeledExample ex;
    ex.id = row.require("id");
    if (ex.id.empty()) throw DataError("empty id");
    ex.text_target = row.require("text");
    if (trim(ex.text_target).empty()) throw DataError("empty target text for id '" + ex.id + "'");
    ex.text_english = optional_text(row, "text_en");
    const std::string raw_label = row.require("label");
    ex.label = normalize_label(raw_label);
    if (!labels.contains(ex.label)) throw DataError("unknown label '" + raw_label + "' for id '" + ex.id + "'");
    ex.split = parse_split(row.require("split"));
    if (!seen.insert(ex.id).second) throw DataError("duplicate id '" + ex.id + "'");
    ds.examples.push_back(std::move(ex));
  });
  if (ds.examples.empty()) throw DataError("no examples");
  return ds;
}

MultiChoiceDataset parse_multichoice(std::string_view content, DataFormat format) {
  MultiChoiceDataset ds;
  std::unordered_set<std::string> seen;
  const std::vector<const char*> required = {"id",      "passage", "question", "choice1", "choice2",
                                             "choice3", "choice4", "answer",   "split"};
  for_each_row(content, format, required, [&](std::size_t, const Row& row) {
    MultiChoiceExample ex;
    ex.id = row.require("id");
    if (ex.id.empty()) throw DataError("empty id");
    ex.passage_target = row.require("passage");
    if (trim(ex.passage_target).empty()) throw DataError("empty passage for id '" + ex.id + "'");
    ex.passage_english = optional_text(row, "passage_en");
    ex.question = row.require("question");
    if (auto choices = row.get_json("choices"); choices && choices->is_array()) {
      if (choices->size() != 4) {
        throw DataError("expected exactly 4 choices for id '" + ex.id + "', found " + std::to_string(choices->size()));
      }
      for (std::size_t i = 0; i < 4; ++i) ex.choices[i] = (*choices)[i].get<std::string>();
    } else {
      for (std::size_t i = 0; i < 4; ++i) {
        const std::string key = "choice" + std::to_string(i + 1);
        auto v = row.get_string(key.c_str());
        if (!v) throw DataError("expected exactly 4 choices for id '" + ex.id + "'");
        ex.choices[i] = *v;
      }
    }
    for (const auto& c : ex.choices) {
      if (trim(c).empty()) throw DataError("empty choice for id '" + ex.id + "'");
    }
    const std::string answer = row.require("answer");
    if (answer.size() != 1 || answer[0] < '0' || answer[0] > '3') {
      throw DataError("answer must be an integer in 0..3 for id '" + ex.id + "'");
    }
    ex.answer_index = answer[0] - '0';
    ex.split = parse_split(row.require("split"));
    if (!seen.insert(ex.id).second) throw DataError("duplicate id '" + ex.id + "'");
    ds.examples.push_back(std::move(ex));
  });
  if (ds.examples.empty()) throw DataError("no examples");
  return ds;
}

Dataset load_dataset(const std::string& path, DataFormat format, Task task, const TaskLabelSet& labels) {
  const std::string content = read_file(path);
  try {
    if (task == Task::classification) return parse_classification(content, format, labels);
    return parse_multichoice(content, format);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string to_jsonl(const ClassificationDataset& dataset) {
  std::string out;
  for (const auto& ex : dataset.examples) {
    json obj = json::object();
    obj["id"] = ex.id;
    obj["text"] = ex.text_target;
    obj["text_en"] = ex.text_english ? json(*ex.text_english) : json(nullptr);
    obj["label"] = ex.label;
    obj["split"] = std::string(to_string(ex.split));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string to_jsonl(const MultiChoiceDataset& dataset) {
  std::string out;
  for (const auto& ex : dataset.examples) {
    json obj = json::object();
    obj["id"] = ex.id;
    obj["passage"] = ex.passage_target;
    obj["passage_en"] = ex.passage_english ? json(*ex.passage_english) : json(nullptr);
    obj["question"] = ex.question;
    obj["choices"] = ex.choices;
    obj["answer"] = ex.answer_index;
    obj["split"] = std::string(to_string(ex.split));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

namespace {

template <typename Example, typename Target, typename English>
ParallelCorpus make_parallel_impl(std::span<const Example> examples, std::string language_code, Target target,
                                  English english) {
  ParallelCorpus corpus{std::move(language_code), {}};
  std::size_t missing = 0;
  for (const auto& ex : examples) {
    const auto& en = english(ex);
    if (!en || trim(*en).empty()) {
      ++missing;
      continue;
    }
    corpus.pairs.emplace_back(target(ex), *en);
  }
  if (corpus.pairs.empty()) throw DataError("no parallel pairs: none of the examples has an English side");
  if (missing > 0) {
    log::warn("make_parallel: skipped " + std::to_string(missing) + " of " + std::to_string(examples.size()) +
              " examples without an English side");
  }
  return corpus;
}

}  // namespace

ParallelCorpus make_parallel(std::span<const LabeledExample> examples, std::string language_code) {
  return make_parallel_impl(
      examples, std::move(language_code), [](const LabeledExample& e) { return e.text_target; },
      [](const LabeledExample& e) -> const std::optional<std::string>& { return e.text_english; });
}

ParallelCorpus make_parallel(std::span<const MultiChoiceExample> examples, std::string language_code) {
  return make_parallel_impl(
      examples, std::move(language_code), [](const MultiChoiceExample& e) { return e.passage_target; },
      [](const MultiChoiceExample& e) -> const std::optional<std::string>& { return e.passage_english; });
}

ParallelCorpus parse_parallel_text(std::string_view content, std::string language_code) {
  check_encoding(content);
  ParallelCorpus corpus{std::move(language_code), {}};
  for (const auto& [line_no, line] : content_lines(content)) {
    const std::size_t sep = line.find("|||");
    if (sep == std::string_view::npos) throw DataError(line_prefix(line_no) + "missing '|||' separator");
    const auto tgt = trim(line.substr(0, sep));
    const auto eng = trim(line.substr(sep + 3));
    if (tgt.empty() || eng.empty()) throw DataError(line_prefix(line_no) + "empty side in parallel pair");
    corpus.pairs.emplace_back(std::string(tgt), std::string(eng));
  }
  if (corpus.pairs.empty()) throw DataError("no parallel pairs");
  return corpus;
}

ParallelCorpus load_parallel_text(const std::string& path, std::string language_code) {
  try {
    return parse_parallel_text(read_file(path), std::move(language_code));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace lrl
