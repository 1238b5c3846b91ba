#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lrl {

enum class Split { train, dev, test };
enum class Task { classification, multichoice };
enum class DataFormat { jsonl, tsv };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);
std::string_view to_string(Task task);
Task parse_task(std::string_view text);
DataFormat parse_format(std::string_view text);

// Ordered, unique label strings stored in normalized (lowercase, trimmed) form.
class TaskLabelSet {
 public:
  explicit TaskLabelSet(std::vector<std::string> labels);

  // The seven SIB-200 topics in their canonical order.
  static TaskLabelSet sib_topics();

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(std::string_view normalized) const;
  std::optional<std::size_t> index_of(std::string_view normalized) const;

  friend bool operator==(const TaskLabelSet&, const TaskLabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

struct LabeledExample {
  std::string id;
  std::string text_target;
  std::optional<std::string> text_english;
  std::string label;
  Split split = Split::train;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct MultiChoiceExample {
  std::string id;
  std::string passage_target;
  std::optional<std::string> passage_english;
  std::string question;
  std::array<std::string, 4> choices;
  int answer_index = 0;
  Split split = Split::train;

  friend bool operator==(const MultiChoiceExample&, const MultiChoiceExample&) = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};

struct ClassificationDataset {
  TaskLabelSet labels = TaskLabelSet::sib_topics();
  std::vector<LabeledExample> examples;

  SplitCounts split_counts() const;
  std::vector<LabeledExample> split(Split which) const;
};

struct MultiChoiceDataset {
  std::vector<MultiChoiceExample> examples;

  SplitCounts split_counts() const;
  std::vector<MultiChoiceExample> split(Split which) const;
};

using Dataset = std::variant<ClassificationDataset, MultiChoiceDataset>;

using TextPair = std::pair<std::string, std::string>;  // (target, english)

struct ParallelCorpus {
  std::string language_code;
  std::vector<TextPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

Dataset load_dataset(const std::string& path, DataFormat format, Task task,
                     const TaskLabelSet& labels = TaskLabelSet::sib_topics());

ClassificationDataset parse_classification(std::string_view content, DataFormat format,
                                           const TaskLabelSet& labels = TaskLabelSet::sib_topics());
MultiChoiceDataset parse_multichoice(std::string_view content, DataFormat format);

// Canonical JSON-lines form. Loading the output reproduces the dataset.
std::string to_jsonl(const ClassificationDataset& dataset);
std::string to_jsonl(const MultiChoiceDataset& dataset);

// Pairs every example that has an English side, in dataset order. Examples
// without one are skipped with a warning; zero pairs is an error.
ParallelCorpus make_parallel(std::span<const LabeledExample> examples, std::string language_code = {});
ParallelCorpus make_parallel(std::span<const MultiChoiceExample> examples, std::string language_code = {});

// Reads the "target ||| english" one-pair-per-line format.
ParallelCorpus parse_parallel_text(std::string_view content, std::string language_code = {});
ParallelCorpus load_parallel_text(const std::string& path, std::string language_code = {});

}  // namespace lrl
