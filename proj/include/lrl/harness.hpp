#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrl/backend.hpp"
#include "lrl/corpus.hpp"
#include "lrl/dictionary.hpp"
#include "lrl/promptkit.hpp"
#include "lrl/retriever.hpp"

namespace lrl {

enum class RetrievalMode { bm25, random };
std::string_view to_string(RetrievalMode m);
RetrievalMode parse_retrieval_mode(std::string_view s);

struct RetrievalConfig {
  RetrievalMode mode = RetrievalMode::bm25;
  std::uint64_t seed = 0;  // random mode draws with seed + example index
  Bm25Params bm25;
};

struct RetryPolicy {
  int max_retries = 3;
  std::vector<double> backoff_seconds = {0.5, 2.0, 8.0};
  double backoff_scale = 1.0;  // multiplies every wait; 0 disables waiting
};

struct EvalOptions {
  PromptSpec spec;
  RetrievalConfig retrieval;
  int max_tokens = 0;  // 0 picks 16 for classification, 4 for multiple choice
  std::size_t concurrency = 4;
  RetryPolicy retry;
  const Dictionary* dictionary = nullptr;  // required by word-level variants
  double flag_failure_rate = 0.01;
  Split eval_split = Split::test;
};

int default_max_tokens(Task task);

struct EvalRecord {
  std::string example_id;
  std::string prompt_sha256;
  std::string raw_output;
  std::optional<std::string> parsed_label;
  std::string gold;
  bool correct = false;
  bool failed = false;  // transport failure after retries, or rendering error
  std::string error;
  std::int64_t latency_ms = 0;
  int attempts = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::size_t n = 0;      // scored examples (total minus failed)
  std::size_t total = 0;  // examples attempted
  std::size_t correct = 0;
  std::size_t failed = 0;
  std::size_t parse_failures = 0;
  // gold -> predicted -> count; unparseable outputs are counted under "<none>"
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  double majority_vote_baseline = 0.0;
  std::string majority_label;
  bool flagged = false;  // failure rate above EvalOptions::flag_failure_rate
  nlohmann::json config;
  std::string backend;
  std::vector<EvalRecord> records;
};

// Earliest label occurrence in the lowercased output; on equal positions the
// longer label wins.
std::optional<std::string> parse_label(std::string_view raw_output, const TaskLabelSet& labels);

// First standalone letter among the first n_choices letters (case-insensitive).
std::optional<int> parse_choice(std::string_view raw_output, int n_choices = 4);

// Throws LeakageError when any pool id is also an evaluation id.
void check_no_leakage(const std::vector<std::string>& pool_ids, const std::vector<std::string>& eval_ids);

EvalReport run_classification(std::span<const LabeledExample> pool, std::span<const LabeledExample> eval,
                              const TaskLabelSet& labels, const EvalOptions& opts, ScoringBackend& backend);
EvalReport run_multichoice(std::span<const MultiChoiceExample> pool, std::span<const MultiChoiceExample> eval,
                           const EvalOptions& opts, ScoringBackend& backend);

// Pool is the train split, evaluation split from opts.eval_split.
EvalReport run_eval(const Dataset& dataset, const EvalOptions& opts, ScoringBackend& backend);

struct ExamplePrompt {
  std::string example_id;
  std::optional<RenderedPrompt> prompt;  // empty when rendering failed
  std::string error;
};

// The prompts run_eval would send, in split order, without calling a backend.
std::vector<ExamplePrompt> render_prompts(const Dataset& dataset, const EvalOptions& opts);

struct PositionChoice {
  DescriptionPosition position;
  double before_accuracy;
  double after_accuracy;
};

// Evaluates both description positions on the dev split and keeps the more
// accurate one; ties keep before_examples.
PositionChoice select_description_position(const Dataset& dataset, const EvalOptions& opts,
                                           ScoringBackend& backend);

nlohmann::json to_json(const EvalRecord& record, bool with_latency = true);
EvalRecord record_from_json(const nlohmann::json& j);
// Report without per-example records.
nlohmann::json to_json(const EvalReport& report);
std::string records_to_jsonl(const std::vector<EvalRecord>& records, bool with_latency = true);
// Skips {"meta": ...} header lines.
std::vector<EvalRecord> parse_records_jsonl(std::string_view content);

}  // namespace lrl
