#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrl/aligner.hpp"
#include "lrl/backend.hpp"
#include "lrl/corpus.hpp"
#include "lrl/harness.hpp"
#include "lrl/recommender.hpp"

namespace lrl {

struct BackendConfig {
  // "mock:oracle", "mock:keyword", "mock:majority", "mock:constant:<text>",
  // "none" (tokenizer-only diagnose) or "http".
  std::string kind = "mock:oracle";
  std::string url;    // http only; falls back to $LRL_BASE_URL
  std::string model;  // http only; falls back to $LRL_MODEL
  bool chat = false;
  double timeout_seconds = 120.0;
};

// One adaptation run of the pipeline.
struct AdaptationConfig {
  Variant variant = Variant::baseline_zero;
  int k = 0;
  // Unset: few-shot variants pick the position on the dev split, the others
  // use the default placement.
  std::optional<DescriptionPosition> position;

  std::string name() const;  // e.g. "sentence_alignment-k3"
};

struct RunConfig {
  std::string language_code;
  std::string language_name;
  std::string dataset;  // path
  DataFormat format = DataFormat::jsonl;
  Task task = Task::classification;
  std::string parallel;  // optional "target ||| english" file; default is the dataset's train split
  std::string tokenizer = "bytes";
  std::string dictionary;  // optional; built by the aligner when empty
  BackendConfig backend;
  AdaptationConfig eval;  // variant for the eval subcommand
  std::vector<AdaptationConfig> adaptations;
  RetrievalMode retrieval = RetrievalMode::bm25;
  std::uint64_t seed = 0;
  std::size_t concurrency = 4;
  int max_tokens = 0;
  Split split = Split::test;
  double retry_backoff_scale = 1.0;
  AlignerOptions aligner;
  Thresholds thresholds;
  std::string output_dir = "lrl_out";

  // Relative paths are resolved against base_dir (the config file's folder).
  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = {});
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;

  // Throws ConfigError naming the first missing path or bad value. Commands
  // that only read parallel text pass need_dataset = false; commands that
  // never build prompts pass need_prompt = false.
  void validate(bool need_dataset = true, bool need_prompt = true) const;

  // SHA-256 over the canonical JSON form; identical configs hash equally.
  std::string hash() const;

  EvalOptions eval_options(const AdaptationConfig& adaptation, const Dictionary* dictionary) const;
};

// Stamp embedded in every emitted artifact.
nlohmann::json run_meta(const RunConfig& config);

// Builds the configured backend. Mock backends that answer from data use the
// dataset (the majority stub answers the train split's most frequent label).
std::shared_ptr<ScoringBackend> make_backend(const BackendConfig& cfg, const Dataset& dataset);

Dataset load_run_dataset(const RunConfig& config);

// Parallel text for diagnostics and alignment: the configured parallel file,
// else the train split's (target, english) pairs.
ParallelCorpus load_run_parallel(const RunConfig& config, const Dataset& dataset);

}  // namespace lrl
