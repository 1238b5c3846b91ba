#pragma once

#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrl/config.hpp"
#include "lrl/error.hpp"
#include "lrl/harness.hpp"
#include "lrl/recommender.hpp"
#include "lrl/stats.hpp"
#include "lrl/tokmetrics.hpp"

namespace lrl {

// A pipeline stage threw. cause holds the original exception.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message, std::exception_ptr cause)
      : Error("pipeline stage '" + stage + "' failed: " + message), stage_(std::move(stage)), cause_(cause) {}

  const std::string& stage() const noexcept { return stage_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

// Hash of an artifact's content with every "latency_ms" field removed from
// JSON and JSON-lines files; other files hash byte for byte.
std::string artifact_hash(const std::filesystem::path& file);

// JSON-lines records preceded by a {"meta": ...} header line.
std::string stamped_records(const std::vector<EvalRecord>& records, const nlohmann::json& meta);

struct PipelineResult {
  std::filesystem::path output_dir;
  nlohmann::json manifest;
  LanguageProfile profile;
  std::map<std::string, EvalReport> reports;  // keyed by run name
  std::vector<std::pair<std::string, ChiSquaredResult>> comparisons;  // adaptation vs baseline
  Recommendation recommendation;
  bool flagged = false;  // some evaluation exceeded the failure budget
};

// Stages: dictionary, diagnose, baseline, one per adaptation, compare,
// recommend. manifest.json is rewritten after every stage; on failure it
// lists the completed stages and names the failed one, then PipelineError is
// thrown. backend overrides config.backend when given.
PipelineResult run_pipeline(const RunConfig& config, std::shared_ptr<ScoringBackend> backend = nullptr);

// Evaluates one adaptation; few-shot variants without a fixed position pick
// it on the dev split first. The report's config records the selection.
EvalReport evaluate_adaptation(const RunConfig& config, const AdaptationConfig& adaptation, const Dataset& dataset,
                               const Dictionary* dictionary, ScoringBackend& backend);

// Trains the aligner on the parallel text and keeps the argmax translations.
Dictionary build_dictionary(const ParallelCorpus& corpus, const AlignerOptions& opts);

}  // namespace lrl
