#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lrl/backend.hpp"
#include "lrl/corpus.hpp"

namespace lrl {

// In-process backend driven by callbacks. The callbacks must be thread-safe.
class MockBackend final : public ScoringBackend {
 public:
  using Responder = std::function<std::string(const std::string& prompt, int max_tokens)>;
  using Scorer = std::function<ScoreResult(const std::string& text)>;

  MockBackend(std::string name, Responder responder);
  MockBackend(std::string name, Responder responder, Scorer scorer);

  std::string generate(const std::string& prompt, int max_tokens) override;
  ScoreResult score(const std::string& text) override;
  std::string identity() const override { return "mock:" + name_; }

  std::size_t generate_calls() const noexcept { return generate_calls_.load(); }
  std::size_t score_calls() const noexcept { return score_calls_.load(); }

  // One pseudo-token per code point: ascii_logprob for ASCII, other_logprob
  // for everything else.
  static Scorer codepoint_scorer(double ascii_logprob = -0.7, double other_logprob = -2.9);

 private:
  std::string name_;
  Responder responder_;
  Scorer scorer_;
  std::atomic<std::size_t> generate_calls_{0};
  std::atomic<std::size_t> score_calls_{0};
};

// Answers with the value of whichever key occurs last in the prompt (latest
// end position, longer key on ties); empty output when no key occurs.
std::shared_ptr<MockBackend> make_oracle_backend(std::vector<std::pair<std::string, std::string>> keyed_answers);

// Keys every example's target text (or passage) to its gold label (or letter).
std::shared_ptr<MockBackend> make_oracle_backend(const Dataset& dataset);

std::shared_ptr<MockBackend> make_constant_backend(std::string output);

// Counts English topic keywords after the last "Text:" marker and answers
// with the best-scoring label; without any hit it picks a label by hashing
// the input. Multiple-choice prompts get a hashed letter.
std::shared_ptr<MockBackend> make_keyword_backend(const TaskLabelSet& labels = TaskLabelSet::sib_topics());

}  // namespace lrl
