#pragma once

#include <string>
#include <vector>

namespace lrl {

struct ScoreResult {
  double nll = 0.0;  // negative sum of token_logprobs
  std::vector<double> token_logprobs;
};

// Inference endpoint. generate() decodes greedily. Implementations must be
// safe to call from several threads at once.
class ScoringBackend {
 public:
  virtual ~ScoringBackend() = default;

  virtual std::string generate(const std::string& prompt, int max_tokens) = 0;
  // Teacher-forced log-probabilities of text.
  virtual ScoreResult score(const std::string& text) = 0;
  virtual std::string identity() const = 0;
};

}  // namespace lrl
