#pragma once

#include <string>

#include "lrl/backend.hpp"

namespace lrl {

struct HttpBackendOptions {
  std::string base_url;  // OpenAI-compatible root, e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key;  // falls back to $LRL_API_KEY, then $OPENAI_API_KEY
  bool chat = false;    // generate through /chat/completions instead of /completions
  double timeout_seconds = 120.0;
  // Some servers refuse max_tokens = 0 for echo scoring; generated tokens are
  // dropped by text offset either way.
  int score_max_tokens = 0;
};

// Greedy generation via /completions or /chat/completions; scoring via
// /completions with echo=true and logprobs so the prompt's own token
// log-probabilities come back.
class HttpBackend final : public ScoringBackend {
 public:
  explicit HttpBackend(HttpBackendOptions opts);

  std::string generate(const std::string& prompt, int max_tokens) override;
  ScoreResult score(const std::string& text) override;
  std::string identity() const override;

 private:
  std::string post(const std::string& endpoint, const std::string& body, std::string& request_id) const;

  HttpBackendOptions opts_;
  std::string origin_;
  std::string path_prefix_;
};

}  // namespace lrl
