#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lrl/backend.hpp"
#include "lrl/corpus.hpp"
#include "lrl/tokenizer.hpp"

namespace lrl {

// tokens / UTF-8 bytes
double token_to_byte_ratio(std::string_view text, const Tokenizer& tok);

// tokens(english) / tokens(target) for a (target, english) pair
double tokenizer_parity(const TextPair& pair, const Tokenizer& tok);

// NLL(english) / NLL(target) for a (target, english) pair
double information_parity(const TextPair& pair, ScoringBackend& backend);

struct LanguageProfile {
  std::string language_code;
  double ip = 0.0;
  double tbr = 0.0;
  double tp = 0.0;
  std::optional<double> baseline_accuracy;
  std::size_t sample_count = 0;
  std::size_t skipped = 0;
  std::string tokenizer;
  std::string backend;
};

struct ProfileOptions {
  std::size_t threads = 4;
};

// Arithmetic means of per-pair TBR (target side), TP and IP. A pair whose
// metrics cannot be computed is skipped and counted; all pairs failing is an
// error.
LanguageProfile profile_language(const ParallelCorpus& corpus, const Tokenizer& tok, ScoringBackend& backend,
                                 const ProfileOptions& opts = {});

// Same without a backend: ip stays 0 and is serialized as null.
LanguageProfile profile_tokenizer(const ParallelCorpus& corpus, const Tokenizer& tok);

nlohmann::json to_json(const LanguageProfile& profile);
LanguageProfile profile_from_json(const nlohmann::json& j);

}  // namespace lrl
