#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lrl {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredDoc {
  std::size_t doc_id;
  double score;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

// Okapi BM25 over whitespace tokens of the raw text, with the
// IDF ln(1 + (N - n + 0.5) / (n + 0.5)).
class Bm25Index {
 public:
  Bm25Index(const std::vector<std::string>& pool, Bm25Params params = {});

  std::size_t size() const noexcept { return doc_lengths_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::size_t document_frequency(std::string_view term) const;
  std::size_t term_frequency(std::size_t doc_id, std::string_view term) const;
  std::size_t doc_length(std::size_t doc_id) const { return doc_lengths_.at(doc_id); }
  double idf(std::string_view term) const;

  // Every query token counts, repeated tokens included.
  double score(std::string_view query, std::size_t doc_id) const;
  std::vector<double> score_all(std::string_view query) const;
  // Descending score, ties by ascending doc id; min(top_k, N) entries.
  std::vector<ScoredDoc> query(std::string_view query, std::size_t top_k) const;

 private:
  Bm25Params params_;
  std::vector<std::size_t> doc_lengths_;
  double avgdl_ = 0.0;
  std::unordered_map<std::string, std::size_t> df_;
  std::vector<std::unordered_map<std::string, std::size_t>> tf_;
};

// k distinct indices of [0, pool_size) drawn with a seeded 64-bit Mersenne
// Twister (std::mt19937_64) by partial Fisher-Yates; each swap index is drawn
// with rejection sampling so results are portable.
std::vector<std::size_t> sample_random(std::size_t pool_size, std::size_t k, std::uint64_t seed);

}  // namespace lrl
