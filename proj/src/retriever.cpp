#include "lrl/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

Bm25Index::Bm25Index(const std::vector<std::string>& pool, Bm25Params params) : params_(params) {
  if (pool.empty()) throw DataError("cannot build a BM25 index over an empty pool");
  if (!(params.k1 >= 0.0)) throw ConfigError("BM25 k1 must be >= 0");
  if (!(params.b >= 0.0 && params.b <= 1.0)) throw ConfigError("BM25 b must be in [0, 1]");
  doc_lengths_.reserve(pool.size());
  tf_.reserve(pool.size());
  std::size_t total = 0;
  for (const auto& doc : pool) {
    const auto tokens = split_whitespace(doc);
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) ++df_[term];
    doc_lengths_.push_back(tokens.size());
    total += tokens.size();
    tf_.push_back(std::move(tf));
  }
  if (total == 0) throw DataError("BM25 pool contains no tokens");
  avgdl_ = static_cast<double>(total) / static_cast<double>(pool.size());
}

std::size_t Bm25Index::document_frequency(std::string_view term) const {
  auto it = df_.find(std::string(term));
  return it == df_.end() ? 0 : it->second;
}

std::size_t Bm25Index::term_frequency(std::size_t doc_id, std::string_view term) const {
  const auto& tf = tf_.at(doc_id);
  auto it = tf.find(std::string(term));
  return it == tf.end() ? 0 : it->second;
}

double Bm25Index::idf(std::string_view term) const {
  const auto n = static_cast<double>(document_frequency(term));
  const auto big_n = static_cast<double>(size());
  return std::log(1.0 + (big_n - n + 0.5) / (n + 0.5));
}

double Bm25Index::score(std::string_view query, std::size_t doc_id) const {
  const auto& tf = tf_.at(doc_id);
  const double norm =
      params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(doc_lengths_[doc_id]) / avgdl_);
  double s = 0.0;
  for (const auto& q : split_whitespace(query)) {
    auto it = tf.find(q);
    if (it == tf.end()) continue;
    const auto f = static_cast<double>(it->second);
    s += idf(q) * f * (params_.k1 + 1.0) / (f + norm);
  }
  return s;
}

std::vector<double> Bm25Index::score_all(std::string_view query) const {
  std::vector<double> scores(size());
  for (std::size_t d = 0; d < size(); ++d) scores[d] = score(query, d);
  return scores;
}

std::vector<ScoredDoc> Bm25Index::query(std::string_view query, std::size_t top_k) const {
  if (top_k == 0) throw ConfigError("top_k must be >= 1");
  const auto scores = score_all(query);
  std::vector<ScoredDoc> ranked;
  ranked.reserve(scores.size());
  for (std::size_t d = 0; d < scores.size(); ++d) ranked.push_back({d, scores[d]});
  const std::size_t k = std::min(top_k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    [](const ScoredDoc& a, const ScoredDoc& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.doc_id < b.doc_id;
                    });
  ranked.resize(k);
  return ranked;
}

namespace {

std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& engine) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

std::vector<std::size_t> sample_random(std::size_t pool_size, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ConfigError("sample size must be >= 1");
  if (k > pool_size) {
    throw ConfigError("cannot sample " + std::to_string(k) + " items from a pool of " + std::to_string(pool_size));
  }
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> ids(pool_size);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(pool_size - i, engine));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return ids;
}

}  // namespace lrl
