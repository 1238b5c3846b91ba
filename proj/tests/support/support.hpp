#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrl/aligner.hpp"
#include "lrl/corpus.hpp"

namespace lrl::test {

// Absolute path of a file under tests/.
std::string data_path(const std::string& relative);
nlohmann::json load_json(const std::string& relative);

// Fresh empty directory under the system temp dir.
std::string temp_dir(const std::string& name);

// Corpus drawn from a known IBM Model 2: every target word type has one
// dominant English translation, English words follow target order, and
// null-only function words are inserted at random.
struct SyntheticCorpus {
  ParallelCorpus corpus;
  std::vector<std::vector<AlignmentLink>> truth;  // per sentence, content links only
  std::vector<std::pair<std::string, std::string>> lexicon;  // (target, dominant english)
};
SyntheticCorpus make_model2_corpus(std::uint64_t seed, std::size_t sentences = 500, std::size_t word_types = 20,
                                   double dominant_prob = 0.98);

// Posterior P(a_j = i | e, f) by summing over every alignment vector, with
// the diagonal prior written out from its definition. result[j][i], i = 0
// is null.
std::vector<std::vector<double>> brute_force_posteriors(const AlignmentModel& model, const TextPair& pair);

// Okapi BM25 written out term by term from the formula.
double bm25_reference(const std::vector<std::string>& docs, const std::string& query, std::size_t doc, double k1,
                      double b);

// Pearson correlation from raw sums.
double pearson_reference(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lrl::test
