#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrl/corpus.hpp"
#include "lrl/dictionary.hpp"

namespace lrl {

struct AlignerOptions {
  int iterations = 5;
  double initial_tension = 4.0;
  bool optimize_tension = true;
  bool favor_diagonal = true;
  double null_prob = 0.08;
  double alpha = 0.01;  // additive smoothing on the translation table
  std::size_t threads = 0;  // 0 = hardware concurrency, capped at 8
  std::size_t max_sentence_length = 200;
};

class Vocabulary {
 public:
  int add(std::string_view word);
  int find(std::string_view word) const;  // -1 when absent
  const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// IBM Model 2 with fast_align's diagonal distortion, generating English
// words from target-language words: t(e|f).
struct AlignmentModel {
  struct Row {
    std::unordered_map<int, double> probs;
    double floor = 0.0;  // probability of every English word not in probs
  };

  Vocabulary target_vocab;
  Vocabulary english_vocab;
  std::vector<Row> rows;  // rows[0] is the null word, rows[f + 1] target word f
  double tension = 4.0;
  double null_prob = 0.08;
  double alpha = 0.01;
  bool favor_diagonal = true;

  // objective = log-likelihood + alpha * sum of log t over the full table;
  // element k is measured with the parameters after k updates.
  std::vector<double> objective_history;
  std::vector<double> log_likelihood_history;
  std::vector<double> tension_history;

  bool empty() const noexcept { return rows.empty(); }

  // t(e|f) by id; f = -1 is the null word. Out-of-vocabulary ids (f < -1,
  // e < 0) get the uniform 1/|E|.
  double prob(int f, int e) const;
  // t(e|f) by string; an empty target word means null.
  double translation_prob(std::string_view target_word, std::string_view english_word) const;
  // Sum of t(.|f) over the English vocabulary; f = -1 is the null row.
  double row_sum(int f) const;
  // delta(i | j, m, n) for target position i in 0..m (0 = null) and English
  // position j in 1..n.
  double distortion(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const;
};

struct AlignmentLink {
  std::size_t target_index;   // position in the target-language sentence
  std::size_t english_index;  // position in the English sentence

  friend auto operator<=>(const AlignmentLink&, const AlignmentLink&) = default;
};

struct SentenceAlignment {
  std::vector<AlignmentLink> links;  // sorted by english_index
};

AlignmentModel train_aligner(const ParallelCorpus& corpus, const AlignerOptions& opts = {});

// Posterior link probabilities for one pair: result[j][i], j over English
// positions, i over 0..m with 0 the null word.
std::vector<std::vector<double>> alignment_posteriors(const AlignmentModel& model, const TextPair& pair);

SentenceAlignment viterbi_align(const AlignmentModel& model, const TextPair& pair);

// Argmax of t(e|f) per target word; ties go to the lexicographically smallest
// English word. Target words never linked by Viterbi decoding over the corpus
// are left out but still count toward the vocabulary size.
Dictionary extract_dictionary(const AlignmentModel& model, const ParallelCorpus& corpus);

// "i-j" links, target index first, ordered by English index.
std::string pharaoh_format(const SentenceAlignment& alignment);

// Sorted "target<TAB>english<TAB>prob" rows for every stored entry.
std::string serialize_ttable(const AlignmentModel& model);

}  // namespace lrl
