#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrl/harness.hpp"

namespace lrl {

// Discordance table of two runs over the same examples. b counts examples
// run A got right and run B got wrong; c the reverse.
struct PairedOutcome {
  std::size_t b = 0;
  std::size_t c = 0;
  std::size_t both_correct = 0;
  std::size_t both_wrong = 0;
  std::size_t excluded = 0;  // examples failed in either run

  std::size_t shared() const noexcept { return b + c + both_correct + both_wrong; }
};

struct ChiSquaredResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool continuity_correction = true;
  PairedOutcome outcome;
};

// Pairs records by example id. Throws DataError unless both runs cover the
// same ids exactly once.
PairedOutcome paired_outcome(std::span<const EvalRecord> a, std::span<const EvalRecord> b);

// McNemar statistic from discordant counts; b + c == 0 gives (0, 1).
ChiSquaredResult mcnemar(std::size_t b, std::size_t c, bool continuity_correction = true);

ChiSquaredResult paired_chi_squared(std::span<const EvalRecord> a, std::span<const EvalRecord> b,
                                    bool continuity_correction = true);

// Upper tail of the chi-squared distribution with one degree of freedom.
double chi2_1_survival(double x);

// Uses the population standard deviation, so the result equals the Pearson
// correlation of the two lists.
double point_biserial(std::span<const int> binary, std::span<const double> continuous);

double pearson(std::span<const double> x, std::span<const double> y);

// True when at least three of the four multi-shot accuracies strictly exceed
// the one-shot accuracy.
bool multishot_benefit(double one_shot_accuracy, std::span<const double> multi_shot_accuracies);

nlohmann::json to_json(const ChiSquaredResult& r);
std::string to_markdown(const ChiSquaredResult& r);

}  // namespace lrl
