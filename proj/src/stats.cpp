#include "lrl/stats.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

namespace {

std::map<std::string, const EvalRecord*> index_by_id(std::span<const EvalRecord> records, const char* run) {
  std::map<std::string, const EvalRecord*> out;
  for (const auto& r : records) {
    if (!out.emplace(r.example_id, &r).second) {
      throw DataError(std::string("run ") + run + " has duplicate example id '" + r.example_id + "'");
    }
  }
  return out;
}

}  // namespace

PairedOutcome paired_outcome(std::span<const EvalRecord> a, std::span<const EvalRecord> b) {
  const auto ia = index_by_id(a, "A");
  const auto ib = index_by_id(b, "B");
  for (const auto& [id, rec] : ia) {
    if (!ib.contains(id)) throw DataError("example id '" + id + "' is in run A but not in run B");
  }
  for (const auto& [id, rec] : ib) {
    if (!ia.contains(id)) throw DataError("example id '" + id + "' is in run B but not in run A");
  }
  PairedOutcome out;
  for (const auto& [id, ra] : ia) {
    const auto* rb = ib.at(id);
    if (ra->failed || rb->failed) {
      ++out.excluded;
    } else if (ra->correct && rb->correct) {
      ++out.both_correct;
    } else if (ra->correct) {
      ++out.b;
    } else if (rb->correct) {
      ++out.c;
    } else {
      ++out.both_wrong;
    }
  }
  return out;
}

double chi2_1_survival(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

ChiSquaredResult mcnemar(std::size_t b, std::size_t c, bool continuity_correction) {
  ChiSquaredResult r;
  r.continuity_correction = continuity_correction;
  r.outcome.b = b;
  r.outcome.c = c;
  if (b + c == 0) return r;
  double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c));
  if (continuity_correction) diff -= 1.0;
  r.statistic = diff * diff / static_cast<double>(b + c);
  r.p_value = chi2_1_survival(r.statistic);
  return r;
}

ChiSquaredResult paired_chi_squared(std::span<const EvalRecord> a, std::span<const EvalRecord> b,
                                    bool continuity_correction) {
  const auto outcome = paired_outcome(a, b);
  auto r = mcnemar(outcome.b, outcome.c, continuity_correction);
  r.outcome = outcome;
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: lists differ in length");
  if (x.size() < 2) throw DataError("pearson: need at least two values");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  std::vector<double> sxy(x.size());
  std::vector<double> sxx(x.size());
  std::vector<double> syy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy[i] = (x[i] - mx) * (y[i] - my);
    sxx[i] = (x[i] - mx) * (x[i] - mx);
    syy[i] = (y[i] - my) * (y[i] - my);
  }
  const double vx = pairwise_sum(sxx);
  const double vy = pairwise_sum(syy);
  if (vx == 0.0 || vy == 0.0) throw DataError("pearson: zero variance");
  return pairwise_sum(sxy) / std::sqrt(vx * vy);
}

double point_biserial(std::span<const int> binary, std::span<const double> continuous) {
  if (binary.size() != continuous.size()) throw DataError("point_biserial: lists differ in length");
  if (binary.size() < 3) throw DataError("point_biserial: need at least three observations");
  std::vector<double> ones;
  std::vector<double> zeros;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (binary[i] == 1) {
      ones.push_back(continuous[i]);
    } else if (binary[i] == 0) {
      zeros.push_back(continuous[i]);
    } else {
      throw DataError("point_biserial: binary values must be 0 or 1");
    }
  }
  if (ones.empty() || zeros.empty()) throw DataError("point_biserial: both groups must be non-empty");
  const double n = static_cast<double>(continuous.size());
  const double mean = pairwise_sum(continuous) / n;
  std::vector<double> sq(continuous.size());
  for (std::size_t i = 0; i < continuous.size(); ++i) sq[i] = (continuous[i] - mean) * (continuous[i] - mean);
  const double sd = std::sqrt(pairwise_sum(sq) / n);
  if (sd == 0.0) throw DataError("point_biserial: continuous values have zero variance");
  const double m1 = pairwise_sum(ones) / static_cast<double>(ones.size());
  const double m0 = pairwise_sum(zeros) / static_cast<double>(zeros.size());
  const double p = static_cast<double>(ones.size()) / n;
  return (m1 - m0) / sd * std::sqrt(p * (1.0 - p));
}

bool multishot_benefit(double one_shot_accuracy, std::span<const double> multi_shot_accuracies) {
  if (multi_shot_accuracies.size() != 4) {
    throw DataError("multishot_benefit needs exactly 4 multi-shot accuracies, got " +
                    std::to_string(multi_shot_accuracies.size()));
  }
  int wins = 0;
  for (double a : multi_shot_accuracies) wins += a > one_shot_accuracy ? 1 : 0;
  return wins >= 3;
}

nlohmann::json to_json(const ChiSquaredResult& r) {
  return {{"statistic", r.statistic},
          {"p_value", r.p_value},
          {"continuity_correction", r.continuity_correction},
          {"table",
           {{"a_correct_b_wrong", r.outcome.b},
            {"a_wrong_b_correct", r.outcome.c},
            {"both_correct", r.outcome.both_correct},
            {"both_wrong", r.outcome.both_wrong}}},
          {"shared", r.outcome.shared()},
          {"excluded", r.outcome.excluded}};
}

std::string to_markdown(const ChiSquaredResult& r) {
  std::ostringstream out;
  out << "## Paired chi-squared\n\n"
      << "statistic: " << format_double(r.statistic) << "  \n"
      << "p-value: " << format_double(r.p_value) << "  \n"
      << "continuity correction: " << (r.continuity_correction ? "on" : "off") << "\n\n"
      << "| | B correct | B wrong |\n|---|---|---|\n"
      << "| A correct | " << r.outcome.both_correct << " | " << r.outcome.b << " |\n"
      << "| A wrong | " << r.outcome.c << " | " << r.outcome.both_wrong << " |\n";
  if (r.outcome.excluded) out << "\n" << r.outcome.excluded << " examples excluded (failed in either run)\n";
  return out.str();
}

}  // namespace lrl
