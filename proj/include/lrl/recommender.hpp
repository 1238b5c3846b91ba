#pragma once

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lrl/tokmetrics.hpp"

namespace lrl {

enum class Category { extremely_under_represented, limited_capability, moderate_capability };
enum class Strategy { zero_shot_align, few_shot, peft };
enum class DataInvestment { parallel_translation, translation_or_annotation_cost_comparison, annotation };

std::string_view to_string(Category c);
std::string_view to_string(Strategy s);
std::string_view to_string(DataInvestment d);
Category parse_category(std::string_view s);

struct Thresholds {
  double baseline_low = 0.2;    // below: candidate for the extremely under-represented category
  double baseline_high = 0.45;  // at or below: limited capability
  double tbr_high = 0.95;       // above: tokenizer falls back to bytes
  double ip_low = 0.20;         // below: model barely represents the language
};

// Reads any subset of {baseline_low, baseline_high, tbr_high, ip_low};
// unknown keys are a ConfigError.
Thresholds thresholds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Thresholds& t);

struct StrategyRanking {
  Category category;
  std::array<Strategy, 3> ranking;
  std::string rationale;
  DataInvestment data_investment;
};

// Throws ConfigError when the profile lacks a baseline accuracy or an
// information parity measurement.
Category categorize(const LanguageProfile& profile, const Thresholds& thresholds = {});

StrategyRanking rank_strategies(Category category);

// Ordering with its relations, e.g. "PEFT > zero-shot >= few-shot".
std::string ranking_notation(Category category);

std::string explain(const LanguageProfile& profile, const StrategyRanking& ranking,
                    const Thresholds& thresholds = {});

struct Recommendation {
  StrategyRanking ranking;
  std::string explanation;
  Thresholds thresholds;
};

Recommendation recommend(const LanguageProfile& profile, const Thresholds& thresholds = {});

nlohmann::json to_json(const Recommendation& r);

// Category table with the measured profile's row marked.
std::string to_markdown(const Recommendation& r, const LanguageProfile& profile);

}  // namespace lrl
