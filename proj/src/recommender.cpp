#include "lrl/recommender.hpp"

#include <sstream>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::extremely_under_represented: return "extremely_under_represented";
    case Category::limited_capability: return "limited_capability";
    case Category::moderate_capability: return "moderate_capability";
  }
  return "?";
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::zero_shot_align: return "zero_shot_align";
    case Strategy::few_shot: return "few_shot";
    case Strategy::peft: return "peft";
  }
  return "?";
}

std::string_view to_string(DataInvestment d) {
  switch (d) {
    case DataInvestment::parallel_translation: return "parallel_translation";
    case DataInvestment::translation_or_annotation_cost_comparison: return "translation_or_annotation_cost_comparison";
    case DataInvestment::annotation: return "annotation";
  }
  return "?";
}

Category parse_category(std::string_view s) {
  for (auto c : {Category::extremely_under_represented, Category::limited_capability, Category::moderate_capability}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown category '" + std::string(s) + "'");
}

Thresholds thresholds_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("thresholds must be a JSON object");
  Thresholds t;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("threshold '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "baseline_low") {
      t.baseline_low = v;
    } else if (key == "baseline_high") {
      t.baseline_high = v;
    } else if (key == "tbr_high") {
      t.tbr_high = v;
    } else if (key == "ip_low") {
      t.ip_low = v;
    } else {
      throw ConfigError("unknown threshold '" + key + "'");
    }
  }
  if (t.baseline_low > t.baseline_high) throw ConfigError("baseline_low must not exceed baseline_high");
  return t;
}

nlohmann::json to_json(const Thresholds& t) {
  return {{"baseline_low", t.baseline_low},
          {"baseline_high", t.baseline_high},
          {"tbr_high", t.tbr_high},
          {"ip_low", t.ip_low}};
}

Category categorize(const LanguageProfile& profile, const Thresholds& t) {
  if (!profile.baseline_accuracy) {
    throw ConfigError("profile for '" + profile.language_code +
                      "' has no baseline_accuracy; run a zero-shot baseline eval first (eval --variant baseline_zero) "
                      "and set it on the profile");
  }
  if (profile.ip <= 0.0) {
    throw ConfigError("profile for '" + profile.language_code +
                      "' has no information parity; run diagnose with a scoring backend");
  }
  const double base = *profile.baseline_accuracy;
  if (base < t.baseline_low && profile.tbr > t.tbr_high && profile.ip < t.ip_low) {
    return Category::extremely_under_represented;
  }
  if (base <= t.baseline_high) return Category::limited_capability;
  return Category::moderate_capability;
}

StrategyRanking rank_strategies(Category category) {
  switch (category) {
    case Category::extremely_under_represented:
      return {category,
              {Strategy::zero_shot_align, Strategy::few_shot, Strategy::peft},
              "Script and language are both barely represented: byte-level tokenization and low information "
              "parity. Fine-tuning on a small sample does not help here, while zero-shot prompts carrying "
              "parallel sentences or word glosses do.",
              DataInvestment::parallel_translation};
    case Category::limited_capability:
      return {category,
              {Strategy::peft, Strategy::zero_shot_align, Strategy::few_shot},
              "The model has some grip on the language but low baseline accuracy. Parameter-efficient "
              "fine-tuning is the strongest option; alignment prompts match or beat labelled few-shot "
              "demonstrations.",
              DataInvestment::translation_or_annotation_cost_comparison};
    case Category::moderate_capability:
      return {category,
              {Strategy::peft, Strategy::few_shot, Strategy::zero_shot_align},
              "The model already handles the language reasonably well. Parameter-efficient fine-tuning leads, "
              "and labelled few-shot demonstrations beat alignment-only prompts.",
              DataInvestment::annotation};
  }
  throw ConfigError("unknown category");
}

std::string ranking_notation(Category category) {
  switch (category) {
    case Category::extremely_under_represented: return "zero-shot > few-shot > PEFT";
    case Category::limited_capability: return "PEFT > zero-shot >= few-shot";
    case Category::moderate_capability: return "PEFT > few-shot > zero-shot";
  }
  return "?";
}

namespace {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::zero_shot_align: return "zero-shot ICL with alignment";
    case Strategy::few_shot: return "few-shot ICL";
    case Strategy::peft: return "PEFT";
  }
  return "?";
}

std::string investment_advice(DataInvestment d) {
  switch (d) {
    case DataInvestment::parallel_translation:
      return "Spend the budget on human translation of a small in-domain parallel set to feed alignment prompts.";
    case DataInvestment::translation_or_annotation_cost_comparison:
      return "Compare the cost of human translation (for alignment prompts) against human annotation (for "
             "fine-tuning) before committing.";
    case DataInvestment::annotation:
      return "Budget for human annotation; weigh how much labelled data fine-tuning needs against the higher "
             "inference cost of few-shot prompting.";
  }
  return {};
}

}  // namespace

std::string explain(const LanguageProfile& profile, const StrategyRanking& ranking, const Thresholds& t) {
  const double base = profile.baseline_accuracy.value_or(0.0);
  const std::string lang = profile.language_code.empty() ? "the target language" : profile.language_code;
  std::ostringstream out;
  out << "Language: " << lang << "\n";
  out << "Measured: baseline accuracy " << format_double(base) << ", TBR " << format_double(profile.tbr)
      << ", IP " << format_double(profile.ip) << ", TP " << format_double(profile.tp) << "\n";
  out << "Thresholds: baseline " << format_double(t.baseline_low) << " / " << format_double(t.baseline_high)
      << ", TBR > " << format_double(t.tbr_high) << ", IP < " << format_double(t.ip_low) << "\n";
  out << "Checks: baseline " << (base < t.baseline_low ? "<" : ">=") << " " << format_double(t.baseline_low)
      << "; baseline " << (base <= t.baseline_high ? "<=" : ">") << " " << format_double(t.baseline_high)
      << "; TBR " << (profile.tbr > t.tbr_high ? ">" : "<=") << " " << format_double(t.tbr_high) << "; IP "
      << (profile.ip < t.ip_low ? "<" : ">=") << " " << format_double(t.ip_low) << "\n";
  out << "Category: " << to_string(ranking.category) << "\n";
  out << "Ranking: ";
  for (std::size_t i = 0; i < ranking.ranking.size(); ++i) out << (i ? " > " : "") << strategy_name(ranking.ranking[i]);
  out << " (" << ranking_notation(ranking.category) << ")\n";
  out << ranking.rationale << "\n";
  if (ranking.category == Category::extremely_under_represented) {
    out << "Recommendation: avoid fine-tuning a multilingual model on this language; its script is effectively "
           "unseen by the tokenizer.\n";
    out << "Caveat: with capability this low, putting labelled examples in the prompt may be useless; prefer "
           "unlabelled parallel sentences or word glosses.\n";
  } else if (ranking.category == Category::limited_capability) {
    out << "Caveat: few-shot gains over alignment prompts, where they occur, tend to be small and can reverse.\n";
  }
  out << "Data investment: " << investment_advice(ranking.data_investment) << "\n";
  out << "TBR and IP cutoffs are interpolated defaults, not published values; override them with --thresholds.\n";
  return out.str();
}

Recommendation recommend(const LanguageProfile& profile, const Thresholds& thresholds) {
  Recommendation r{rank_strategies(categorize(profile, thresholds)), {}, thresholds};
  r.explanation = explain(profile, r.ranking, thresholds);
  return r;
}

nlohmann::json to_json(const Recommendation& r) {
  nlohmann::json ranking = nlohmann::json::array();
  for (auto s : r.ranking.ranking) ranking.push_back(std::string(to_string(s)));
  return {{"category", std::string(to_string(r.ranking.category))},
          {"ranking", ranking},
          {"ranking_notation", ranking_notation(r.ranking.category)},
          {"investment", std::string(to_string(r.ranking.data_investment))},
          {"rationale", r.ranking.rationale},
          {"explanation", r.explanation},
          {"thresholds", to_json(r.thresholds)},
          {"meta", {{"tbr_ip_cutoffs", "interpolated defaults, user-overridable"}}}};
}

std::string to_markdown(const Recommendation& r, const LanguageProfile& profile) {
  std::ostringstream out;
  out << "## Recommendation for " << (profile.language_code.empty() ? "target language" : profile.language_code)
      << "\n\n";
  out << "| Category | Condition | Ranking | Data investment | |\n|---|---|---|---|---|\n";
  const auto& t = r.thresholds;
  const std::array<std::pair<Category, std::string>, 3> rows = {{
      {Category::extremely_under_represented,
       "baseline < " + format_double(t.baseline_low) + ", TBR > " + format_double(t.tbr_high) + ", IP < " +
           format_double(t.ip_low)},
      {Category::limited_capability, "baseline <= " + format_double(t.baseline_high)},
      {Category::moderate_capability, "baseline > " + format_double(t.baseline_high)},
  }};
  for (const auto& [cat, cond] : rows) {
    out << "| " << to_string(cat) << " | " << cond << " | " << ranking_notation(cat) << " | "
        << to_string(rank_strategies(cat).data_investment) << " | " << (cat == r.ranking.category ? "**<-**" : "")
        << " |\n";
  }
  out << "\n```\n" << r.explanation << "```\n";
  return out.str();
}

}  // namespace lrl
