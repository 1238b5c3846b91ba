#include <doctest.h>

#include "lrl/error.hpp"
#include "lrl/recommender.hpp"

using namespace lrl;

namespace {

LanguageProfile profile(double baseline, double tbr, double ip) {
  LanguageProfile p;
  p.language_code = "xx";
  p.baseline_accuracy = baseline;
  p.tbr = tbr;
  p.ip = ip;
  p.tp = 0.5;
  return p;
}

}  // namespace

TEST_SUITE("recommender") {
  TEST_CASE("reference languages land in their categories") {
    CHECK(categorize(profile(0.137, 0.995, 0.16)) == Category::extremely_under_represented);
    CHECK(categorize(profile(0.387, 0.6, 0.39)) == Category::limited_capability);
    CHECK(categorize(profile(0.598, 0.5, 0.36)) == Category::moderate_capability);
  }

  TEST_CASE("rankings per category") {
    const auto a = rank_strategies(Category::extremely_under_represented);
    CHECK(a.ranking == std::array{Strategy::zero_shot_align, Strategy::few_shot, Strategy::peft});
    CHECK(a.data_investment == DataInvestment::parallel_translation);
    const auto b = rank_strategies(Category::limited_capability);
    CHECK(b.ranking == std::array{Strategy::peft, Strategy::zero_shot_align, Strategy::few_shot});
    const auto c = rank_strategies(Category::moderate_capability);
    CHECK(c.ranking == std::array{Strategy::peft, Strategy::few_shot, Strategy::zero_shot_align});
    CHECK(c.data_investment == DataInvestment::annotation);
    CHECK(ranking_notation(Category::limited_capability) == "PEFT > zero-shot >= few-shot");
  }

  TEST_CASE("baseline boundary at 0.45 is limited") {
    CHECK(categorize(profile(0.45, 0.5, 0.4)) == Category::limited_capability);
    CHECK(categorize(profile(0.4501, 0.5, 0.4)) == Category::moderate_capability);
  }

  TEST_CASE("extremely under-represented needs every signal") {
    CHECK(categorize(profile(0.1, 0.9, 0.1)) == Category::limited_capability);
    CHECK(categorize(profile(0.1, 0.99, 0.3)) == Category::limited_capability);
    CHECK(categorize(profile(0.2, 0.99, 0.1)) == Category::limited_capability);
  }

  TEST_CASE("raising the baseline never moves toward a weaker category") {
    for (double tbr : {0.5, 0.96, 0.999}) {
      for (double ip : {0.1, 0.3}) {
        int prev = -1;
        for (int step = 0; step <= 100; ++step) {
          const int cat = static_cast<int>(categorize(profile(step / 100.0, tbr, ip)));
          CHECK(cat >= prev);
          prev = cat;
        }
      }
    }
  }

  TEST_CASE("explanations quote values and warn against fine-tuning") {
    const auto p = profile(0.137, 0.995, 0.16);
    const auto r = recommend(p);
    CHECK(r.explanation.find("avoid fine-tuning") != std::string::npos);
    CHECK(r.explanation.find("0.137") != std::string::npos);
    const auto m = recommend(profile(0.598, 0.5, 0.36));
    CHECK(m.explanation.find("avoid fine-tuning") == std::string::npos);
    CHECK(to_json(r).dump() == to_json(recommend(p)).dump());
    CHECK(to_json(r).at("category") == "extremely_under_represented");
    CHECK(to_markdown(r, p).find("extremely") != std::string::npos);
  }

  TEST_CASE("missing measurements are configuration errors") {
    auto p = profile(0.3, 0.5, 0.3);
    p.baseline_accuracy.reset();
    CHECK_THROWS_AS(categorize(p), ConfigError);
    CHECK_THROWS_AS(categorize(profile(0.3, 0.5, 0.0)), ConfigError);
  }

  TEST_CASE("thresholds from JSON") {
    const auto t = thresholds_from_json(nlohmann::json{{"baseline_high", 0.5}});
    CHECK(t.baseline_high == 0.5);
    CHECK(t.baseline_low == 0.2);
    CHECK(categorize(profile(0.47, 0.5, 0.4), t) == Category::limited_capability);
    CHECK_THROWS_AS(thresholds_from_json(nlohmann::json{{"nope", 1}}), ConfigError);
  }
}
