#include <doctest.h>

#include "lrl/error.hpp"
#include "lrl/mock_backend.hpp"
#include "lrl/tokmetrics.hpp"

using namespace lrl;

TEST_SUITE("tokmetrics") {
  TEST_CASE("per-pair metrics by hand") {
    ByteTokenizer bytes;
    MockBackend backend("cp", [](const std::string&, int) { return std::string(); });
    const TextPair pair{"ߒߞ", "ab"};
    // two N'Ko code points of 2 bytes each; two ASCII letters
    CHECK(token_to_byte_ratio("ߒߞ", bytes) == doctest::Approx(1.0));
    CHECK(tokenizer_parity(pair, bytes) == doctest::Approx(2.0 / 4.0));
    CHECK(information_parity(pair, backend) == doctest::Approx((2 * 0.7) / (2 * 2.9)));
  }

  TEST_CASE("profile averages per-pair ratios") {
    ByteTokenizer bytes;
    MockBackend backend("cp", [](const std::string&, int) { return std::string(); });
    ParallelCorpus corpus{"nqo_Nkoo", {{"ߒߞ", "ab"}, {"ߒ", "abcd"}}};
    const auto p = profile_language(corpus, bytes, backend);
    const double ip = ((1.4 / 5.8) + (2.8 / 2.9)) / 2.0;
    const double tp = (2.0 / 4.0 + 4.0 / 2.0) / 2.0;
    CHECK(p.ip == doctest::Approx(ip).epsilon(1e-12));
    CHECK(p.tp == doctest::Approx(tp).epsilon(1e-12));
    CHECK(p.tbr == doctest::Approx(1.0));
    CHECK(p.sample_count == 2);
    CHECK(p.skipped == 0);
  }

  TEST_CASE("failing pairs are skipped and counted") {
    ByteTokenizer bytes;
    MockBackend backend(
        "flaky", [](const std::string&, int) { return std::string(); },
        [](const std::string& text) -> ScoreResult {
          if (text == "bad") throw BackendError("refused", "r1", false);
          return {static_cast<double>(text.size()), {}};
        });
    ParallelCorpus corpus{"x", {{"abcd", "ab"}, {"bad", "bad"}}};
    const auto p = profile_language(corpus, bytes, backend);
    CHECK(p.sample_count == 1);
    CHECK(p.skipped == 1);
    CHECK(p.ip == doctest::Approx(0.5));
  }

  TEST_CASE("errors") {
    ByteTokenizer bytes;
    CHECK_THROWS_AS(token_to_byte_ratio("", bytes), DataError);
    MockBackend zero(
        "zero", [](const std::string&, int) { return std::string(); },
        [](const std::string&) { return ScoreResult{}; });
    CHECK_THROWS_AS(information_parity({"a", "b"}, zero), DataError);
    MockBackend down(
        "down", [](const std::string&, int) { return std::string(); },
        [](const std::string&) -> ScoreResult { throw BackendUnreachable("connection refused", ""); });
    CHECK_THROWS_AS(profile_language({"x", {{"a", "b"}}}, bytes, down), BackendUnreachable);
  }

  TEST_CASE("profile json schema and round trip") {
    ByteTokenizer bytes;
    MockBackend backend("cp", [](const std::string&, int) { return std::string(); });
    auto p = profile_language({"sat_Olck", {{"ᱥᱟ", "sa"}}}, bytes, backend);
    const auto j = to_json(p);
    for (const char* key : {"language", "ip", "tbr", "tp", "n"}) CHECK(j.contains(key));
    CHECK(j.at("baseline_accuracy").is_null());
    const auto back = profile_from_json(j);
    CHECK(back.ip == p.ip);
    CHECK(back.language_code == "sat_Olck");
    const auto tok_only = to_json(profile_tokenizer({"x", {{"ab", "a"}}}, bytes));
    CHECK(tok_only.at("ip").is_null());
  }
}
