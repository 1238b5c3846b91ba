#include <doctest.h>

#include <vector>

#include "lrl/text.hpp"

using namespace lrl;

TEST_SUITE("text") {
  TEST_CASE("whitespace split ignores runs and edges") {
    CHECK(split_whitespace("  a\tb \n c  ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_whitespace("   ").empty());
    CHECK(trim("  x y \t") == "x y");
  }

  TEST_CASE("labels fold to lowercase") {
    CHECK(normalize_label("  Science/Technology ") == "science/technology");
    CHECK(to_lower("ÀÉÎ") == "àéî");
  }

  TEST_CASE("utf8 checks") {
    CHECK(is_valid_utf8("ߒߞߏ"));
    CHECK_FALSE(is_valid_utf8("\xC3"));
    CHECK_FALSE(is_valid_utf8("\xED\xA0\x80"));
    CHECK(starts_with_bom("\xEF\xBB\xBFhi"));
    CHECK(count_codepoints("aߒ😀") == 3);
  }

  TEST_CASE("sha256 matches the published test vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("doubles round-trip through their shortest form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.25) == "0.25");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("pairwise sum equals the exact sum on representable values") {
    std::vector<double> v;
    for (int i = 1; i <= 1000; ++i) v.push_back(static_cast<double>(i));
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  }
}
