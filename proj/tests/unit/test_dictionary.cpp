#include <doctest.h>

#include "lrl/dictionary.hpp"
#include "lrl/error.hpp"

using namespace lrl;

TEST_SUITE("dictionary") {
  TEST_CASE("tsv round trip") {
    Dictionary d;
    d.entries.emplace("ߒ", DictionaryEntry{"i", 0.5});
    d.entries.emplace("ka", DictionaryEntry{"of", 1.0});
    d.vocabulary_size = 2;
    const auto back = parse_dictionary_tsv(to_tsv(d));
    CHECK(back.entries == d.entries);
    CHECK(back.coverage() == 1.0);
  }

  TEST_CASE("comments, two columns and errors") {
    const auto d = parse_dictionary_tsv("# header line\nab\tcd\n");
    CHECK(d.find("ab")->prob == 1.0);
    CHECK(d.find("zz") == nullptr);
    CHECK_THROWS_AS(parse_dictionary_tsv("ab cd\n"), DataError);
    CHECK_THROWS_AS(parse_dictionary_tsv("ab\tcd\t1.5\n"), DataError);
    CHECK_THROWS_AS(parse_dictionary_tsv("ab\tcd\nab\tef\n"), DataError);
  }
}
