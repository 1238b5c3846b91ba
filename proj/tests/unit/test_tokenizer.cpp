#include <doctest.h>

#include "lrl/error.hpp"
#include "lrl/tokenizer.hpp"
#include "support.hpp"

using namespace lrl;

namespace {

const std::shared_ptr<const BpeTokenizer>& deepseek() {
  static const auto tok = BpeTokenizer::from_file(test::data_path("assets/deepseek_llm_7b_tokenizer.json"));
  return tok;
}

}  // namespace

TEST_SUITE("tokenizer") {
  TEST_CASE("byte-level BPE ids match the reference implementation") {
    const auto oracle = test::load_json("fixtures/oracles/tokenizer.json");
    const auto& tok = *deepseek();
    CHECK(tok.vocab_size() > 100000);
    for (const auto& c : oracle.at("cases")) {
      const auto text = c.at("text").get<std::string>();
      CAPTURE(text);
      const auto ids = tok.encode(text);
      CHECK(ids == c.at("ids").get<std::vector<std::int32_t>>());
      CHECK(tok.decode(ids) == text);
    }
  }

  TEST_CASE("metaspace BPE with byte fallback matches the reference implementation") {
    const auto tok = BpeTokenizer::from_file(test::data_path("fixtures/oracles/metaspace_bpe.json"));
    CHECK(tok->byte_fallback());
    for (const auto& c : test::load_json("fixtures/oracles/metaspace_bpe_cases.json").at("cases")) {
      const auto text = c.at("text").get<std::string>();
      CAPTURE(text);
      const auto ids = tok->encode(text);
      CHECK(ids == c.at("ids").get<std::vector<std::int32_t>>());
      CHECK(tok->decode(ids) == c.at("decoded").get<std::string>());
    }
  }

  TEST_CASE("byte tokenizer counts bytes") {
    ByteTokenizer bytes;
    CHECK(bytes.count_tokens("ߒa") == 3);
    const auto ids = bytes.encode("héllo");
    CHECK(bytes.decode(ids) == "héllo");
    CHECK(load_tokenizer("bytes")->name() == "bytes");
  }

  TEST_CASE("load errors") {
    CHECK_THROWS_AS(load_tokenizer("/nonexistent/tokenizer.json"), DataError);
    CHECK_THROWS_AS(BpeTokenizer::from_json("{not json", "x"), DataError);
    CHECK_THROWS_AS(BpeTokenizer::from_json(R"({"model": {"type": "Unigram", "vocab": []}})", "x"), DataError);
  }

  TEST_CASE("tiny hand-built merge table") {
    const char* spec = R"({
      "normalizer": null, "pre_tokenizer": {"type": "WhitespaceSplit"}, "decoder": null, "added_tokens": [],
      "model": {"type": "BPE", "vocab": {"a": 0, "b": 1, "c": 2, "ab": 3, "abc": 4, "bc": 5},
                "merges": ["a b", "ab c", "b c"]}})";
    const auto tok = BpeTokenizer::from_json(spec, "tiny");
    CHECK(tok->encode("abc") == std::vector<std::int32_t>{4});
    CHECK(tok->encode("bca") == std::vector<std::int32_t>{5, 0});
    CHECK(tok->encode("abc ab") == std::vector<std::int32_t>{4, 3});
  }
}
