#include <doctest.h>

#include <set>

#include "lrl/error.hpp"
#include "lrl/harness.hpp"
#include "lrl/mock_backend.hpp"
#include "support.hpp"

using namespace lrl;

namespace {

const Dataset& topics() {
  static const Dataset d =
      load_dataset(test::data_path("fixtures/pseudo_topics.jsonl"), DataFormat::jsonl, Task::classification);
  return d;
}

const Dataset& reading() {
  static const Dataset d =
      load_dataset(test::data_path("fixtures/pseudo_reading.jsonl"), DataFormat::jsonl, Task::multichoice);
  return d;
}

EvalOptions options(Variant v, int k, Task task = Task::classification) {
  EvalOptions o;
  o.spec.variant = v;
  o.spec.k = k;
  o.spec.task = task;
  o.spec.language_name = "Pseudolang";
  o.retry.backoff_scale = 0.0;
  return o;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("label parsing") {
    const auto labels = TaskLabelSet::sib_topics();
    CHECK(parse_label("it is about travel and health", labels) == "travel");
    CHECK(parse_label("Science/Technology.", labels) == "science/technology");
    CHECK(parse_label("  SPORTS", labels) == "sports");
    CHECK_FALSE(parse_label("no idea", labels).has_value());
    CHECK_FALSE(parse_label("", labels).has_value());
    const TaskLabelSet nested({"art", "art history"});
    CHECK(parse_label("art history", nested) == "art history");
  }

  TEST_CASE("choice parsing") {
    CHECK(parse_choice("Answer: C") == 2);
    CHECK(parse_choice("b)") == 1);
    CHECK(parse_choice("(D)") == 3);
    CHECK_FALSE(parse_choice("None of these").has_value());
    CHECK_FALSE(parse_choice("E").has_value());
    CHECK_FALSE(parse_choice("").has_value());
  }

  TEST_CASE("oracle backend scores every example") {
    auto oracle = make_oracle_backend(topics());
    for (const auto& [v, k] : {std::pair{Variant::baseline_zero, 0}, {Variant::fewshot_plain, 3},
                              {Variant::sentence_alignment, 2}}) {
      const auto r = run_eval(topics(), options(v, k), *oracle);
      CHECK(r.total == 204);
      CHECK(r.accuracy == doctest::Approx(1.0));
      CHECK(r.failed == 0);
      CHECK_FALSE(r.flagged);
    }
    auto mc_oracle = make_oracle_backend(reading());
    const auto mc = run_eval(reading(), options(Variant::baseline_zero, 0, Task::multichoice), *mc_oracle);
    CHECK(mc.total == 16);
    CHECK(mc.accuracy == doctest::Approx(1.0));
  }

  TEST_CASE("constant off-label output scores zero and counts parse failures") {
    auto constant = make_constant_backend("I cannot tell.");
    const auto r = run_eval(topics(), options(Variant::baseline_zero, 0), *constant);
    CHECK(r.accuracy == 0.0);
    CHECK(r.parse_failures == 204);
    CHECK(r.confusion.at("travel").at("<none>") == 40);
  }

  TEST_CASE("majority stub matches the majority baseline") {
    auto majority = make_constant_backend("science/technology");
    const auto r = run_eval(topics(), options(Variant::baseline_zero, 0), *majority);
    CHECK(r.accuracy == doctest::Approx(51.0 / 204.0));
    CHECK(r.majority_vote_baseline == doctest::Approx(51.0 / 204.0));
    CHECK(r.majority_label == "science/technology");
  }

  TEST_CASE("confusion rows sum to split counts") {
    auto keyword = make_keyword_backend();
    const auto r = run_eval(topics(), options(Variant::fewshot_aligned, 3), *keyword);
    std::size_t total = 0;
    for (const auto& [gold, row] : r.confusion) {
      std::size_t sum = 0;
      for (const auto& [pred, n] : row) sum += n;
      total += sum;
    }
    CHECK(total == r.n);
    std::size_t travel = 0;
    for (const auto& [pred, n] : r.confusion.at("travel")) travel += n;
    CHECK(travel == 40);
    CHECK(r.correct == static_cast<std::size_t>(r.accuracy * r.n + 0.5));
  }

  TEST_CASE("runs are deterministic across concurrency") {
    auto keyword = make_keyword_backend();
    auto a = options(Variant::fewshot_plain, 2);
    a.retrieval.mode = RetrievalMode::random;
    a.retrieval.seed = 9;
    a.concurrency = 1;
    auto b = a;
    b.concurrency = 8;
    const auto ra = run_eval(topics(), a, *keyword);
    const auto rb = run_eval(topics(), b, *keyword);
    CHECK(records_to_jsonl(ra.records, false) == records_to_jsonl(rb.records, false));
    CHECK(ra.accuracy == rb.accuracy);
  }

  TEST_CASE("leakage between pool and evaluation split is rejected") {
    CHECK_THROWS_AS(check_no_leakage({"a", "b"}, {"c", "b"}), LeakageError);
    CHECK_NOTHROW(check_no_leakage({"a", "b"}, {"c", "d"}));
    const auto& cls = std::get<ClassificationDataset>(topics());
    auto pool = cls.split(Split::train);
    const auto eval = cls.split(Split::test);
    pool.push_back(eval[3]);
    auto oracle = make_oracle_backend(topics());
    CHECK_THROWS_AS(run_classification(pool, eval, cls.labels, options(Variant::fewshot_plain, 2), *oracle),
                    LeakageError);
    CHECK(oracle->generate_calls() == 0);
  }

  TEST_CASE("train split cannot be evaluated") {
    auto o = options(Variant::baseline_zero, 0);
    o.eval_split = Split::train;
    auto constant = make_constant_backend("travel");
    CHECK_THROWS_AS(run_eval(topics(), o, *constant), ConfigError);
  }

  TEST_CASE("word-level variants need a dictionary") {
    auto constant = make_constant_backend("travel");
    CHECK_THROWS_AS(run_eval(topics(), options(Variant::word_alignment, 0), *constant), ConfigError);
  }

  TEST_CASE("description position selection") {
    auto oracle = make_oracle_backend(topics());
    // Only answers when the description comes after the demonstrations.
    MockBackend after_only("after", [&](const std::string& prompt, int max_tokens) {
      return prompt.starts_with("What is") ? std::string() : oracle->generate(prompt, max_tokens);
    });
    const auto pick = select_description_position(topics(), options(Variant::fewshot_plain, 2), after_only);
    CHECK(pick.position == DescriptionPosition::after_examples);
    CHECK(pick.after_accuracy == doctest::Approx(1.0));
    CHECK(pick.before_accuracy == 0.0);

    auto constant = make_constant_backend("travel");
    const auto tie = select_description_position(topics(), options(Variant::fewshot_plain, 2), *constant);
    CHECK(tie.position == DescriptionPosition::before_examples);
    CHECK(tie.before_accuracy == tie.after_accuracy);

    ClassificationDataset no_dev = std::get<ClassificationDataset>(topics());
    std::erase_if(no_dev.examples, [](const LabeledExample& e) { return e.split == Split::dev; });
    CHECK_THROWS_AS(select_description_position(Dataset{no_dev}, options(Variant::fewshot_plain, 2), *constant),
                    DataError);
  }

  TEST_CASE("transport failures are marked and flagged") {
    MockBackend broken("broken", [](const std::string& prompt, int) -> std::string {
      if (prompt.find("wolo") != std::string::npos && prompt.size() % 5 == 0)
        throw BackendError("boom", "r", false);
      return "travel";
    });
    const auto r = run_eval(topics(), options(Variant::baseline_zero, 0), broken);
    CHECK(r.failed > 0);
    CHECK(r.n == r.total - r.failed);
    CHECK(r.flagged == (static_cast<double>(r.failed) / r.total > 0.01));
    for (const auto& rec : r.records) {
      if (rec.failed) CHECK_FALSE(rec.error.empty());
    }

    MockBackend down("down", [](const std::string&, int) -> std::string { throw BackendUnreachable("no route", ""); });
    CHECK_THROWS_AS(run_eval(topics(), options(Variant::baseline_zero, 0), down), BackendUnreachable);
  }

  TEST_CASE("records round-trip through JSON lines") {
    auto keyword = make_keyword_backend();
    const auto r = run_eval(topics(), options(Variant::baseline_zero, 0), *keyword);
    const auto text = "{\"meta\":{\"seed\":1}}\n" + records_to_jsonl(r.records);
    const auto back = parse_records_jsonl(text);
    REQUIRE(back.size() == r.records.size());
    CHECK(records_to_jsonl(back) == records_to_jsonl(r.records));
    CHECK_THROWS_WITH_AS(parse_records_jsonl("{\"example_id\": 3}\n"), doctest::Contains("line 1"), DataError);
  }
}
