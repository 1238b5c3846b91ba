// Acceptance checks, one per criterion. Prints one PASS/FAIL line each.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "lrl/aligner.hpp"
#include "lrl/config.hpp"
#include "lrl/error.hpp"
#include "lrl/harness.hpp"
#include "lrl/mock_backend.hpp"
#include "lrl/pipeline.hpp"
#include "lrl/promptkit.hpp"
#include "lrl/recommender.hpp"
#include "lrl/retriever.hpp"
#include "lrl/stats.hpp"
#include "lrl/tokenizer.hpp"
#include "lrl/tokmetrics.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace lrl;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok " : "FAILED ") + what);
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// Tokenizer-only numbers on real assets.
Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto tok = load_tokenizer(env_or("LRL_DEEPSEEK_TOKENIZER", test::data_path("assets/deepseek_llm_7b_tokenizer.json")));
  const auto sat = load_parallel_text(env_or("LRL_SAT_OLCK_CORPUS", test::data_path("assets/cldr_sat_Olck.txt")), "sat_Olck");
  const auto nqo = load_parallel_text(env_or("LRL_NQO_NKOO_CORPUS", test::data_path("assets/cldr_nqo_Nkoo.txt")), "nqo_Nkoo");
  const auto sat_p = profile_tokenizer(sat, *tok);
  const auto nqo_p = profile_tokenizer(nqo, *tok);
  const double elapsed = seconds_since(t0);
  o.require(sat.size() >= 100, "sat_Olck sample has " + std::to_string(sat.size()) + " sentences (>= 100)");
  o.require(sat_p.tbr >= 0.97, "sat_Olck mean TBR " + fmt(sat_p.tbr) + " >= 0.97");
  o.require(std::fabs(nqo_p.tp - 0.10) <= 0.05, "nqo_Nkoo mean TP " + fmt(nqo_p.tp) + " in 0.10 +/- 0.05");
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s < 10 s");
  return o;
}

// EM monotonicity, brute-force posteriors, link recovery.
Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto syn = test::make_model2_corpus(2024, 500);
  const auto model = train_aligner(syn.corpus);
  bool monotone = model.log_likelihood_history.size() == 6;
  for (std::size_t k = 1; k < model.log_likelihood_history.size(); ++k) {
    monotone = monotone && model.log_likelihood_history[k] >= model.log_likelihood_history[k - 1] - 1e-9;
  }
  o.require(monotone, "log-likelihood non-decreasing over 5 iterations (" +
                          fmt(model.log_likelihood_history.front()) + " -> " +
                          fmt(model.log_likelihood_history.back()) + ")");

  std::mt19937_64 rng(77);
  ParallelCorpus small{"toy", {}};
  const char* tw[] = {"a", "b", "c", "d"};
  const char* ew[] = {"w", "x", "y", "z"};
  for (int s = 0; s < 200; ++s) {
    std::string t, e;
    for (std::size_t i = 0, m = 1 + rng() % 3; i < m; ++i) t += (i ? " " : "") + std::string(tw[rng() % 4]);
    for (std::size_t j = 0, n = 1 + rng() % 3; j < n; ++j) e += (j ? " " : "") + std::string(ew[rng() % 4]);
    small.pairs.emplace_back(t, e);
  }
  AlignerOptions opts;
  opts.iterations = 4;
  const auto toy = train_aligner(small, opts);
  double worst = 0.0;
  for (const auto& pair : small.pairs) {
    const auto got = alignment_posteriors(toy, pair);
    const auto want = test::brute_force_posteriors(toy, pair);
    for (std::size_t j = 0; j < got.size(); ++j) {
      for (std::size_t i = 0; i < got[j].size(); ++i) worst = std::max(worst, std::fabs(got[j][i] - want[j][i]));
    }
  }
  o.require(worst < 1e-9, "posteriors vs enumeration on 200 pairs up to 3x3, max diff " + fmt(worst));

  std::size_t found = 0, total = 0;
  for (std::size_t s = 0; s < syn.corpus.pairs.size(); ++s) {
    const auto links = viterbi_align(model, syn.corpus.pairs[s]).links;
    const std::set<AlignmentLink> got(links.begin(), links.end());
    for (const auto& l : syn.truth[s]) found += got.contains(l) ? 1 : 0;
    total += syn.truth[s].size();
  }
  const double recall = static_cast<double>(found) / static_cast<double>(total);
  o.require(recall >= 0.95, "link recovery " + fmt(recall) + " >= 0.95");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s < 30 s");
  return o;
}

// BM25 against the formula, self-retrieval.
Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
  std::vector<std::string> docs;
  std::set<std::string> seen;
  while (docs.size() < 25) {
    std::string d;
    for (std::size_t i = 0, n = 3 + rng() % 10; i < n; ++i) d += (i ? " " : "") + vocab[rng() % vocab.size()];
    if (seen.insert(d).second) docs.push_back(d);
  }
  const Bm25Index index(docs);
  double worst = 0.0;
  for (int q = 0; q < 100; ++q) {
    std::string query;
    for (std::size_t i = 0, n = 1 + rng() % 5; i < n; ++i) query += (i ? " " : "") + vocab[rng() % (vocab.size() + 5) % vocab.size()];
    for (std::size_t d = 0; d < docs.size(); ++d) {
      worst = std::max(worst, std::fabs(index.score(query, d) - test::bm25_reference(docs, query, d, 1.2, 0.75)));
    }
  }
  o.require(worst < 1e-9, "100 random queries x 25 docs, max diff " + fmt(worst));
  int self = 0;
  for (int q = 0; q < 100; ++q) {
    const std::size_t d = static_cast<std::size_t>(q) % docs.size();
    const auto top = index.query(docs[d], 1);
    self += !top.empty() && top[0].doc_id == d ? 1 : 0;
  }
  o.require(self == 100, "self-retrieval first in " + std::to_string(self) + "/100");
  return o;
}

std::string concat(const RenderedPrompt& p) {
  std::string out;
  for (const auto& s : p.segments) out += s.text;
  return out;
}

// Golden prompts and the concatenation invariant.
Outcome criterion4() {
  Outcome o;
  const Variant variants[] = {Variant::baseline_zero,      Variant::word_alignment, Variant::word_translation,
                              Variant::sentence_alignment, Variant::fewshot_plain,  Variant::fewshot_aligned};
  const auto dict = load_dictionary(test::data_path("fixtures/golden/dictionary.tsv"));
  int matched = 0, fixtures = 0;
  for (const auto task : {Task::classification, Task::multichoice}) {
    const std::string file = task == Task::classification ? "topics.jsonl" : "reading.jsonl";
    const auto dataset = load_dataset(test::data_path("fixtures/golden/" + file), DataFormat::jsonl, task);
    for (const auto v : variants) {
      for (const auto pos : {DescriptionPosition::before_examples, DescriptionPosition::after_examples}) {
        EvalOptions opts;
        opts.spec.variant = v;
        opts.spec.task = task;
        opts.spec.language_name = "Pseudolang";
        opts.spec.k = variant_uses_examples(v) ? 2 : 0;
        opts.spec.position = pos;
        opts.dictionary = &dict;
        const std::string name = std::string(to_string(task)) + "_" + std::string(to_string(v)) + "_" +
                                 (pos == DescriptionPosition::before_examples ? "before" : "after");
        const auto path = test::data_path("fixtures/golden/prompts/" + name + ".txt");
        if (!fs::exists(path)) continue;
        ++fixtures;
        const auto prompts = render_prompts(dataset, opts);
        if (prompts.size() == 1 && prompts[0].prompt && prompts[0].prompt->text == read_text(path)) {
          ++matched;
        } else {
          o.notes.push_back("mismatch " + name);
        }
      }
    }
  }
  o.require(fixtures >= 20 && matched == fixtures,
            std::to_string(matched) + "/" + std::to_string(fixtures) + " golden fixtures byte-exact");

  std::mt19937_64 rng(4242);
  const char* words[] = {"wolo", "huka", "tehu", "ߒߞߏ", "ᱥᱟᱱ", "x", "\"q\"", "a.b", "zz", "Text:", "###", "\n"};
  auto phrase = [&](std::size_t n) {
    std::string s;
    // the first word is never the bare newline, so no side is blank
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string(words[rng() % (i ? 12 : 11)]);
    return s;
  };
  const auto rdict = parse_dictionary_tsv("wolo\tthe\t0.9\nhuka\tscientists\t0.8\nߒߞߏ\tI\t0.7\n");
  const auto labels = TaskLabelSet::sib_topics().labels();
  int held = 0;
  for (int c = 0; c < 1000; ++c) {
    PromptSpec spec;
    spec.language_name = rng() % 2 ? "Pseudolang" : "N'Ko";
    spec.variant = variants[rng() % 6];
    spec.task = rng() % 2 ? Task::classification : Task::multichoice;
    spec.k = variant_uses_examples(spec.variant) ? 1 + static_cast<int>(rng() % 5) : 0;
    spec.position = rng() % 2 ? DescriptionPosition::before_examples : DescriptionPosition::after_examples;
    // word_translation needs at least one known word
    const std::string input = phrase(1 + rng() % 8) + " huka";
    RenderedPrompt p;
    if (spec.task == Task::classification) {
      std::vector<AlignmentExample> pairs;
      std::vector<LabeledExample> demos;
      for (int i = 0; i < spec.k; ++i) {
        pairs.push_back({"p" + std::to_string(i), phrase(1 + rng() % 5), phrase(1 + rng() % 5)});
        demos.push_back({"d" + std::to_string(i), phrase(1 + rng() % 5), phrase(1 + rng() % 5),
                         labels[rng() % labels.size()], Split::train});
      }
      switch (spec.variant) {
        case Variant::baseline_zero: p = render_baseline(spec, input); break;
        case Variant::word_alignment: p = render_word_alignment(spec, input, rdict); break;
        case Variant::word_translation: p = render_word_translation(spec, input, rdict); break;
        case Variant::sentence_alignment: p = render_sentence_alignment(spec, input, pairs); break;
        case Variant::fewshot_plain: p = render_fewshot(spec, input, demos, false); break;
        case Variant::fewshot_aligned: p = render_fewshot(spec, input, demos, true); break;
      }
    } else {
      auto mc = [&](const std::string& id) {
        MultiChoiceExample e;
        e.id = id;
        e.passage_target = phrase(1 + rng() % 8) + " huka";
        e.passage_english = phrase(1 + rng() % 8);
        e.question = phrase(1 + rng() % 4) + "?";
        for (auto& ch : e.choices) ch = "c " + phrase(1 + rng() % 3);
        e.answer_index = static_cast<int>(rng() % 4);
        return e;
      };
      const auto example = mc("q");
      MultiChoiceContext ctx;
      ctx.dictionary = &rdict;
      for (int i = 0; i < spec.k; ++i) {
        ctx.passage_pairs.push_back({"p" + std::to_string(i), phrase(1 + rng() % 5), phrase(1 + rng() % 5)});
        ctx.demos.push_back(mc("d" + std::to_string(i)));
      }
      p = render_multichoice(spec, example, ctx);
    }
    held += concat(p) == p.text ? 1 : 0;
  }
  o.require(held == 1000, "concatenation invariant in " + std::to_string(held) + "/1000 random renderings");
  return o;
}

// Chi-squared and point-biserial oracles.
Outcome criterion5() {
  Outcome o;
  const auto a = mcnemar(10, 2);
  o.require(std::fabs(a.statistic - 49.0 / 12.0) < 1e-9, "b=10, c=2 gives " + fmt(a.statistic) + " (49/12)");
  const auto b = mcnemar(5, 5);
  o.require(std::fabs(b.statistic - 0.1) < 1e-9, "b=c=5 gives " + fmt(b.statistic) + " (0.1)");
  const auto chi = test::load_json("fixtures/oracles/chi2.json");
  double worst_p = 0.0;
  for (const auto& pt : chi.at("survival_df1")) {
    worst_p = std::max(worst_p, std::fabs(chi2_1_survival(pt.at("x").get<double>()) - pt.at("p").get<double>()));
  }
  o.require(worst_p < 1e-9, "p-values vs reference distribution, max diff " + fmt(worst_p));

  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int v = 0; v < 1000; ++v) {
    const std::size_t n = 3 + rng() % 60;
    std::vector<int> bin(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      bin[i] = static_cast<int>(rng() % 2);
      y[i] = normal(rng) + 0.8 * bin[i];
    }
    bin[0] = 0;
    bin[1] = 1;
    const std::vector<double> bd(bin.begin(), bin.end());
    worst = std::max(worst, std::fabs(point_biserial(bin, y) - test::pearson_reference(bd, y)));
  }
  o.require(worst < 1e-9, "point-biserial vs Pearson on 1000 random vectors, max diff " + fmt(worst));
  return o;
}

// Pipeline determinism and mock accuracy checks.
Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::map<std::string, std::string>> runs;
  for (int r = 0; r < 3; ++r) {
    auto c = RunConfig::load(test::data_path("fixtures/pipeline_config.json"));
    c.output_dir = test::temp_dir("acceptance_pipeline_" + std::to_string(r));
    const auto result = run_pipeline(c);
    std::map<std::string, std::string> h;
    for (const auto& a : result.manifest.at("artifacts")) h[a.at("path").get<std::string>()] = a.at("sha256");
    runs.push_back(h);
  }
  o.require(!runs[0].empty() && runs[0] == runs[1] && runs[1] == runs[2],
            std::to_string(runs[0].size()) + " artifact hashes identical across 3 runs");

  const auto dataset =
      load_dataset(test::data_path("fixtures/pseudo_topics.jsonl"), DataFormat::jsonl, Task::classification);
  EvalOptions opts;
  opts.spec.language_name = "Pseudolang";
  opts.retry.backoff_scale = 0.0;
  BackendConfig cfg;
  cfg.kind = "mock:oracle";
  const auto oracle = run_eval(dataset, opts, *make_backend(cfg, dataset));
  o.require(oracle.accuracy == 1.0, "oracle backend accuracy " + fmt(oracle.accuracy) + " == 1.0");
  cfg.kind = "mock:constant:no answer";
  const auto constant = run_eval(dataset, opts, *make_backend(cfg, dataset));
  o.require(constant.accuracy == 0.0, "constant backend accuracy " + fmt(constant.accuracy) + " == 0.0");
  cfg.kind = "mock:majority";
  const auto majority = run_eval(dataset, opts, *make_backend(cfg, dataset));
  const double tol = 1.0 / static_cast<double>(majority.n);
  o.require(std::fabs(majority.accuracy - majority.majority_vote_baseline) <= tol,
            "majority stub accuracy " + fmt(majority.accuracy) + " within 1/n of majority baseline " +
                fmt(majority.majority_vote_baseline));
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s < 60 s");
  return o;
}

LanguageProfile example_profile(const std::string& code, double baseline, double tbr, double ip) {
  LanguageProfile p;
  p.language_code = code;
  p.baseline_accuracy = baseline;
  p.tbr = tbr;
  p.ip = ip;
  return p;
}

// Category mappings and example profiles.
Outcome criterion7() {
  Outcome o;
  const auto a = rank_strategies(Category::extremely_under_represented);
  const auto b = rank_strategies(Category::limited_capability);
  const auto c = rank_strategies(Category::moderate_capability);
  o.require(a.ranking == std::array{Strategy::zero_shot_align, Strategy::few_shot, Strategy::peft} &&
                ranking_notation(a.category) == "zero-shot > few-shot > PEFT",
            "(a) " + ranking_notation(a.category));
  o.require(b.ranking == std::array{Strategy::peft, Strategy::zero_shot_align, Strategy::few_shot} &&
                ranking_notation(b.category) == "PEFT > zero-shot >= few-shot",
            "(b) " + ranking_notation(b.category));
  o.require(c.ranking == std::array{Strategy::peft, Strategy::few_shot, Strategy::zero_shot_align} &&
                ranking_notation(c.category) == "PEFT > few-shot > zero-shot",
            "(c) " + ranking_notation(c.category));
  const auto nqo = categorize(example_profile("nqo_Nkoo", 0.137, 0.995, 0.16));
  const auto wol = categorize(example_profile("wol_Latn", 0.387, 0.6, 0.39));
  const auto urd = categorize(example_profile("urd_Arab", 0.598, 0.5, 0.36));
  o.require(nqo == Category::extremely_under_represented, "nqo-like -> " + std::string(to_string(nqo)));
  o.require(wol == Category::limited_capability, "wol-like -> " + std::string(to_string(wol)));
  o.require(urd == Category::moderate_capability, "urd-like -> " + std::string(to_string(urd)));
  return o;
}

// Retrieval pool overlapping the test split.
Outcome criterion8() {
  Outcome o;
  const auto dataset = std::get<ClassificationDataset>(
      load_dataset(test::data_path("fixtures/pseudo_topics.jsonl"), DataFormat::jsonl, Task::classification));
  auto pool = dataset.split(Split::train);
  const auto eval = dataset.split(Split::test);
  pool.push_back(eval.front());
  EvalOptions opts;
  opts.spec.variant = Variant::fewshot_plain;
  opts.spec.k = 3;
  opts.spec.language_name = "Pseudolang";
  auto backend = make_oracle_backend(Dataset{dataset});
  bool raised = false;
  std::string message;
  try {
    run_classification(pool, eval, dataset.labels, opts, *backend);
  } catch (const LeakageError& e) {
    raised = true;
    message = e.what();
  }
  o.require(raised && message.find("no-leakage") != std::string::npos, "run rejected: " + message);
  o.require(backend->generate_calls() == 0, "no backend calls before the check");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks", "lrl_acceptance"};
  int only = 0;
  app.add_option("--criterion", only, "Run one criterion (1-8); default runs all")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> checks = {criterion1, criterion2, criterion3, criterion4,
                                                        criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int n = 1; n <= 8; ++n) {
    if (only && n != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    for (const auto& note : o.notes) std::cout << "  criterion " << n << ": " << note << "\n";
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt(seconds_since(t0))
              << " s)\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
