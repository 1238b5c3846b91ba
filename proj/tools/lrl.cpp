#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lrl/aligner.hpp"
#include "lrl/config.hpp"
#include "lrl/error.hpp"
#include "lrl/harness.hpp"
#include "lrl/pipeline.hpp"
#include "lrl/recommender.hpp"
#include "lrl/retriever.hpp"
#include "lrl/stats.hpp"
#include "lrl/text.hpp"
#include "lrl/tokenizer.hpp"
#include "lrl/tokmetrics.hpp"
#include "lrl/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFlagged = 1, kConfig = 2, kUnreachable = 3 };

// Flag values left unset keep the config file's value.
struct Overrides {
  std::string config;
  std::optional<std::string> dataset, format, task, language, language_name, tokenizer, parallel, dictionary;
  std::optional<std::string> backend, backend_url, model, variant, position, retrieval, split, output_dir;
  std::optional<int> k, max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> concurrency;
  std::optional<double> retry_scale;
  bool chat = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run config; flags override its values");
  cmd->add_option("--dataset", o.dataset, "Dataset file (JSONL or TSV)");
  cmd->add_option("--format", o.format, "Dataset format: jsonl or tsv");
  cmd->add_option("--task", o.task, "classification or multichoice");
  cmd->add_option("--language", o.language, "Language code, e.g. nqo_Nkoo");
  cmd->add_option("--language-name", o.language_name, "Language name used inside prompts");
  cmd->add_option("--tokenizer", o.tokenizer, "tokenizer.json path or URL, or 'bytes'");
  cmd->add_option("--parallel", o.parallel, "Parallel text, one 'target ||| english' pair per line");
  cmd->add_option("--dictionary", o.dictionary, "Dictionary TSV (target, english, prob)");
  cmd->add_option("--backend", o.backend,
                  "http, none, mock:oracle, mock:keyword, mock:majority or mock:constant:<text>");
  cmd->add_option("--backend-url", o.backend_url, "OpenAI-compatible base URL (default $LRL_BASE_URL)");
  cmd->add_option("--model", o.model, "Model name (default $LRL_MODEL)");
  cmd->add_flag("--chat", o.chat, "Generate through /chat/completions");
  cmd->add_option("--variant", o.variant, "Prompt variant");
  cmd->add_option("-k,--k", o.k, "Number of retrieved examples");
  cmd->add_option("--position", o.position, "Task description position: before, after or auto");
  cmd->add_option("--retrieval", o.retrieval, "bm25 or random");
  cmd->add_option("--seed", o.seed, "Seed for random retrieval");
  cmd->add_option("--concurrency", o.concurrency, "Requests in flight");
  cmd->add_option("--max-tokens", o.max_tokens, "Generation budget (0 = task default)");
  cmd->add_option("--split", o.split, "Evaluation split: test or dev");
  cmd->add_option("--retry-scale", o.retry_scale, "Multiplier on retry waits");
  cmd->add_option("--output-dir", o.output_dir, "Directory for outputs");
}

std::string from_cwd(const std::string& p) {
  if (p.empty() || p == "bytes" || p.starts_with("http://") || p.starts_with("https://")) return p;
  return fs::absolute(p).lexically_normal().string();
}

lrl::RunConfig resolve(const Overrides& o) {
  lrl::RunConfig c = o.config.empty() ? lrl::RunConfig{} : lrl::RunConfig::load(o.config);
  if (o.dataset) c.dataset = from_cwd(*o.dataset);
  if (o.format) c.format = lrl::parse_format(*o.format);
  if (o.task) c.task = lrl::parse_task(*o.task);
  if (o.language) c.language_code = *o.language;
  if (o.language_name) c.language_name = *o.language_name;
  if (c.language_name.empty()) c.language_name = c.language_code;
  if (o.tokenizer) c.tokenizer = from_cwd(*o.tokenizer);
  if (o.parallel) c.parallel = from_cwd(*o.parallel);
  if (o.dictionary) c.dictionary = from_cwd(*o.dictionary);
  if (o.backend) c.backend.kind = *o.backend;
  if (o.backend_url) {
    c.backend.url = *o.backend_url;
    if (!o.backend) c.backend.kind = "http";
  }
  if (o.model) c.backend.model = *o.model;
  if (o.chat) c.backend.chat = true;
  if (o.variant) c.eval.variant = lrl::parse_variant(*o.variant);
  if (o.k) c.eval.k = *o.k;
  if (o.position) {
    c.eval.position = *o.position == "auto" ? std::nullopt : std::optional(lrl::parse_position(*o.position));
  }
  if (o.retrieval) c.retrieval = lrl::parse_retrieval_mode(*o.retrieval);
  if (o.seed) c.seed = *o.seed;
  if (o.concurrency) c.concurrency = *o.concurrency;
  if (o.max_tokens) c.max_tokens = *o.max_tokens;
  if (o.split) c.split = lrl::parse_split(*o.split);
  if (o.retry_scale) c.retry_backoff_scale = *o.retry_scale;
  if (o.output_dir) c.output_dir = from_cwd(*o.output_dir);
  return c;
}

fs::path output_path(const lrl::RunConfig& c, const std::string& explicit_path, const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(c.output_dir);
  return fs::path(c.output_dir) / default_name;
}

void write_output(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  lrl::write_file(path.string(), content);
  std::cerr << "wrote " << path.string() << "\n";
}

json stamped(json body, const json& meta) {
  if (body.contains("meta") && body["meta"].is_object()) {
    body["meta"].update(meta);
  } else {
    body["meta"] = meta;
  }
  return body;
}

std::string stamp_comment(const json& meta) {
  return "# config_hash: " + meta.at("config_hash").get<std::string>() +
         ", version: " + meta.at("version").get<std::string>() + ", seed: " + meta.at("seed").dump() + "\n";
}

lrl::ParallelCorpus load_parallel_only(const lrl::RunConfig& c) {
  if (!c.parallel.empty()) return lrl::load_parallel_text(c.parallel, c.language_code);
  return lrl::load_run_parallel(c, lrl::load_run_dataset(c));
}

std::string report_markdown(const lrl::EvalReport& r, const std::string& title) {
  std::ostringstream out;
  out << "## " << title << "\n\n"
      << "| accuracy | n | failed | parse failures | majority baseline | flagged |\n|---|---|---|---|---|---|\n"
      << "| " << lrl::format_double(r.accuracy) << " | " << r.n << " | " << r.failed << " | " << r.parse_failures
      << " | " << lrl::format_double(r.majority_vote_baseline) << " | " << (r.flagged ? "yes" : "no") << " |\n";
  return out.str();
}

int cmd_diagnose(const Overrides& o, const std::string& output, bool markdown) {
  const auto c = resolve(o);
  c.validate(c.parallel.empty(), false);
  const auto meta = lrl::run_meta(c);
  const auto corpus = load_parallel_only(c);
  const auto tokenizer = lrl::load_tokenizer(c.tokenizer);
  lrl::LanguageProfile profile;
  if (c.backend.kind == "none") {
    profile = lrl::profile_tokenizer(corpus, *tokenizer);
  } else {
    const lrl::Dataset empty = lrl::ClassificationDataset{};
    const auto backend = lrl::make_backend(c.backend, c.dataset.empty() ? empty : lrl::load_run_dataset(c));
    profile = lrl::profile_language(corpus, *tokenizer, *backend);
  }
  const auto body = stamped(lrl::to_json(profile), meta);
  write_output(output_path(c, output, "profile.json"), body.dump(2) + "\n");
  if (markdown) {
    std::cout << "## Profile " << profile.language_code << "\n\n| IP | TBR | TP | n | skipped |\n|---|---|---|---|---|\n"
              << "| " << (c.backend.kind == "none" ? std::string("-") : lrl::format_double(profile.ip)) << " | "
              << lrl::format_double(profile.tbr) << " | " << lrl::format_double(profile.tp) << " | "
              << profile.sample_count << " | " << profile.skipped << " |\n";
  } else {
    std::cout << body.dump(2) << "\n";
  }
  return kOk;
}

int cmd_align(const Overrides& o, const std::string& output, const std::string& ttable) {
  const auto c = resolve(o);
  c.validate(c.parallel.empty(), false);
  const auto meta = lrl::run_meta(c);
  const auto corpus = load_parallel_only(c);
  const auto model = lrl::train_aligner(corpus, c.aligner);
  std::string lines;
  for (const auto& pair : corpus.pairs) lines += lrl::pharaoh_format(lrl::viterbi_align(model, pair)) + "\n";
  const auto path = output_path(c, output, "alignments.txt");
  write_output(path, lines);
  json sidecar = {{"meta", meta},
                  {"pairs", corpus.size()},
                  {"tension", model.tension},
                  {"log_likelihood", model.log_likelihood_history}};
  write_output(path.string() + ".meta.json", sidecar.dump(2) + "\n");
  if (!ttable.empty()) write_output(ttable, stamp_comment(meta) + lrl::serialize_ttable(model));
  return kOk;
}

int cmd_build_dict(const Overrides& o, const std::string& output) {
  const auto c = resolve(o);
  c.validate(c.parallel.empty(), false);
  const auto meta = lrl::run_meta(c);
  const auto dict = lrl::build_dictionary(load_parallel_only(c), c.aligner);
  write_output(output_path(c, output, "dictionary.tsv"), stamp_comment(meta) + lrl::to_tsv(dict));
  std::cerr << dict.size() << " entries, coverage " << lrl::format_double(dict.coverage()) << "\n";
  return kOk;
}

int cmd_retrieve(const Overrides& o, const std::string& query_text, const std::string& example_id, std::size_t k,
                 const std::string& dump_scores) {
  const auto c = resolve(o);
  c.validate(true, false);
  const auto meta = lrl::run_meta(c);
  const auto dataset = lrl::load_run_dataset(c);
  std::vector<std::string> ids;
  std::vector<std::string> docs;
  std::string query = query_text;
  std::visit(
      [&](const auto& d) {
        for (const auto& e : d.examples) {
          std::string text;
          if constexpr (std::is_same_v<std::decay_t<decltype(e)>, lrl::LabeledExample>) {
            text = e.text_target;
          } else {
            text = e.passage_target;
          }
          if (!example_id.empty() && e.id == example_id) query = text;
          if (e.split != lrl::Split::train) continue;
          ids.push_back(e.id);
          docs.push_back(text);
        }
      },
      dataset);
  if (query.empty()) {
    throw lrl::ConfigError(example_id.empty() ? "give --query or --example-id"
                                              : "example id '" + example_id + "' not found");
  }
  if (docs.empty()) throw lrl::DataError("the train split is empty");
  json results = json::array();
  if (c.retrieval == lrl::RetrievalMode::bm25) {
    const lrl::Bm25Index index(docs);
    std::size_t rank = 0;
    for (const auto& d : index.query(query, k)) {
      results.push_back({{"rank", ++rank}, {"id", ids[d.doc_id]}, {"score", d.score}, {"text", docs[d.doc_id]}});
    }
    if (!dump_scores.empty()) {
      std::string tsv = stamp_comment(meta) + "doc_index\tid\tscore\n";
      const auto scores = index.score_all(query);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        tsv += std::to_string(i) + "\t" + ids[i] + "\t" + lrl::format_double(scores[i]) + "\n";
      }
      write_output(dump_scores, tsv);
    }
  } else {
    std::size_t rank = 0;
    for (auto d : lrl::sample_random(docs.size(), k, c.seed)) {
      results.push_back({{"rank", ++rank}, {"id", ids[d]}, {"text", docs[d]}});
    }
  }
  std::cout << json{{"query", query}, {"mode", std::string(lrl::to_string(c.retrieval))}, {"results", results},
                    {"meta", meta}}
                   .dump(2)
            << "\n";
  return kOk;
}

int cmd_prompt(const Overrides& o, const std::string& output, std::size_t limit, const std::string& only_id) {
  auto c = resolve(o);
  c.validate();
  const auto meta = lrl::run_meta(c);
  const auto dataset = lrl::load_run_dataset(c);
  std::optional<lrl::Dictionary> dict;
  if (!c.dictionary.empty()) dict = lrl::load_dictionary(c.dictionary);
  auto opts = c.eval_options(c.eval, dict ? &*dict : nullptr);
  std::string lines;
  std::size_t n = 0;
  for (const auto& p : lrl::render_prompts(dataset, opts)) {
    if (!only_id.empty() && p.example_id != only_id) continue;
    if (limit && n >= limit) break;
    ++n;
    json line = {{"id", p.example_id}, {"variant", std::string(lrl::to_string(c.eval.variant))}};
    if (p.prompt) {
      line["text"] = p.prompt->text;
    } else {
      line["text"] = nullptr;
      line["error"] = p.error;
    }
    lines += line.dump() + "\n";
  }
  if (output.empty()) {
    std::cout << lines;
  } else {
    write_output(output, json{{"meta", meta}}.dump() + "\n" + lines);
  }
  return kOk;
}

int cmd_eval(const Overrides& o, const std::string& output, bool markdown) {
  const auto c = resolve(o);
  c.validate();
  const auto meta = lrl::run_meta(c);
  const auto dataset = lrl::load_run_dataset(c);
  std::optional<lrl::Dictionary> dict;
  const bool word_level =
      c.eval.variant == lrl::Variant::word_alignment || c.eval.variant == lrl::Variant::word_translation;
  if (!c.dictionary.empty()) {
    dict = lrl::load_dictionary(c.dictionary);
  } else if (word_level) {
    dict = lrl::build_dictionary(lrl::load_run_parallel(c, dataset), c.aligner);
  }
  const auto backend = lrl::make_backend(c.backend, dataset);
  const auto report = lrl::evaluate_adaptation(c, c.eval, dataset, dict ? &*dict : nullptr, *backend);
  const auto path = output_path(c, output, "eval_" + c.eval.name() + ".json");
  const auto body = stamped(lrl::to_json(report), meta);
  write_output(path, body.dump(2) + "\n");
  fs::path records = path;
  records.replace_filename("records_" + c.eval.name() + ".jsonl");
  if (path.filename().string().rfind("eval_", 0) != 0) records = path.string() + ".records.jsonl";
  write_output(records, lrl::stamped_records(report.records, meta));
  if (markdown) {
    std::cout << report_markdown(report, c.eval.name());
  } else {
    std::cout << body.dump(2) << "\n";
  }
  if (report.flagged) {
    std::cerr << "run flagged: " << report.failed << " of " << report.total
              << " examples failed; results are not comparable\n";
    return kFlagged;
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string>& runs, bool no_correction, bool markdown) {
  if (runs.size() != 2) throw lrl::ConfigError("compare takes exactly two records files");
  const auto a = lrl::parse_records_jsonl(lrl::read_file(runs[0]));
  const auto b = lrl::parse_records_jsonl(lrl::read_file(runs[1]));
  const auto r = lrl::paired_chi_squared(a, b, !no_correction);
  if (markdown) {
    std::cout << lrl::to_markdown(r);
  } else {
    auto j = lrl::to_json(r);
    j["a"] = runs[0];
    j["b"] = runs[1];
    j["meta"] = {{"version", lrl::kToolkitVersion}};
    std::cout << j.dump(2) << "\n";
  }
  return kOk;
}

int cmd_recommend(const std::string& profile_path, const std::string& thresholds_path,
                  std::optional<double> baseline, const std::string& output, bool markdown) {
  json pj;
  try {
    pj = json::parse(lrl::read_file(profile_path));
  } catch (const json::exception& e) {
    throw lrl::DataError(profile_path + ": " + e.what());
  }
  auto profile = lrl::profile_from_json(pj.contains("profile") ? pj.at("profile") : pj);
  if (baseline) profile.baseline_accuracy = *baseline;
  lrl::Thresholds thresholds;
  if (!thresholds_path.empty()) {
    try {
      thresholds = lrl::thresholds_from_json(json::parse(lrl::read_file(thresholds_path)));
    } catch (const json::exception& e) {
      throw lrl::ConfigError(thresholds_path + ": " + e.what());
    }
  }
  const auto rec = lrl::recommend(profile, thresholds);
  json body = lrl::to_json(rec);
  body["meta"] = {{"version", lrl::kToolkitVersion}};
  if (pj.contains("meta")) body["meta"]["profile_meta"] = pj.at("meta");
  if (!output.empty()) write_output(output, body.dump(2) + "\n");
  if (markdown) {
    std::cout << lrl::to_markdown(rec, profile);
  } else {
    std::cout << body.dump(2) << "\n";
  }
  return kOk;
}

int cmd_pipeline(const Overrides& o, bool markdown) {
  const auto c = resolve(o);
  const auto result = lrl::run_pipeline(c);
  if (markdown) {
    std::cout << "# Pipeline " << c.language_code << "\n\n";
    for (const auto& [name, report] : result.reports) std::cout << report_markdown(report, name) << "\n";
    for (const auto& [name, r] : result.comparisons) {
      std::cout << "baseline_zero vs " << name << ": statistic " << lrl::format_double(r.statistic) << ", p "
                << lrl::format_double(r.p_value) << "\n";
    }
    std::cout << "\n" << lrl::to_markdown(result.recommendation, result.profile);
  } else {
    std::cout << json{{"output_dir", result.output_dir.string()}, {"manifest", result.manifest}}.dump(2) << "\n";
  }
  return result.flagged ? kFlagged : kOk;
}

int exit_code_for(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const lrl::PipelineError& p) {
    return p.cause() ? exit_code_for(p.cause()) : 1;
  } catch (const lrl::BackendUnreachable&) {
    return kUnreachable;
  } catch (const lrl::ConfigError&) {
    return kConfig;
  } catch (const lrl::DataError&) {
    return kConfig;
  } catch (const lrl::LeakageError&) {
    return kConfig;
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagnose and adapt LLMs for low-resource languages", "lrl"};
  app.set_version_flag("--version", lrl::kToolkitVersion);
  app.require_subcommand(1);

  Overrides o;
  std::string output;
  std::string ttable;
  std::string query;
  std::string example_id;
  std::string dump_scores;
  std::string profile;
  std::string thresholds;
  std::string only_id;
  std::optional<double> baseline;
  std::vector<std::string> runs;
  std::size_t k_retrieve = 5;
  std::size_t limit = 0;
  bool markdown = false;
  bool no_correction = false;

  auto* diagnose = app.add_subcommand("diagnose", "Compute IP, TBR and TP for a language");
  add_run_options(diagnose, o);
  diagnose->add_option("-o,--output", output, "Profile path (default <output-dir>/profile.json)");
  diagnose->add_flag("--markdown", markdown, "Print a markdown summary");

  auto* align = app.add_subcommand("align", "Word-align parallel text (Pharaoh output)");
  add_run_options(align, o);
  align->add_option("-o,--output", output, "Alignment path (default <output-dir>/alignments.txt)");
  align->add_option("--ttable", ttable, "Also write the translation table");

  auto* build_dict = app.add_subcommand("build-dict", "Induce a bilingual dictionary from parallel text");
  add_run_options(build_dict, o);
  build_dict->add_option("-o,--output", output, "Dictionary path (default <output-dir>/dictionary.tsv)");

  auto* retrieve = app.add_subcommand("retrieve", "Rank training examples for a query");
  add_run_options(retrieve, o);
  retrieve->add_option("--query", query, "Query text");
  retrieve->add_option("--example-id", example_id, "Use this example's text as the query");
  retrieve->add_option("--top", k_retrieve, "Number of results");
  retrieve->add_option("--dump-scores", dump_scores, "Write every pool document's BM25 score as TSV");

  auto* prompt = app.add_subcommand("prompt", "Render prompts as JSONL (id, variant, text)");
  add_run_options(prompt, o);
  prompt->add_option("-o,--output", output, "Write to a file instead of stdout");
  prompt->add_option("--limit", limit, "Render at most this many examples");
  prompt->add_option("--id", only_id, "Render only this example");

  auto* eval = app.add_subcommand("eval", "Evaluate one prompt variant");
  add_run_options(eval, o);
  eval->add_option("-o,--output", output, "Report path (default <output-dir>/eval_<variant>.json)");
  eval->add_flag("--markdown", markdown, "Print a markdown summary");

  auto* compare = app.add_subcommand("compare", "Paired chi-squared test between two runs");
  compare->add_option("runs", runs, "Two records JSONL files")->expected(2)->required();
  compare->add_flag("--no-correction", no_correction, "Disable the continuity correction");
  compare->add_flag("--markdown", markdown, "Print a markdown table");

  auto* report = app.add_subcommand("report", "Report utilities");
  report->add_option("--compare", runs, "Two records JSONL files")->expected(2)->required();
  report->add_flag("--no-correction", no_correction, "Disable the continuity correction");
  report->add_flag("--markdown", markdown, "Print a markdown table");

  auto* recommend = app.add_subcommand("recommend", "Rank adaptation strategies for a language profile");
  recommend->add_option("--profile", profile, "profile.json from diagnose")->required();
  recommend->add_option("--thresholds", thresholds, "JSON thresholds override");
  recommend->add_option("--baseline", baseline, "Zero-shot baseline accuracy, if not in the profile");
  recommend->add_option("-o,--output", output, "Also write the JSON here");
  recommend->add_flag("--markdown", markdown, "Print the category table");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write a report bundle");
  add_run_options(pipeline, o);
  pipeline->add_flag("--markdown", markdown, "Print a markdown summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  try {
    if (*diagnose) return cmd_diagnose(o, output, markdown);
    if (*align) return cmd_align(o, output, ttable);
    if (*build_dict) return cmd_build_dict(o, output);
    if (*retrieve) return cmd_retrieve(o, query, example_id, k_retrieve, dump_scores);
    if (*prompt) return cmd_prompt(o, output, limit, only_id);
    if (*eval) return cmd_eval(o, output, markdown);
    if (*compare || *report) return cmd_compare(runs, no_correction, markdown);
    if (*recommend) return cmd_recommend(profile, thresholds, baseline, output, markdown);
    if (*pipeline) return cmd_pipeline(o, markdown);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(std::current_exception());
  }
  return kOk;
}
