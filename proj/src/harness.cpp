#include "lrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <set>
#include <thread>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

using nlohmann::json;

std::string_view to_string(RetrievalMode m) { return m == RetrievalMode::bm25 ? "bm25" : "random"; }

RetrievalMode parse_retrieval_mode(std::string_view s) {
  if (s == "bm25") return RetrievalMode::bm25;
  if (s == "random") return RetrievalMode::random;
  throw ConfigError("unknown retrieval mode '" + std::string(s) + "' (expected bm25 or random)");
}

int default_max_tokens(Task task) { return task == Task::classification ? 16 : 4; }

std::optional<std::string> parse_label(std::string_view raw_output, const TaskLabelSet& labels) {
  const std::string text = to_lower(raw_output);
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& label : labels.labels()) {
    const auto pos = text.find(label);
    if (pos == std::string::npos) continue;
    if (!best || pos < best_pos || (pos == best_pos && label.size() > best->size())) {
      best = label;
      best_pos = pos;
    }
  }
  return best;
}

std::optional<int> parse_choice(std::string_view raw_output, int n_choices) {
  auto is_word_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  };
  for (std::size_t i = 0; i < raw_output.size(); ++i) {
    const char c = raw_output[i];
    int idx = -1;
    if (c >= 'A' && c < 'A' + n_choices) idx = c - 'A';
    if (c >= 'a' && c < 'a' + n_choices) idx = c - 'a';
    if (idx < 0) continue;
    const bool left_ok = i == 0 || !is_word_char(raw_output[i - 1]);
    const bool right_ok = i + 1 == raw_output.size() || !is_word_char(raw_output[i + 1]);
    if (left_ok && right_ok) return idx;
  }
  return std::nullopt;
}

void check_no_leakage(const std::vector<std::string>& pool_ids, const std::vector<std::string>& eval_ids) {
  const std::set<std::string> eval(eval_ids.begin(), eval_ids.end());
  std::vector<std::string> shared;
  for (const auto& id : pool_ids) {
    if (eval.contains(id)) shared.push_back(id);
  }
  if (!shared.empty()) {
    std::string sample;
    for (std::size_t i = 0; i < std::min<std::size_t>(shared.size(), 5); ++i) sample += (i ? ", " : "") + shared[i];
    throw LeakageError("no-leakage check failed: " + std::to_string(shared.size()) +
                       " retrieval pool ids are also evaluation ids (" + sample + ")");
  }
}

namespace {

struct Job {
  std::string id;
  std::string gold;
};

class Retrieval {
 public:
  Retrieval(std::vector<std::string> docs, const RetrievalConfig& cfg) : cfg_(cfg), size_(docs.size()) {
    if (cfg.mode == RetrievalMode::bm25 && !docs.empty()) index_.emplace(docs, cfg.bm25);
  }

  std::size_t size() const { return size_; }

  std::vector<std::size_t> select(std::string_view query, std::size_t k, std::size_t example_index) const {
    if (cfg_.mode == RetrievalMode::random) return sample_random(size_, k, cfg_.seed + example_index);
    std::vector<std::size_t> ids;
    for (const auto& d : index_->query(query, k)) ids.push_back(d.doc_id);
    return ids;
  }

 private:
  RetrievalConfig cfg_;
  std::size_t size_;
  std::optional<Bm25Index> index_;
};

void require_pool(const Retrieval& r, const PromptSpec& spec) {
  if (!variant_uses_examples(spec.variant)) return;
  if (r.size() < static_cast<std::size_t>(spec.k)) {
    throw ConfigError(std::string(to_string(spec.variant)) + " with k=" + std::to_string(spec.k) +
                      " needs at least k usable training examples, found " + std::to_string(r.size()));
  }
}

json config_snapshot(const EvalOptions& opts, int max_tokens) {
  return {{"task", std::string(to_string(opts.spec.task))},
          {"variant", std::string(to_string(opts.spec.variant))},
          {"language", opts.spec.language_name},
          {"k", opts.spec.k},
          {"description_position", std::string(to_string(opts.spec.position))},
          {"retrieval",
           {{"mode", std::string(to_string(opts.retrieval.mode))},
            {"seed", opts.retrieval.seed},
            {"k1", opts.retrieval.bm25.k1},
            {"b", opts.retrieval.bm25.b}}},
          {"max_tokens", max_tokens},
          {"temperature", 0},
          {"split", std::string(to_string(opts.eval_split))}};
}


struct Plan {
  std::vector<Job> jobs;
  std::function<RenderedPrompt(std::size_t)> render;
  std::function<std::optional<std::string>(const std::string&)> parse;
  std::vector<std::string> label_order;
  int max_tokens = 0;
};

template <typename Example>
void check_split_leakage(std::span<const Example> pool, std::span<const Example> eval) {
  std::vector<std::string> pool_ids;
  std::vector<std::string> eval_ids;
  for (const auto& e : pool) pool_ids.push_back(e.id);
  for (const auto& e : eval) eval_ids.push_back(e.id);
  check_no_leakage(pool_ids, eval_ids);
}

void require_dictionary(const EvalOptions& opts) {
  const auto v = opts.spec.variant;
  if ((v == Variant::word_alignment || v == Variant::word_translation) && !opts.dictionary) {
    throw ConfigError(std::string(to_string(v)) + " needs a dictionary (build one with build-dict)");
  }
}

bool needs_english(Variant v) { return v == Variant::sentence_alignment || v == Variant::fewshot_aligned; }

// eval must outlive the plan; pool examples are copied into the plan.
Plan plan_classification(std::span<const LabeledExample> pool, std::span<const LabeledExample> eval,
                         const TaskLabelSet& labels, const EvalOptions& opts) {
  const auto& spec = opts.spec;
  if (spec.task != Task::classification) throw ConfigError("classification run needs a classification spec");
  spec.validate();
  if (eval.empty()) throw DataError("evaluation split is empty");
  check_split_leakage(pool, eval);
  require_dictionary(opts);

  auto candidates = std::make_shared<std::vector<LabeledExample>>();
  std::vector<std::string> docs;
  if (variant_uses_examples(spec.variant)) {
    for (const auto& e : pool) {
      if (needs_english(spec.variant) && (!e.text_english || trim(*e.text_english).empty())) continue;
      candidates->push_back(e);
      docs.push_back(e.text_target);
    }
  }
  auto retrieval = std::make_shared<const Retrieval>(std::move(docs), opts.retrieval);
  require_pool(*retrieval, spec);

  Plan plan;
  for (const auto& e : eval) plan.jobs.push_back({e.id, e.label});
  plan.render = [eval, spec, dict = opts.dictionary, candidates, retrieval](std::size_t i) -> RenderedPrompt {
    const auto& ex = eval[i];
    switch (spec.variant) {
      case Variant::baseline_zero: return render_baseline(spec, ex.text_target);
      case Variant::word_alignment: return render_word_alignment(spec, ex.text_target, *dict);
      case Variant::word_translation: return render_word_translation(spec, ex.text_target, *dict);
      case Variant::sentence_alignment: {
        std::vector<AlignmentExample> pairs;
        for (auto d : retrieval->select(ex.text_target, static_cast<std::size_t>(spec.k), i)) {
          const auto& c = (*candidates)[d];
          pairs.push_back({c.id, c.text_target, *c.text_english});
        }
        return render_sentence_alignment(spec, ex.text_target, pairs);
      }
      case Variant::fewshot_plain:
      case Variant::fewshot_aligned: {
        std::vector<LabeledExample> demos;
        for (auto d : retrieval->select(ex.text_target, static_cast<std::size_t>(spec.k), i)) {
          demos.push_back((*candidates)[d]);
        }
        return render_fewshot(spec, ex.text_target, demos, spec.variant == Variant::fewshot_aligned);
      }
    }
    throw ConfigError("unhandled variant");
  };
  plan.parse = [labels](const std::string& raw) { return parse_label(raw, labels); };
  plan.label_order = labels.labels();
  plan.max_tokens = opts.max_tokens > 0 ? opts.max_tokens : default_max_tokens(Task::classification);
  return plan;
}

Plan plan_multichoice(std::span<const MultiChoiceExample> pool, std::span<const MultiChoiceExample> eval,
                      const EvalOptions& opts) {
  const auto& spec = opts.spec;
  if (spec.task != Task::multichoice) throw ConfigError("multiple-choice run needs a multichoice spec");
  spec.validate();
  if (eval.empty()) throw DataError("evaluation split is empty");
  check_split_leakage(pool, eval);
  require_dictionary(opts);

  auto candidates = std::make_shared<std::vector<MultiChoiceExample>>();
  std::vector<std::string> docs;
  if (variant_uses_examples(spec.variant)) {
    for (const auto& e : pool) {
      if (needs_english(spec.variant) && (!e.passage_english || trim(*e.passage_english).empty())) continue;
      candidates->push_back(e);
      docs.push_back(e.passage_target);
    }
  }
  auto retrieval = std::make_shared<const Retrieval>(std::move(docs), opts.retrieval);
  require_pool(*retrieval, spec);

  Plan plan;
  for (const auto& e : eval) plan.jobs.push_back({e.id, std::string(1, static_cast<char>('A' + e.answer_index))});
  plan.render = [eval, spec, dict = opts.dictionary, candidates, retrieval](std::size_t i) -> RenderedPrompt {
    const auto& ex = eval[i];
    MultiChoiceContext ctx;
    ctx.dictionary = dict;
    if (variant_uses_examples(spec.variant)) {
      for (auto d : retrieval->select(ex.passage_target, static_cast<std::size_t>(spec.k), i)) {
        const auto& c = (*candidates)[d];
        if (spec.variant == Variant::sentence_alignment) {
          ctx.passage_pairs.push_back({c.id, c.passage_target, *c.passage_english});
        } else {
          ctx.demos.push_back(c);
        }
      }
    }
    return render_multichoice(spec, ex, ctx);
  };
  plan.parse = [](const std::string& raw) -> std::optional<std::string> {
    const auto c = parse_choice(raw, 4);
    if (!c) return std::nullopt;
    return std::string(1, static_cast<char>('A' + *c));
  };
  plan.label_order = {"A", "B", "C", "D"};
  plan.max_tokens = opts.max_tokens > 0 ? opts.max_tokens : default_max_tokens(Task::multichoice);
  return plan;
}

EvalReport execute(const Plan& plan, const EvalOptions& opts, ScoringBackend& backend) {
  const auto& jobs = plan.jobs;
  std::vector<EvalRecord> records(jobs.size());
  std::vector<char> unreachable(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto& rec = records[i];
      rec.example_id = jobs[i].id;
      rec.gold = jobs[i].gold;
      const auto start = std::chrono::steady_clock::now();
      RenderedPrompt prompt;
      try {
        prompt = plan.render(i);
      } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
        continue;
      }
      rec.prompt_sha256 = sha256_hex(prompt.text);
      for (int attempt = 0;; ++attempt) {
        ++rec.attempts;
        try {
          rec.raw_output = backend.generate(prompt.text, plan.max_tokens);
          break;
        } catch (const BackendError& e) {
          if (e.transient() && attempt < opts.retry.max_retries) {
            const auto& waits = opts.retry.backoff_seconds;
            const double wait =
                waits.empty() ? 0.0 : waits[std::min<std::size_t>(attempt, waits.size() - 1)] * opts.retry.backoff_scale;
            if (wait > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
            continue;
          }
          rec.failed = true;
          rec.error = e.what();
          unreachable[i] = dynamic_cast<const BackendUnreachable*>(&e) != nullptr;
          break;
        } catch (const Error& e) {
          rec.failed = true;
          rec.error = e.what();
          break;
        }
      }
      rec.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      if (rec.failed) continue;
      rec.parsed_label = plan.parse(rec.raw_output);
      rec.correct = rec.parsed_label && *rec.parsed_label == rec.gold;
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.concurrency, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  EvalReport report;
  report.total = jobs.size();
  report.backend = backend.identity();
  std::map<std::string, std::size_t> gold_counts;
  std::string last_error;
  bool all_unreachable = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.failed) {
      ++report.failed;
      last_error = r.error;
      all_unreachable = all_unreachable && unreachable[i];
      continue;
    }
    ++report.n;
    ++gold_counts[r.gold];
    if (r.correct) ++report.correct;
    if (!r.parsed_label) ++report.parse_failures;
    ++report.confusion[r.gold][r.parsed_label ? *r.parsed_label : "<none>"];
  }
  if (report.n == 0 && report.total > 0) {
    const std::string msg = "all " + std::to_string(report.total) + " examples failed; last error: " + last_error;
    if (all_unreachable) throw BackendUnreachable(msg, "");
    throw Error(msg);
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.n);
  std::size_t best = 0;
  for (const auto& label : plan.label_order) {
    auto it = gold_counts.find(label);
    if (it != gold_counts.end() && it->second > best) {
      best = it->second;
      report.majority_label = label;
    }
  }
  report.majority_vote_baseline = static_cast<double>(best) / static_cast<double>(report.n);
  report.flagged = static_cast<double>(report.failed) / static_cast<double>(report.total) > opts.flag_failure_rate;
  report.config = config_snapshot(opts, plan.max_tokens);
  report.records = std::move(records);
  return report;
}

}  // namespace

EvalReport run_classification(std::span<const LabeledExample> pool, std::span<const LabeledExample> eval,
                              const TaskLabelSet& labels, const EvalOptions& opts, ScoringBackend& backend) {
  return execute(plan_classification(pool, eval, labels, opts), opts, backend);
}

EvalReport run_multichoice(std::span<const MultiChoiceExample> pool, std::span<const MultiChoiceExample> eval,
                           const EvalOptions& opts, ScoringBackend& backend) {
  return execute(plan_multichoice(pool, eval, opts), opts, backend);
}

EvalReport run_eval(const Dataset& dataset, const EvalOptions& opts, ScoringBackend& backend) {
  if (opts.eval_split == Split::train) throw ConfigError("the train split is the retrieval pool and cannot be evaluated");
  if (const auto* cls = std::get_if<ClassificationDataset>(&dataset)) {
    const auto pool = cls->split(Split::train);
    const auto eval = cls->split(opts.eval_split);
    return run_classification(pool, eval, cls->labels, opts, backend);
  }
  const auto& mc = std::get<MultiChoiceDataset>(dataset);
  const auto pool = mc.split(Split::train);
  const auto eval = mc.split(opts.eval_split);
  return run_multichoice(pool, eval, opts, backend);
}

std::vector<ExamplePrompt> render_prompts(const Dataset& dataset, const EvalOptions& opts) {
  if (opts.eval_split == Split::train) throw ConfigError("the train split is the retrieval pool and cannot be rendered");
  std::vector<ExamplePrompt> out;
  auto collect = [&out](const Plan& plan) {
    for (std::size_t i = 0; i < plan.jobs.size(); ++i) {
      ExamplePrompt p;
      p.example_id = plan.jobs[i].id;
      try {
        p.prompt = plan.render(i);
      } catch (const Error& e) {
        p.error = e.what();
      }
      out.push_back(std::move(p));
    }
  };
  if (const auto* cls = std::get_if<ClassificationDataset>(&dataset)) {
    const auto pool = cls->split(Split::train);
    const auto eval = cls->split(opts.eval_split);
    collect(plan_classification(pool, eval, cls->labels, opts));
  } else {
    const auto& mc = std::get<MultiChoiceDataset>(dataset);
    const auto pool = mc.split(Split::train);
    const auto eval = mc.split(opts.eval_split);
    collect(plan_multichoice(pool, eval, opts));
  }
  return out;
}

PositionChoice select_description_position(const Dataset& dataset, const EvalOptions& opts,
                                           ScoringBackend& backend) {
  const std::size_t dev_size = std::visit([](const auto& d) { return d.split_counts().dev; }, dataset);
  if (dev_size == 0) throw DataError("cannot select a description position: the dev split is empty");
  EvalOptions o = opts;
  o.eval_split = Split::dev;
  o.spec.position = DescriptionPosition::before_examples;
  const double before = run_eval(dataset, o, backend).accuracy;
  o.spec.position = DescriptionPosition::after_examples;
  const double after = run_eval(dataset, o, backend).accuracy;
  return {after > before ? DescriptionPosition::after_examples : DescriptionPosition::before_examples, before, after};
}

json to_json(const EvalRecord& r, bool with_latency) {
  json j = {{"example_id", r.example_id},
            {"prompt_sha256", r.prompt_sha256},
            {"raw_output", r.raw_output},
            {"parsed_label", r.parsed_label ? json(*r.parsed_label) : json(nullptr)},
            {"gold", r.gold},
            {"correct", r.correct},
            {"failed", r.failed},
            {"attempts", r.attempts}};
  if (r.failed) j["error"] = r.error;
  if (with_latency) j["latency_ms"] = r.latency_ms;
  return j;
}

EvalRecord record_from_json(const json& j) {
  EvalRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.prompt_sha256 = j.value("prompt_sha256", std::string());
    r.raw_output = j.value("raw_output", std::string());
    if (j.contains("parsed_label") && !j.at("parsed_label").is_null()) {
      r.parsed_label = j.at("parsed_label").get<std::string>();
    }
    r.gold = j.value("gold", std::string());
    r.correct = j.at("correct").get<bool>();
    r.failed = j.value("failed", false);
    r.error = j.value("error", std::string());
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.attempts = j.value("attempts", 0);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed evaluation record: ") + e.what());
  }
  return r;
}

json to_json(const EvalReport& report) {
  return {{"accuracy", report.accuracy},
          {"n", report.n},
          {"total", report.total},
          {"correct", report.correct},
          {"failed", report.failed},
          {"parse_failures", report.parse_failures},
          {"confusion", report.confusion},
          {"majority_vote_baseline", report.majority_vote_baseline},
          {"majority_label", report.majority_label},
          {"flagged", report.flagged},
          {"config", report.config},
          {"backend", report.backend}};
}

std::string records_to_jsonl(const std::vector<EvalRecord>& records, bool with_latency) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r, with_latency).dump();
    out += '\n';
  }
  return out;
}

std::vector<EvalRecord> parse_records_jsonl(std::string_view content) {
  std::vector<EvalRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    const auto line = trim(content.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (j.is_object() && j.contains("meta") && !j.contains("example_id")) continue;
      out.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lrl
