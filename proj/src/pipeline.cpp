#include "lrl/pipeline.hpp"

#include <set>

#include "lrl/log.hpp"
#include "lrl/text.hpp"
#include "lrl/tokenizer.hpp"

namespace lrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void strip_latency(json& j) {
  if (j.is_object()) {
    j.erase("latency_ms");
    for (auto& [k, v] : j.items()) strip_latency(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_latency(v);
  }
}

}  // namespace

std::string artifact_hash(const fs::path& file) {
  const std::string content = read_file(file.string());
  const auto ext = file.extension().string();
  try {
    if (ext == ".json") {
      auto j = json::parse(content);
      strip_latency(j);
      return sha256_hex(j.dump());
    }
    if (ext == ".jsonl") {
      std::string canon;
      std::size_t pos = 0;
      while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        const auto line = trim(std::string_view(content).substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) continue;
        auto j = json::parse(line);
        strip_latency(j);
        canon += j.dump();
        canon += '\n';
      }
      return sha256_hex(canon);
    }
  } catch (const json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  return sha256_hex(content);
}

std::string stamped_records(const std::vector<EvalRecord>& records, const json& meta) {
  return json{{"meta", meta}}.dump() + "\n" + records_to_jsonl(records);
}

Dictionary build_dictionary(const ParallelCorpus& corpus, const AlignerOptions& opts) {
  const auto model = train_aligner(corpus, opts);
  return extract_dictionary(model, corpus);
}

EvalReport evaluate_adaptation(const RunConfig& config, const AdaptationConfig& adaptation, const Dataset& dataset,
                               const Dictionary* dictionary, ScoringBackend& backend) {
  auto opts = config.eval_options(adaptation, dictionary);
  json selection = nullptr;
  const bool few_shot = adaptation.variant == Variant::fewshot_plain || adaptation.variant == Variant::fewshot_aligned;
  if (few_shot && !adaptation.position) {
    const auto choice = select_description_position(dataset, opts, backend);
    opts.spec.position = choice.position;
    selection = {{"selected", std::string(to_string(choice.position))},
                 {"dev_accuracy_before", choice.before_accuracy},
                 {"dev_accuracy_after", choice.after_accuracy}};
  }
  auto report = run_eval(dataset, opts, backend);
  report.config["position_selection"] = selection;
  return report;
}

namespace {

class Bundle {
 public:
  Bundle(fs::path dir, json meta) : dir_(std::move(dir)), meta_(std::move(meta)) {
    fs::create_directories(dir_);
    write_manifest("running");
  }

  void begin(std::string stage) { current_ = std::move(stage); }

  void add(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    write_file(path.string(), content);
    artifacts_.push_back({{"path", name}, {"sha256", artifact_hash(path)}, {"stage", current_}});
  }

  void complete() {
    completed_.push_back(current_);
    write_manifest("running");
  }

  void fail(const std::string& error) {
    failed_stage_ = current_;
    error_ = error;
    write_manifest("failed");
  }

  json finish() { return write_manifest("complete"); }

  const std::string& current() const { return current_; }

 private:
  json write_manifest(const std::string& status) {
    json m = {{"meta", meta_}, {"status", status}, {"completed_stages", completed_}, {"artifacts", artifacts_}};
    if (!failed_stage_.empty()) {
      m["failed_stage"] = failed_stage_;
      m["error"] = error_;
    }
    write_file((dir_ / "manifest.json").string(), m.dump(2) + "\n");
    return m;
  }

  fs::path dir_;
  json meta_;
  std::string current_;
  std::vector<std::string> completed_;
  json artifacts_ = json::array();
  std::string failed_stage_;
  std::string error_;
};

std::string stamp_line(const json& meta) {
  return "config_hash: " + meta.at("config_hash").get<std::string>() +
         ", version: " + meta.at("version").get<std::string>() + ", seed: " + meta.at("seed").dump();
}

json stamped(json body, const json& meta) {
  body["meta"] = meta;
  return body;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, std::shared_ptr<ScoringBackend> backend) {
  config.validate();
  {
    std::set<std::string> names = {"baseline_zero"};
    for (const auto& a : config.adaptations) {
      if (!names.insert(a.name()).second) throw ConfigError("adaptation '" + a.name() + "' is listed twice");
    }
  }
  const auto meta = run_meta(config);
  PipelineResult result;
  result.output_dir = config.output_dir;
  Bundle bundle(result.output_dir, meta);

  try {
    bundle.begin("load");
    const auto dataset = load_run_dataset(config);
    const auto parallel = load_run_parallel(config, dataset);
    if (!backend) backend = make_backend(config.backend, dataset);

    bundle.begin("dictionary");
    const Dictionary dictionary =
        config.dictionary.empty() ? build_dictionary(parallel, config.aligner) : load_dictionary(config.dictionary);
    bundle.add("dictionary.tsv", "# " + stamp_line(meta) + "\n" + to_tsv(dictionary));
    bundle.complete();

    bundle.begin("diagnose");
    const auto tokenizer = load_tokenizer(config.tokenizer);
    result.profile = profile_language(parallel, *tokenizer, *backend);
    bundle.add("profile.json", stamped(to_json(result.profile), meta).dump(2) + "\n");
    bundle.complete();

    auto evaluate = [&](const AdaptationConfig& a) {
      auto report = evaluate_adaptation(config, a, dataset, &dictionary, *backend);
      const auto name = a.name();
      bundle.add("eval_" + name + ".json", stamped(to_json(report), meta).dump(2) + "\n");
      bundle.add("records_" + name + ".jsonl", stamped_records(report.records, meta));
      if (report.flagged) {
        log::warn("run " + name + " flagged: " + std::to_string(report.failed) + " of " +
                  std::to_string(report.total) + " examples failed");
        result.flagged = true;
      }
      result.reports.emplace(name, std::move(report));
      bundle.complete();
    };

    bundle.begin("baseline");
    evaluate(AdaptationConfig{});
    for (const auto& a : config.adaptations) {
      bundle.begin("adapt:" + a.name());
      evaluate(a);
    }

    bundle.begin("compare");
    const auto& base = result.reports.at("baseline_zero");
    json comparisons = json::array();
    for (const auto& a : config.adaptations) {
      const auto& other = result.reports.at(a.name());
      auto r = paired_chi_squared(base.records, other.records);
      json entry = to_json(r);
      entry["a"] = "baseline_zero";
      entry["b"] = a.name();
      entry["accuracy_a"] = base.accuracy;
      entry["accuracy_b"] = other.accuracy;
      comparisons.push_back(entry);
      result.comparisons.emplace_back(a.name(), r);
    }
    bundle.add("comparisons.json", stamped({{"comparisons", comparisons}}, meta).dump(2) + "\n");
    bundle.complete();

    bundle.begin("recommend");
    result.profile.baseline_accuracy = base.accuracy;
    result.recommendation = recommend(result.profile, config.thresholds);
    bundle.add("recommendation.json",
               stamped({{"profile", to_json(result.profile)}, {"recommendation", to_json(result.recommendation)}}, meta)
                       .dump(2) +
                   "\n");
    bundle.add("recommendation.md",
               to_markdown(result.recommendation, result.profile) + "\n" + stamp_line(meta) + "\n");
    bundle.complete();
  } catch (const std::exception& e) {
    const std::string stage = bundle.current();
    bundle.fail(e.what());
    throw PipelineError(stage, e.what(), std::current_exception());
  }
  result.manifest = bundle.finish();
  return result;
}

}  // namespace lrl
