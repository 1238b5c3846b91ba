#include "lrl/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>

#include "lrl/error.hpp"
#include "lrl/http_backend.hpp"
#include "lrl/mock_backend.hpp"
#include "lrl/text.hpp"
#include "lrl/version.hpp"

namespace lrl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string AdaptationConfig::name() const {
  std::string n(to_string(variant));
  if (variant_uses_examples(variant)) n += "-k" + std::to_string(k);
  if (position) n += "-" + std::string(to_string(*position));
  return n;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || path == "bytes" || path.starts_with("http://") ||
      path.starts_with("https://") || fs::path(path).is_absolute()) {
    return path;
  }
  return (fs::path(base_dir) / path).lexically_normal().string();
}

AdaptationConfig adaptation_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"variant", "k", "position"}, where);
  AdaptationConfig a;
  a.variant = parse_variant(j.value("variant", std::string("baseline_zero")));
  a.k = j.value("k", 0);
  if (j.contains("position") && !j.at("position").is_null()) {
    const auto p = j.at("position").get<std::string>();
    if (p != "auto") a.position = parse_position(p);
  }
  return a;
}

json adaptation_to_json(const AdaptationConfig& a) {
  return {{"variant", std::string(to_string(a.variant))},
          {"k", a.k},
          {"position", a.position ? std::string(to_string(*a.position)) : std::string("auto")}};
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  try {
    reject_unknown(j,
                   {"language", "dataset", "parallel", "tokenizer", "dictionary", "backend", "eval", "adaptations",
                    "retrieval", "seed", "concurrency", "max_tokens", "split", "retry_backoff_scale", "aligner",
                    "thresholds", "output_dir"},
                   "");
    if (j.contains("language")) {
      const auto& l = j.at("language");
      reject_unknown(l, {"code", "name"}, "language.");
      c.language_code = l.value("code", std::string());
      c.language_name = l.value("name", c.language_code);
    }
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      reject_unknown(d, {"path", "format", "task"}, "dataset.");
      c.dataset = resolve(d.value("path", std::string()), base_dir);
      c.format = parse_format(d.value("format", std::string("jsonl")));
      c.task = parse_task(d.value("task", std::string("classification")));
    }
    c.parallel = resolve(j.value("parallel", std::string()), base_dir);
    c.tokenizer = resolve(j.value("tokenizer", std::string("bytes")), base_dir);
    c.dictionary = resolve(j.value("dictionary", std::string()), base_dir);
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      reject_unknown(b, {"kind", "url", "model", "chat", "timeout_seconds"}, "backend.");
      c.backend.kind = b.value("kind", c.backend.kind);
      c.backend.url = b.value("url", std::string());
      c.backend.model = b.value("model", std::string());
      c.backend.chat = b.value("chat", false);
      c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
    }
    if (j.contains("eval")) c.eval = adaptation_from_json(j.at("eval"), "eval.");
    if (j.contains("adaptations")) {
      for (const auto& a : j.at("adaptations")) c.adaptations.push_back(adaptation_from_json(a, "adaptations[]."));
    }
    if (j.contains("retrieval")) c.retrieval = parse_retrieval_mode(j.at("retrieval").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{0});
    c.concurrency = j.value("concurrency", std::size_t{4});
    c.max_tokens = j.value("max_tokens", 0);
    c.split = parse_split(j.value("split", std::string("test")));
    c.retry_backoff_scale = j.value("retry_backoff_scale", 1.0);
    if (j.contains("aligner")) {
      const auto& a = j.at("aligner");
      reject_unknown(a, {"iterations", "initial_tension", "optimize_tension", "favor_diagonal", "null_prob", "alpha"},
                     "aligner.");
      c.aligner.iterations = a.value("iterations", c.aligner.iterations);
      c.aligner.initial_tension = a.value("initial_tension", c.aligner.initial_tension);
      c.aligner.optimize_tension = a.value("optimize_tension", c.aligner.optimize_tension);
      c.aligner.favor_diagonal = a.value("favor_diagonal", c.aligner.favor_diagonal);
      c.aligner.null_prob = a.value("null_prob", c.aligner.null_prob);
      c.aligner.alpha = a.value("alpha", c.aligner.alpha);
    }
    if (j.contains("thresholds")) c.thresholds = thresholds_from_json(j.at("thresholds"));
    c.output_dir = resolve(j.value("output_dir", c.output_dir), base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string content;
  try {
    content = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

json RunConfig::to_json() const {
  json adaptations_json = json::array();
  for (const auto& a : adaptations) adaptations_json.push_back(adaptation_to_json(a));
  return {{"language", {{"code", language_code}, {"name", language_name}}},
          {"dataset",
           {{"path", dataset},
            {"format", format == DataFormat::jsonl ? "jsonl" : "tsv"},
            {"task", std::string(lrl::to_string(task))}}},
          {"parallel", parallel},
          {"tokenizer", tokenizer},
          {"dictionary", dictionary},
          {"backend",
           {{"kind", backend.kind},
            {"url", backend.url},
            {"model", backend.model},
            {"chat", backend.chat},
            {"timeout_seconds", backend.timeout_seconds}}},
          {"eval", adaptation_to_json(eval)},
          {"adaptations", adaptations_json},
          {"retrieval", std::string(lrl::to_string(retrieval))},
          {"seed", seed},
          {"concurrency", concurrency},
          {"max_tokens", max_tokens},
          {"split", std::string(lrl::to_string(split))},
          {"retry_backoff_scale", retry_backoff_scale},
          {"aligner",
           {{"iterations", aligner.iterations},
            {"initial_tension", aligner.initial_tension},
            {"optimize_tension", aligner.optimize_tension},
            {"favor_diagonal", aligner.favor_diagonal},
            {"null_prob", aligner.null_prob},
            {"alpha", aligner.alpha}}},
          {"thresholds", lrl::to_json(thresholds)},
          {"output_dir", output_dir}};
}

void RunConfig::validate(bool need_dataset, bool need_prompt) const {
  auto require_file = [](const std::string& what, const std::string& path) {
    if (!fs::is_regular_file(path)) throw ConfigError(what + " file not found: " + path);
  };
  if (need_dataset && dataset.empty()) throw ConfigError("no dataset configured (dataset.path or --dataset)");
  if (!dataset.empty()) require_file("dataset", dataset);
  if (!need_dataset && dataset.empty() && parallel.empty()) {
    throw ConfigError("no parallel text configured (--parallel or --dataset)");
  }
  if (!parallel.empty()) require_file("parallel text", parallel);
  if (!dictionary.empty()) require_file("dictionary", dictionary);
  if (tokenizer != "bytes" && !tokenizer.starts_with("http://") && !tokenizer.starts_with("https://")) {
    require_file("tokenizer", tokenizer);
  }
  if (need_prompt && language_name.empty()) throw ConfigError("no language name configured (language.name or --language-name)");
  if (split == Split::train) throw ConfigError("the train split is the retrieval pool and cannot be evaluated");
  if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
  if (retry_backoff_scale < 0.0) throw ConfigError("retry_backoff_scale must be >= 0");
  if (aligner.iterations < 1) throw ConfigError("aligner.iterations must be at least 1");
  if (backend.kind == "http") {
    const char* env_url = std::getenv("LRL_BASE_URL");
    if (backend.url.empty() && !(env_url && *env_url)) {
      throw ConfigError("http backend needs backend.url, --backend-url or $LRL_BASE_URL");
    }
  } else if (backend.kind != "none" && backend.kind != "mock:oracle" && backend.kind != "mock:keyword" &&
             backend.kind != "mock:majority" && !backend.kind.starts_with("mock:constant:")) {
    throw ConfigError("unknown backend kind '" + backend.kind + "'");
  }
  auto check = [this](const AdaptationConfig& a) {
    PromptSpec spec;
    spec.variant = a.variant;
    spec.k = a.k;
    spec.task = task;
    spec.language_name = language_name;
    spec.validate();
  };
  if (!need_prompt) return;
  check(eval);
  for (const auto& a : adaptations) check(a);
}

std::string RunConfig::hash() const {
  auto j = to_json();
  // Where outputs go and how many requests run at once do not change results.
  j.erase("output_dir");
  j.erase("concurrency");
  return sha256_hex(j.dump());
}

EvalOptions RunConfig::eval_options(const AdaptationConfig& adaptation, const Dictionary* dict) const {
  EvalOptions o;
  o.spec.variant = adaptation.variant;
  o.spec.k = adaptation.k;
  o.spec.task = task;
  o.spec.language_name = language_name;
  o.spec.position = adaptation.position.value_or(default_position(adaptation.variant));
  o.retrieval.mode = retrieval;
  o.retrieval.seed = seed;
  o.max_tokens = max_tokens;
  o.concurrency = concurrency;
  o.retry.backoff_scale = retry_backoff_scale;
  o.dictionary = dict;
  o.eval_split = split;
  return o;
}

json run_meta(const RunConfig& config) {
  return {{"config_hash", config.hash()}, {"version", kToolkitVersion}, {"seed", config.seed}};
}

std::shared_ptr<ScoringBackend> make_backend(const BackendConfig& cfg, const Dataset& dataset) {
  if (cfg.kind == "mock:oracle") return make_oracle_backend(dataset);
  if (cfg.kind == "mock:keyword") {
    const auto* cls = std::get_if<ClassificationDataset>(&dataset);
    return make_keyword_backend(cls ? cls->labels : TaskLabelSet::sib_topics());
  }
  if (cfg.kind.starts_with("mock:constant:")) return make_constant_backend(cfg.kind.substr(14));
  if (cfg.kind == "mock:majority") {
    std::vector<std::string> order;
    std::map<std::string, std::size_t> counts;
    if (const auto* cls = std::get_if<ClassificationDataset>(&dataset)) {
      order = cls->labels.labels();
      for (const auto& e : cls->examples) counts[e.label] += e.split == Split::train ? 1 : 0;
    } else {
      order = {"A", "B", "C", "D"};
      for (const auto& e : std::get<MultiChoiceDataset>(dataset).examples) {
        counts[std::string(1, static_cast<char>('A' + e.answer_index))] += e.split == Split::train ? 1 : 0;
      }
    }
    std::string best = order.front();
    for (const auto& l : order) {
      if (counts[l] > counts[best]) best = l;
    }
    return make_constant_backend(best);
  }
  if (cfg.kind == "http") {
    HttpBackendOptions o;
    o.base_url = cfg.url;
    o.model = cfg.model;
    if (o.base_url.empty()) {
      if (const char* v = std::getenv("LRL_BASE_URL")) o.base_url = v;
    }
    if (o.model.empty()) {
      if (const char* v = std::getenv("LRL_MODEL")) o.model = v;
    }
    o.chat = cfg.chat;
    o.timeout_seconds = cfg.timeout_seconds;
    return std::make_shared<HttpBackend>(o);
  }
  if (cfg.kind == "none") throw ConfigError("this command needs a backend (backend kind is 'none')");
  throw ConfigError("unknown backend kind '" + cfg.kind + "'");
}

Dataset load_run_dataset(const RunConfig& config) {
  return load_dataset(config.dataset, config.format, config.task);
}

ParallelCorpus load_run_parallel(const RunConfig& config, const Dataset& dataset) {
  if (!config.parallel.empty()) return load_parallel_text(config.parallel, config.language_code);
  if (const auto* cls = std::get_if<ClassificationDataset>(&dataset)) {
    const auto train = cls->split(Split::train);
    return make_parallel(std::span<const LabeledExample>(train), config.language_code);
  }
  const auto train = std::get<MultiChoiceDataset>(dataset).split(Split::train);
  return make_parallel(std::span<const MultiChoiceExample>(train), config.language_code);
}

}  // namespace lrl
