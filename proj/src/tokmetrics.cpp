#include "lrl/tokmetrics.hpp"

#include <atomic>
#include <thread>

#include "lrl/error.hpp"
#include "lrl/log.hpp"
#include "lrl/text.hpp"

namespace lrl {

double token_to_byte_ratio(std::string_view text, const Tokenizer& tok) {
  if (text.empty()) throw DataError("token-to-byte ratio of an empty text is undefined");
  return static_cast<double>(tok.count_tokens(text)) / static_cast<double>(text.size());
}

double tokenizer_parity(const TextPair& pair, const Tokenizer& tok) {
  if (pair.first.empty() || pair.second.empty()) throw DataError("tokenizer parity needs two non-empty texts");
  const auto target = tok.count_tokens(pair.first);
  const auto english = tok.count_tokens(pair.second);
  if (target == 0) throw DataError("target text produced no tokens");
  return static_cast<double>(english) / static_cast<double>(target);
}

double information_parity(const TextPair& pair, ScoringBackend& backend) {
  if (pair.first.empty() || pair.second.empty()) throw DataError("information parity needs two non-empty texts");
  const double nll_target = backend.score(pair.first).nll;
  const double nll_english = backend.score(pair.second).nll;
  if (nll_target == 0.0) throw DataError("target text has zero negative log-likelihood");
  const double ip = nll_english / nll_target;
  if (!(ip > 0.0)) throw DataError("information parity is not positive; the backend returned inconsistent scores");
  return ip;
}

namespace {

struct PairMetrics {
  double tbr = 0.0;
  double tp = 0.0;
  double ip = 0.0;
  bool ok = false;
  bool unreachable = false;
  std::string error;
};

LanguageProfile aggregate(const ParallelCorpus& corpus, const std::vector<PairMetrics>& results, bool with_ip) {
  std::vector<double> tbr;
  std::vector<double> tp;
  std::vector<double> ip;
  std::size_t failed = 0;
  bool all_unreachable = true;
  std::string last_error;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      all_unreachable = all_unreachable && r.unreachable;
      last_error = r.error;
      continue;
    }
    tbr.push_back(r.tbr);
    tp.push_back(r.tp);
    ip.push_back(r.ip);
  }
  if (tbr.empty()) {
    const std::string msg = "all " + std::to_string(results.size()) + " pairs failed; last error: " + last_error;
    if (with_ip && all_unreachable) throw BackendUnreachable(msg, "");
    throw DataError(msg);
  }
  if (failed > 0) log::warn("profile: skipped " + std::to_string(failed) + " of " + std::to_string(results.size()) + " pairs");
  LanguageProfile p;
  p.language_code = corpus.language_code;
  const auto n = static_cast<double>(tbr.size());
  p.tbr = pairwise_sum(tbr) / n;
  p.tp = pairwise_sum(tp) / n;
  p.ip = with_ip ? pairwise_sum(ip) / n : 0.0;
  p.sample_count = tbr.size();
  p.skipped = failed;
  return p;
}

}  // namespace

LanguageProfile profile_language(const ParallelCorpus& corpus, const Tokenizer& tok, ScoringBackend& backend,
                                 const ProfileOptions& opts) {
  if (corpus.empty()) throw DataError("cannot profile an empty corpus");
  std::vector<PairMetrics> results(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < corpus.size(); k = next++) {
      auto& r = results[k];
      try {
        const auto& pair = corpus.pairs[k];
        r.tbr = token_to_byte_ratio(pair.first, tok);
        r.tp = tokenizer_parity(pair, tok);
        r.ip = information_parity(pair, backend);
        r.ok = true;
      } catch (const BackendUnreachable& e) {
        r.unreachable = true;
        r.error = e.what();
      } catch (const Error& e) {
        r.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.threads, corpus.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  auto p = aggregate(corpus, results, true);
  p.tokenizer = tok.name();
  p.backend = backend.identity();
  return p;
}

LanguageProfile profile_tokenizer(const ParallelCorpus& corpus, const Tokenizer& tok) {
  if (corpus.empty()) throw DataError("cannot profile an empty corpus");
  std::vector<PairMetrics> results(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    auto& r = results[k];
    try {
      r.tbr = token_to_byte_ratio(corpus.pairs[k].first, tok);
      r.tp = tokenizer_parity(corpus.pairs[k], tok);
      r.ok = true;
    } catch (const Error& e) {
      r.error = e.what();
    }
  }
  auto p = aggregate(corpus, results, false);
  p.tokenizer = tok.name();
  return p;
}

nlohmann::json to_json(const LanguageProfile& profile) {
  nlohmann::json j = nlohmann::json::object();
  j["language"] = profile.language_code;
  j["ip"] = profile.backend.empty() ? nlohmann::json(nullptr) : nlohmann::json(profile.ip);
  j["tbr"] = profile.tbr;
  j["tp"] = profile.tp;
  j["baseline_accuracy"] =
      profile.baseline_accuracy ? nlohmann::json(*profile.baseline_accuracy) : nlohmann::json(nullptr);
  j["n"] = profile.sample_count;
  j["skipped"] = profile.skipped;
  j["meta"] = {{"ip_orientation", "nll_english/nll_target"},
               {"aggregation", "mean_of_per_pair_ratios"},
               {"tokenizer", profile.tokenizer},
               {"backend", profile.backend}};
  return j;
}

LanguageProfile profile_from_json(const nlohmann::json& j) {
  LanguageProfile p;
  try {
    p.language_code = j.value("language", std::string());
    if (j.contains("ip") && !j.at("ip").is_null()) p.ip = j.at("ip").get<double>();
    p.tbr = j.at("tbr").get<double>();
    p.tp = j.value("tp", 0.0);
    if (j.contains("baseline_accuracy") && !j.at("baseline_accuracy").is_null()) {
      p.baseline_accuracy = j.at("baseline_accuracy").get<double>();
    }
    p.sample_count = j.value("n", std::size_t{0});
    p.skipped = j.value("skipped", std::size_t{0});
    if (j.contains("meta")) {
      p.tokenizer = j.at("meta").value("tokenizer", std::string());
      p.backend = j.at("meta").value("backend", std::string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed language profile: ") + e.what());
  }
  return p;
}

}  // namespace lrl
