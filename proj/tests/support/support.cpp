#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "lrl/text.hpp"

namespace lrl::test {

namespace fs = std::filesystem;

std::string data_path(const std::string& relative) { return (fs::path(LRL_TEST_DIR) / relative).string(); }

nlohmann::json load_json(const std::string& relative) { return nlohmann::json::parse(read_file(data_path(relative))); }

std::string temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lrl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

SyntheticCorpus make_model2_corpus(std::uint64_t seed, std::size_t sentences, std::size_t word_types,
                                   double dominant_prob) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string> function_words = {"the", "of", "a"};
  SyntheticCorpus out;
  for (std::size_t k = 0; k < word_types; ++k) {
    out.lexicon.emplace_back("f" + std::to_string(k), "e" + std::to_string(k));
  }
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t m = 3 + rng() % 6;
    std::vector<std::string> target;
    std::vector<std::string> english;
    std::vector<AlignmentLink> links;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t type = rng() % word_types;
      target.push_back(out.lexicon[type].first);
      if (unit(rng) < 0.1) english.push_back(function_words[rng() % function_words.size()]);
      std::string e = out.lexicon[type].second;
      if (unit(rng) >= dominant_prob) e = out.lexicon[(type + 1 + rng() % (word_types - 1)) % word_types].second;
      links.push_back({i, english.size()});
      english.push_back(e);
    }
    if (unit(rng) < 0.3) english.push_back(function_words[rng() % function_words.size()]);
    std::string t;
    std::string e;
    for (const auto& w : target) t += (t.empty() ? "" : " ") + w;
    for (const auto& w : english) e += (e.empty() ? "" : " ") + w;
    out.corpus.pairs.emplace_back(t, e);
    out.truth.push_back(std::move(links));
  }
  return out;
}

std::vector<std::vector<double>> brute_force_posteriors(const AlignmentModel& model, const TextPair& pair) {
  const auto f = split_whitespace(pair.first);
  const auto e = split_whitespace(pair.second);
  const std::size_t m = f.size();
  const std::size_t n = e.size();
  auto delta = [&](std::size_t i, std::size_t j) {
    if (i == 0) return model.null_prob;
    if (!model.favor_diagonal) return (1.0 - model.null_prob) / static_cast<double>(m);
    double z = 0.0;
    for (std::size_t ii = 1; ii <= m; ++ii) {
      z += std::exp(-model.tension * std::fabs(static_cast<double>(ii) / m - static_cast<double>(j) / n));
    }
    return (1.0 - model.null_prob) *
           std::exp(-model.tension * std::fabs(static_cast<double>(i) / m - static_cast<double>(j) / n)) / z;
  };
  auto t = [&](std::size_t i, std::size_t j) {
    return model.translation_prob(i == 0 ? std::string() : f[i - 1], e[j - 1]);
  };
  std::vector<std::vector<double>> post(n, std::vector<double>(m + 1, 0.0));
  std::vector<std::size_t> a(n, 0);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    for (std::size_t j = 1; j <= n; ++j) p *= delta(a[j - 1], j) * t(a[j - 1], j);
    total += p;
    for (std::size_t j = 0; j < n; ++j) post[j][a[j]] += p;
    std::size_t pos = 0;
    while (pos < n && ++a[pos] > m) a[pos++] = 0;
    if (pos == n) break;
  }
  for (auto& row : post) {
    for (auto& v : row) v /= total;
  }
  return post;
}

double bm25_reference(const std::vector<std::string>& docs, const std::string& query, std::size_t doc, double k1,
                      double b) {
  std::vector<std::vector<std::string>> toks;
  double total_len = 0.0;
  for (const auto& d : docs) {
    std::istringstream in(d);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    total_len += static_cast<double>(words.size());
    toks.push_back(std::move(words));
  }
  const double avgdl = total_len / static_cast<double>(docs.size());
  const double big_n = static_cast<double>(docs.size());
  std::istringstream qin(query);
  double score = 0.0;
  for (std::string q; qin >> q;) {
    double df = 0.0;
    for (const auto& words : toks) {
      for (const auto& w : words) {
        if (w == q) {
          df += 1.0;
          break;
        }
      }
    }
    double tf = 0.0;
    for (const auto& w : toks[doc]) tf += w == q ? 1.0 : 0.0;
    const double idf = std::log(1.0 + (big_n - df + 0.5) / (df + 0.5));
    const double len = static_cast<double>(toks[doc].size());
    score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avgdl));
  }
  return score;
}

double pearson_reference(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = sxy - sx * sy / n;
  const long double vx = sxx - sx * sx / n;
  const long double vy = syy - sy * sy / n;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

}  // namespace lrl::test
