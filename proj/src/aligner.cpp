#include "lrl/aligner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

int Vocabulary::add(std::string_view word) {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(words_.size());
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  return id;
}

int Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

namespace {

constexpr int kNullWord = -1;
constexpr std::size_t kChunkSize = 64;

double diagonal_feature(std::size_t i, std::size_t j, std::size_t m, std::size_t n) {
  return -std::fabs(static_cast<double>(i) / static_cast<double>(m) - static_cast<double>(j) / static_cast<double>(n));
}

// exp(lambda * h) for i = 1..m at English position j, plus their sum.
double diagonal_weights(double lambda, std::size_t j, std::size_t m, std::size_t n, std::vector<double>& w) {
  w.resize(m + 1);
  w[0] = 0.0;
  double z = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    w[i] = std::exp(lambda * diagonal_feature(i, j, m, n));
    z += w[i];
  }
  return z;
}

struct Sentence {
  std::vector<int> f;
  std::vector<int> e;
};

struct ChunkResult {
  double log_likelihood = 0.0;
  double empirical_feature = 0.0;
  std::unordered_map<std::uint64_t, double> counts;  // (row, e) -> expected count
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> non_null_mass;  // (m, n) -> per-j mass
};

std::uint64_t count_key(std::size_t row, int e) {
  return (static_cast<std::uint64_t>(row) << 32) | static_cast<std::uint32_t>(e);
}

// Computes link posteriors for one sentence pair into post[j-1][i] and
// returns the log-likelihood of the English side.
double sentence_posteriors(const AlignmentModel& model, const std::vector<int>& f, const std::vector<int>& e,
                           std::vector<std::vector<double>>& post) {
  const std::size_t m = f.size();
  const std::size_t n = e.size();
  post.assign(n, std::vector<double>(m + 1, 0.0));
  std::vector<double> w;
  double ll = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    auto& p = post[j - 1];
    const int ej = e[j - 1];
    p[0] = model.null_prob * model.prob(kNullWord, ej);
    if (model.favor_diagonal) {
      const double z = diagonal_weights(model.tension, j, m, n, w);
      for (std::size_t i = 1; i <= m; ++i) p[i] = (1.0 - model.null_prob) * w[i] / z * model.prob(f[i - 1], ej);
    } else {
      for (std::size_t i = 1; i <= m; ++i) {
        p[i] = (1.0 - model.null_prob) / static_cast<double>(m) * model.prob(f[i - 1], ej);
      }
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    if (!(sum > 0.0)) throw Error("alignment model assigns zero probability to an English word");
    for (double& v : p) v /= sum;
    ll += std::log(sum);
  }
  return ll;
}

void accumulate_sentence(const AlignmentModel& model, const Sentence& s, ChunkResult& out,
                         std::vector<std::vector<double>>& post) {
  out.log_likelihood += sentence_posteriors(model, s.f, s.e, post);
  const std::size_t m = s.f.size();
  const std::size_t n = s.e.size();
  auto& mass = out.non_null_mass[{m, n}];
  if (mass.empty()) mass.assign(n, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& p = post[j - 1];
    const int ej = s.e[j - 1];
    out.counts[count_key(0, ej)] += p[0];
    double non_null = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
      out.counts[count_key(static_cast<std::size_t>(s.f[i - 1]) + 1, ej)] += p[i];
      out.empirical_feature += p[i] * diagonal_feature(i, j, m, n);
      non_null += p[i];
    }
    mass[j - 1] += non_null;
  }
}

ChunkResult e_step(const AlignmentModel& model, const std::vector<Sentence>& corpus, std::size_t threads) {
  const std::size_t n_chunks = (corpus.size() + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkResult> chunks(n_chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<std::vector<double>> post;
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      const std::size_t end = std::min(corpus.size(), (c + 1) * kChunkSize);
      for (std::size_t k = c * kChunkSize; k < end; ++k) accumulate_sentence(model, corpus[k], chunks[c], post);
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, n_chunks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // fixed-order reduction
  ChunkResult total;
  for (auto& c : chunks) {
    total.log_likelihood += c.log_likelihood;
    total.empirical_feature += c.empirical_feature;
    for (const auto& [k, v] : c.counts) total.counts[k] += v;
    for (const auto& [mn, mass] : c.non_null_mass) {
      auto& dst = total.non_null_mass[mn];
      if (dst.empty()) dst.assign(mass.size(), 0.0);
      for (std::size_t j = 0; j < mass.size(); ++j) dst[j] += mass[j];
    }
  }
  return total;
}

double log_prior(const AlignmentModel& model) {
  if (model.alpha == 0.0) return 0.0;
  const auto n_e = static_cast<double>(model.english_vocab.size());
  double s = 0.0;
  for (const auto& row : model.rows) {
    for (const auto& [e, p] : row.probs) s += std::log(p);
    const double rest = n_e - static_cast<double>(row.probs.size());
    if (rest > 0.0) s += rest * std::log(row.floor);
  }
  return model.alpha * s;
}

void m_step(AlignmentModel& model, const ChunkResult& stats) {
  const auto n_e = static_cast<double>(model.english_vocab.size());
  std::vector<double> totals(model.rows.size(), 0.0);
  for (auto& row : model.rows) row.probs.clear();
  for (const auto& [k, c] : stats.counts) {
    const auto row = static_cast<std::size_t>(k >> 32);
    const int e = static_cast<int>(k & 0xFFFFFFFFu);
    model.rows[row].probs[e] = c;
    totals[row] += c;
  }
  for (std::size_t r = 0; r < model.rows.size(); ++r) {
    auto& row = model.rows[r];
    const double denom = totals[r] + model.alpha * n_e;
    if (!(denom > 0.0)) {
      row.probs.clear();
      row.floor = 1.0 / n_e;
      continue;
    }
    for (auto& [e, v] : row.probs) v = (v + model.alpha) / denom;
    row.floor = model.alpha / denom;
  }
}

// Distortion part of the expected complete-data log-likelihood, up to
// constants, and its derivative in lambda.
double tension_objective(double lambda, const ChunkResult& stats) {
  double q = lambda * stats.empirical_feature;
  std::vector<double> w;
  for (const auto& [mn, mass] : stats.non_null_mass) {
    const auto [m, n] = mn;
    for (std::size_t j = 1; j <= n; ++j) {
      if (mass[j - 1] == 0.0) continue;
      q -= mass[j - 1] * std::log(diagonal_weights(lambda, j, m, n, w));
    }
  }
  return q;
}

double tension_gradient(double lambda, const ChunkResult& stats) {
  double g = stats.empirical_feature;
  std::vector<double> w;
  for (const auto& [mn, mass] : stats.non_null_mass) {
    const auto [m, n] = mn;
    for (std::size_t j = 1; j <= n; ++j) {
      if (mass[j - 1] == 0.0) continue;
      const double z = diagonal_weights(lambda, j, m, n, w);
      double expected = 0.0;
      for (std::size_t i = 1; i <= m; ++i) expected += w[i] * diagonal_feature(i, j, m, n);
      g -= mass[j - 1] * expected / z;
    }
  }
  return g;
}

void update_tension(AlignmentModel& model, const ChunkResult& stats) {
  double lo = 0.1;
  double hi = 14.0;
  for (int step = 0; step < 8; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (tension_gradient(mid, stats) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double candidate = 0.5 * (lo + hi);
  if (tension_objective(candidate, stats) >= tension_objective(model.tension, stats)) model.tension = candidate;
}

std::vector<int> lookup_tokens(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.find(t));
  return ids;
}

// Unknown target words are mapped below kNullWord so prob() treats them as OOV.
std::vector<int> lookup_target(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  auto ids = lookup_tokens(vocab, tokens);
  for (int& id : ids) {
    if (id < 0) id = -2;
  }
  return ids;
}

}  // namespace

double AlignmentModel::prob(int f, int e) const {
  const auto n_e = static_cast<double>(english_vocab.size());
  if (e < 0 || static_cast<std::size_t>(e) >= english_vocab.size() || f < kNullWord ||
      static_cast<std::size_t>(f + 1) >= rows.size()) {
    return n_e > 0 ? 1.0 / n_e : 0.0;
  }
  const auto& row = rows[static_cast<std::size_t>(f + 1)];
  auto it = row.probs.find(e);
  return it == row.probs.end() ? row.floor : it->second;
}

double AlignmentModel::translation_prob(std::string_view target_word, std::string_view english_word) const {
  const int f = target_word.empty() ? kNullWord : target_vocab.find(target_word);
  return prob(f < 0 && !target_word.empty() ? -2 : f, english_vocab.find(english_word));
}

double AlignmentModel::row_sum(int f) const {
  const auto& row = rows.at(static_cast<std::size_t>(f + 1));
  double s = 0.0;
  for (const auto& [e, p] : row.probs) s += p;
  s += static_cast<double>(english_vocab.size() - row.probs.size()) * row.floor;
  return s;
}

double AlignmentModel::distortion(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const {
  if (i == 0) return null_prob;
  if (!favor_diagonal) return (1.0 - null_prob) / static_cast<double>(m);
  std::vector<double> w;
  const double z = diagonal_weights(tension, j, m, n, w);
  return (1.0 - null_prob) * w[i] / z;
}

AlignmentModel train_aligner(const ParallelCorpus& corpus, const AlignerOptions& opts) {
  if (corpus.empty()) throw DataError("cannot train an aligner on an empty corpus");
  if (opts.iterations < 1) throw ConfigError("aligner iterations must be >= 1");
  if (!(opts.null_prob >= 0.0 && opts.null_prob < 1.0)) throw ConfigError("null probability must be in [0, 1)");
  if (!(opts.alpha >= 0.0)) throw ConfigError("smoothing alpha must be >= 0");
  if (!(opts.initial_tension > 0.0)) throw ConfigError("diagonal tension must be > 0");

  AlignmentModel model;
  model.tension = opts.initial_tension;
  model.null_prob = opts.null_prob;
  model.alpha = opts.alpha;
  model.favor_diagonal = opts.favor_diagonal;

  std::vector<Sentence> sentences;
  sentences.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.pairs.size(); ++k) {
    const auto& [tgt, eng] = corpus.pairs[k];
    const auto ft = split_whitespace(tgt);
    const auto et = split_whitespace(eng);
    if (ft.empty() || et.empty()) {
      throw DataError("parallel pair " + std::to_string(k + 1) + " has an empty side after whitespace splitting");
    }
    if (ft.size() > opts.max_sentence_length || et.size() > opts.max_sentence_length) {
      throw DataError("parallel pair " + std::to_string(k + 1) + " exceeds " +
                      std::to_string(opts.max_sentence_length) + " tokens");
    }
    Sentence s;
    for (const auto& w : ft) s.f.push_back(model.target_vocab.add(w));
    for (const auto& w : et) s.e.push_back(model.english_vocab.add(w));
    sentences.push_back(std::move(s));
  }

  model.rows.assign(model.target_vocab.size() + 1, {});
  for (auto& row : model.rows) row.floor = 1.0 / static_cast<double>(model.english_vocab.size());

  std::size_t threads = opts.threads;
  if (threads == 0) threads = std::min<std::size_t>(8, std::max(1u, std::thread::hardware_concurrency()));

  for (int iter = 0; iter < opts.iterations; ++iter) {
    const ChunkResult stats = e_step(model, sentences, threads);
    model.log_likelihood_history.push_back(stats.log_likelihood);
    model.objective_history.push_back(stats.log_likelihood + log_prior(model));
    model.tension_history.push_back(model.tension);
    m_step(model, stats);
    if (opts.favor_diagonal && opts.optimize_tension && iter > 0) update_tension(model, stats);
  }
  const ChunkResult final_stats = e_step(model, sentences, threads);
  model.log_likelihood_history.push_back(final_stats.log_likelihood);
  model.objective_history.push_back(final_stats.log_likelihood + log_prior(model));
  model.tension_history.push_back(model.tension);
  return model;
}

std::vector<std::vector<double>> alignment_posteriors(const AlignmentModel& model, const TextPair& pair) {
  if (model.empty()) throw Error("alignment model is empty");
  const auto f = lookup_target(model.target_vocab, split_whitespace(pair.first));
  const auto e = lookup_tokens(model.english_vocab, split_whitespace(pair.second));
  std::vector<std::vector<double>> post;
  if (f.empty() || e.empty()) return post;
  sentence_posteriors(model, f, e, post);
  return post;
}

SentenceAlignment viterbi_align(const AlignmentModel& model, const TextPair& pair) {
  if (model.empty()) throw Error("alignment model is empty");
  const auto f = lookup_target(model.target_vocab, split_whitespace(pair.first));
  const auto e = lookup_tokens(model.english_vocab, split_whitespace(pair.second));
  SentenceAlignment out;
  const std::size_t m = f.size();
  const std::size_t n = e.size();
  if (m == 0 || n == 0) return out;
  std::vector<double> w;
  for (std::size_t j = 1; j <= n; ++j) {
    double best = model.null_prob * model.prob(kNullWord, e[j - 1]);
    std::size_t best_i = 0;
    double z = 0.0;
    if (model.favor_diagonal) z = diagonal_weights(model.tension, j, m, n, w);
    for (std::size_t i = 1; i <= m; ++i) {
      const double d = model.favor_diagonal ? (1.0 - model.null_prob) * w[i] / z
                                            : (1.0 - model.null_prob) / static_cast<double>(m);
      const double score = d * model.prob(f[i - 1], e[j - 1]);
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    if (best_i > 0) out.links.push_back({best_i - 1, j - 1});
  }
  return out;
}

Dictionary extract_dictionary(const AlignmentModel& model, const ParallelCorpus& corpus) {
  if (model.empty() || model.target_vocab.size() == 0) throw Error("cannot extract a dictionary from an empty model");
  std::set<std::string> vocabulary;
  std::set<std::string> linked;
  for (const auto& pair : corpus.pairs) {
    const auto tokens = split_whitespace(pair.first);
    vocabulary.insert(tokens.begin(), tokens.end());
    for (const auto& link : viterbi_align(model, pair).links) linked.insert(tokens[link.target_index]);
  }
  Dictionary dict;
  dict.vocabulary_size = vocabulary.size();
  for (const auto& word : linked) {
    const int f = model.target_vocab.find(word);
    if (f < 0) continue;
    const auto& row = model.rows[static_cast<std::size_t>(f) + 1];
    const std::string* best_word = nullptr;
    double best = -1.0;
    for (const auto& [e, p] : row.probs) {
      const std::string& ew = model.english_vocab.word(e);
      if (p > best || (p == best && ew < *best_word)) {
        best = p;
        best_word = &ew;
      }
    }
    if (best_word && best > 0.0) dict.entries.emplace(word, DictionaryEntry{*best_word, std::min(best, 1.0)});
  }
  return dict;
}

std::string pharaoh_format(const SentenceAlignment& alignment) {
  auto links = alignment.links;
  std::sort(links.begin(), links.end(), [](const AlignmentLink& a, const AlignmentLink& b) {
    return std::tie(a.english_index, a.target_index) < std::tie(b.english_index, b.target_index);
  });
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.target_index) + "-" + std::to_string(l.english_index);
  }
  return out;
}

std::string serialize_ttable(const AlignmentModel& model) {
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (std::size_t r = 0; r < model.rows.size(); ++r) {
    const std::string f = r == 0 ? "<null>" : model.target_vocab.word(static_cast<int>(r - 1));
    for (const auto& [e, p] : model.rows[r].probs) rows.emplace_back(f, model.english_vocab.word(e), p);
  }
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [f, e, p] : rows) {
    out += f;
    out += '\t';
    out += e;
    out += '\t';
    out += format_double(p);
    out += '\n';
  }
  return out;
}

}  // namespace lrl
