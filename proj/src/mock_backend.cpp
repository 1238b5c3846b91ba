#include "lrl/mock_backend.hpp"

#include <map>

#include "lrl/text.hpp"

namespace lrl {

MockBackend::MockBackend(std::string name, Responder responder)
    : MockBackend(std::move(name), std::move(responder), codepoint_scorer()) {}

MockBackend::MockBackend(std::string name, Responder responder, Scorer scorer)
    : name_(std::move(name)), responder_(std::move(responder)), scorer_(std::move(scorer)) {}

std::string MockBackend::generate(const std::string& prompt, int max_tokens) {
  ++generate_calls_;
  return responder_(prompt, max_tokens);
}

ScoreResult MockBackend::score(const std::string& text) {
  ++score_calls_;
  return scorer_(text);
}

MockBackend::Scorer MockBackend::codepoint_scorer(double ascii_logprob, double other_logprob) {
  return [ascii_logprob, other_logprob](const std::string& text) {
    ScoreResult r;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const auto c = static_cast<unsigned char>(text[i]);
      if ((c & 0xC0) == 0x80) continue;
      r.token_logprobs.push_back(c < 0x80 ? ascii_logprob : other_logprob);
    }
    for (double v : r.token_logprobs) r.nll -= v;
    return r;
  };
}

std::shared_ptr<MockBackend> make_oracle_backend(std::vector<std::pair<std::string, std::string>> keyed_answers) {
  auto table = std::make_shared<const std::vector<std::pair<std::string, std::string>>>(std::move(keyed_answers));
  return std::make_shared<MockBackend>("oracle", [table](const std::string& prompt, int) -> std::string {
    const std::string* best = nullptr;
    std::size_t best_end = 0;
    std::size_t best_len = 0;
    for (const auto& [key, answer] : *table) {
      if (key.empty()) continue;
      const auto pos = prompt.rfind(key);
      if (pos == std::string::npos) continue;
      const std::size_t end = pos + key.size();
      if (!best || end > best_end || (end == best_end && key.size() > best_len)) {
        best = &answer;
        best_end = end;
        best_len = key.size();
      }
    }
    return best ? *best : std::string();
  });
}

std::shared_ptr<MockBackend> make_oracle_backend(const Dataset& dataset) {
  std::vector<std::pair<std::string, std::string>> keyed;
  if (const auto* cls = std::get_if<ClassificationDataset>(&dataset)) {
    for (const auto& ex : cls->examples) keyed.emplace_back(ex.text_target, ex.label);
  } else {
    const auto& mc = std::get<MultiChoiceDataset>(dataset);
    for (const auto& ex : mc.examples) {
      keyed.emplace_back(ex.passage_target + "\n###\nQuery:\n" + ex.question,
                         std::string(1, static_cast<char>('A' + ex.answer_index)));
    }
  }
  return make_oracle_backend(std::move(keyed));
}

std::shared_ptr<MockBackend> make_constant_backend(std::string output) {
  return std::make_shared<MockBackend>("constant", [output](const std::string&, int) { return output; });
}

namespace {

const std::map<std::string, std::vector<std::string>>& topic_lexicon() {
  static const std::map<std::string, std::vector<std::string>> lexicon = {
      {"science/technology",
       {"science", "scientists", "technology", "research", "researchers", "computer", "space", "discovered",
        "energy", "internet", "data", "laboratory", "telescope"}},
      {"travel",
       {"travel", "travelers", "tourists", "tourism", "hotel", "flight", "flights", "trip", "visit", "visitors",
        "airport", "passport", "journey"}},
      {"politics",
       {"government", "election", "minister", "president", "party", "vote", "voters", "parliament", "political",
        "law", "policy", "senate"}},
      {"sports",
       {"game", "team", "match", "players", "won", "championship", "football", "sport", "tournament", "coach",
        "goal", "season"}},
      {"health",
       {"health", "disease", "patients", "doctors", "hospital", "virus", "medical", "treatment", "vaccine",
        "symptoms", "infection"}},
      {"entertainment",
       {"film", "music", "movie", "festival", "album", "actor", "show", "concert", "band", "singer", "audience"}},
      {"geography",
       {"river", "rivers", "mountains", "island", "islands", "ocean", "region", "climate", "located",
        "population", "lake", "desert", "continent"}},
  };
  return lexicon;
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if ((u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z')) {
      cur.push_back(static_cast<char>(u >= 'A' && u <= 'Z' ? u + 32 : u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t hash_index(std::string_view text, std::size_t n) {
  const auto digest = sha256_hex(text);
  return std::stoul(digest.substr(0, 8), nullptr, 16) % n;
}

}  // namespace

std::shared_ptr<MockBackend> make_keyword_backend(const TaskLabelSet& labels) {
  return std::make_shared<MockBackend>("keyword", [labels](const std::string& prompt, int) -> std::string {
    if (prompt.find("\nChoices:\n") != std::string::npos) {
      return std::string(1, static_cast<char>('A' + hash_index(prompt, 4)));
    }
    const auto marker = prompt.rfind("Text:");
    const std::string_view region =
        marker == std::string::npos ? std::string_view(prompt) : std::string_view(prompt).substr(marker);
    const auto words = words_of(region);
    const auto& lexicon = topic_lexicon();
    std::size_t best_count = 0;
    std::string best;
    for (const auto& label : labels.labels()) {
      auto it = lexicon.find(label);
      if (it == lexicon.end()) continue;
      std::size_t count = 0;
      for (const auto& w : words) {
        for (const auto& k : it->second) count += (w == k) ? 1 : 0;
      }
      if (count > best_count) {
        best_count = count;
        best = label;
      }
    }
    if (best_count > 0) return best;
    return labels.labels()[hash_index(region, labels.size())];
  });
}

}  // namespace lrl
