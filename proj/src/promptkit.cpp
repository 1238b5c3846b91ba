#include "lrl/promptkit.hpp"

#include <array>

#include "lrl/error.hpp"
#include "lrl/text.hpp"

namespace lrl {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::baseline_zero: return "baseline_zero";
    case Variant::word_alignment: return "word_alignment";
    case Variant::word_translation: return "word_translation";
    case Variant::sentence_alignment: return "sentence_alignment";
    case Variant::fewshot_plain: return "fewshot_plain";
    case Variant::fewshot_aligned: return "fewshot_aligned";
  }
  return "baseline_zero";
}

Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::baseline_zero, Variant::word_alignment, Variant::word_translation,
                 Variant::sentence_alignment, Variant::fewshot_plain, Variant::fewshot_aligned}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown prompt variant '" + std::string(s) + "'");
}

std::string_view to_string(DescriptionPosition p) {
  return p == DescriptionPosition::before_examples ? "before_examples" : "after_examples";
}

DescriptionPosition parse_position(std::string_view s) {
  if (s == "before_examples" || s == "before") return DescriptionPosition::before_examples;
  if (s == "after_examples" || s == "after") return DescriptionPosition::after_examples;
  throw ConfigError("unknown description position '" + std::string(s) + "'");
}

bool variant_uses_examples(Variant v) {
  return v == Variant::sentence_alignment || v == Variant::fewshot_plain || v == Variant::fewshot_aligned;
}

DescriptionPosition default_position(Variant v) {
  return v == Variant::sentence_alignment ? DescriptionPosition::after_examples
                                          : DescriptionPosition::before_examples;
}

void PromptSpec::validate() const {
  if (language_name.empty()) throw ConfigError("prompt spec needs a language display name");
  if (!variant_uses_examples(variant)) {
    if (k != 0) throw ConfigError(std::string(to_string(variant)) + " takes no examples (k must be 0)");
    return;
  }
  if (k < 1) throw ConfigError(std::string(to_string(variant)) + " needs k >= 1");
  if (variant == Variant::sentence_alignment && k > 5) {
    throw ConfigError("sentence_alignment supports 1 to 5 parallel examples, got k=" + std::to_string(k));
  }
}

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::task_description: return "task_description";
    case SegmentKind::alignment_block: return "alignment_block";
    case SegmentKind::alignment_pair: return "alignment_pair";
    case SegmentKind::demonstration: return "demonstration";
    case SegmentKind::input: return "input";
    case SegmentKind::gloss: return "gloss";
    case SegmentKind::cue: return "cue";
    case SegmentKind::separator: return "separator";
    case SegmentKind::omitted: return "omitted";
  }
  return "separator";
}

namespace {

using Part = std::vector<Segment>;

constexpr std::string_view kClassificationSeparator = " ";
constexpr std::string_view kMultiChoiceSeparator = "\n###\n";
constexpr std::string_view kClosing = "Now complete the following example without explanations.";
constexpr std::string_view kTopicCue = "Topic option is:";
constexpr std::string_view kMultiChoiceInstruction =
    "Given the following passage, query, and answer choices, output the letter corresponding to the correct answer.";
constexpr std::string_view kAnswerCue = "Answer:";

std::string number_word(std::size_t n) {
  static constexpr std::array<const char*, 13> kWords = {"zero", "one", "two",   "three", "four",   "five", "six",
                                                         "seven", "eight", "nine", "ten",   "eleven", "twelve"};
  return n < kWords.size() ? kWords[n] : std::to_string(n);
}

std::string quoted_list(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += labels.size() == 2 ? " " : ", ";
    if (i > 0 && i + 1 == labels.size()) out += "and ";
    out += "\"" + labels[i] + "\"";
  }
  return out;
}

std::string word_alignment_instruction(std::string_view language_name) {
  return "Please use the provided English translation of each word to help you understand the " +
         std::string(language_name) + " text.";
}

Part single(SegmentKind kind, std::string source_id, std::string text) {
  return Part{Segment{kind, std::move(source_id), std::move(text)}};
}

RenderedPrompt assemble(const std::vector<Part>& parts, std::string_view separator) {
  RenderedPrompt out;
  bool first = true;
  for (const auto& part : parts) {
    if (part.empty()) continue;
    if (!first) out.segments.push_back({SegmentKind::separator, "", std::string(separator)});
    first = false;
    for (const auto& seg : part) out.segments.push_back(seg);
  }
  for (const auto& seg : out.segments) out.text += seg.text;
  return out;
}

void require_input(std::string_view input) {
  if (trim(input).empty()) throw DataError("prompt input text is empty");
}

void require_task(const PromptSpec& spec, Task task) {
  if (spec.task != task) {
    throw ConfigError(std::string("prompt spec task is ") + std::string(to_string(spec.task)) + ", expected " +
                      std::string(to_string(task)));
  }
}

// One clause per known token plus omitted records for unknown ones.
struct Glosses {
  Part clauses;          // "w means e in English" joined by "; ", closed with "."
  std::vector<std::string> words;  // English words in input order
  Part omitted;
};

Glosses gloss_tokens(std::string_view input, const Dictionary& dict) {
  if (dict.empty()) throw DataError("word-level prompting needs a non-empty dictionary");
  Glosses g;
  for (const auto& token : split_whitespace(input)) {
    const auto* entry = dict.find(token);
    if (!entry) {
      g.omitted.push_back({SegmentKind::omitted, token, ""});
      continue;
    }
    if (!g.clauses.empty()) g.clauses.push_back({SegmentKind::separator, "", "; "});
    g.clauses.push_back({SegmentKind::gloss, token, token + " means " + entry->english + " in English"});
    g.words.push_back(entry->english);
  }
  if (!g.clauses.empty()) g.clauses.push_back({SegmentKind::separator, "", "."});
  return g;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

Part alignment_part(std::string_view language_name, std::span<const AlignmentExample> pairs) {
  if (pairs.empty()) throw DataError("sentence alignment needs at least one parallel example");
  if (pairs.size() > 5) throw ConfigError("sentence alignment supports at most 5 parallel examples");
  const std::string lang(language_name);
  Part part;
  part.push_back({SegmentKind::alignment_block, "",
                  "Use the following pairs of " + lang + " texts and their English translations to help you understand " +
                      lang + "."});
  part.push_back({SegmentKind::separator, "", " "});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (trim(pairs[i].target).empty() || trim(pairs[i].english).empty()) {
      throw DataError("parallel example '" + pairs[i].id + "' has an empty side");
    }
    if (i > 0) part.push_back({SegmentKind::separator, "", "; "});
    part.push_back(
        {SegmentKind::alignment_pair, pairs[i].id, lang + ": " + pairs[i].target + "; English: " + pairs[i].english});
  }
  part.push_back({SegmentKind::separator, "", "."});
  part.push_back({SegmentKind::separator, "", " "});
  part.push_back({SegmentKind::alignment_block, "",
                  "Now based on your understanding, answer the question below without explanation."});
  return part;
}

// Orders description and examples by position; trailing parts follow.
std::vector<Part> order_parts(DescriptionPosition position, Part description, std::vector<Part> examples,
                              std::vector<Part> trailing) {
  std::vector<Part> parts;
  if (position == DescriptionPosition::before_examples) {
    parts.push_back(std::move(description));
    for (auto& e : examples) parts.push_back(std::move(e));
  } else {
    for (auto& e : examples) parts.push_back(std::move(e));
    parts.push_back(std::move(description));
  }
  for (auto& t : trailing) parts.push_back(std::move(t));
  return parts;
}

Part input_part(std::string_view text) { return single(SegmentKind::input, "input", "Text: " + std::string(text) + "."); }
Part cue_part() { return single(SegmentKind::cue, "", std::string(kTopicCue)); }

}  // namespace

std::string classification_description(const TaskLabelSet& labels, std::string_view language_name) {
  return "What is the topic discussed in the following " + std::string(language_name) + " text? There are " +
         number_word(labels.size()) + " options: " + quoted_list(labels.labels()) + ".";
}

RenderedPrompt render_baseline(const PromptSpec& spec, std::string_view input_target) {
  require_task(spec, Task::classification);
  require_input(input_target);
  Part desc = single(SegmentKind::task_description, "",
                     classification_description(spec.labels, spec.language_name) + " " + std::string(kClosing));
  return assemble({desc, input_part(input_target), cue_part()}, kClassificationSeparator);
}

RenderedPrompt render_word_alignment(const PromptSpec& spec, std::string_view input_target, const Dictionary& dict) {
  require_task(spec, Task::classification);
  require_input(input_target);
  auto g = gloss_tokens(input_target, dict);
  Part desc = single(SegmentKind::task_description, "",
                     classification_description(spec.labels, spec.language_name) + " " +
                         word_alignment_instruction(spec.language_name) + " " + std::string(kClosing));
  Part input = input_part(input_target);
  for (auto& o : g.omitted) input.push_back(std::move(o));
  return assemble({desc, input, g.clauses, cue_part()}, kClassificationSeparator);
}

RenderedPrompt render_word_translation(const PromptSpec& spec, std::string_view input_target,
                                       const Dictionary& dict) {
  require_task(spec, Task::classification);
  require_input(input_target);
  auto g = gloss_tokens(input_target, dict);
  if (g.words.empty()) throw DataError("no input word is in the dictionary; nothing to translate");
  Part desc = single(SegmentKind::task_description, "",
                     classification_description(spec.labels, "English") + " " + std::string(kClosing));
  Part input = input_part(join_words(g.words));
  for (auto& o : g.omitted) input.push_back(std::move(o));
  return assemble({desc, input, cue_part()}, kClassificationSeparator);
}

RenderedPrompt render_sentence_alignment(const PromptSpec& spec, std::string_view input_target,
                                         std::span<const AlignmentExample> pairs) {
  require_task(spec, Task::classification);
  require_input(input_target);
  Part desc = single(SegmentKind::task_description, "",
                     classification_description(spec.labels, spec.language_name) + " " + std::string(kClosing));
  return assemble(order_parts(spec.position, std::move(desc), {alignment_part(spec.language_name, pairs)},
                              {input_part(input_target), cue_part()}),
                  kClassificationSeparator);
}

RenderedPrompt render_fewshot(const PromptSpec& spec, std::string_view input_target,
                              std::span<const LabeledExample> demos, bool with_alignment) {
  require_task(spec, Task::classification);
  require_input(input_target);
  if (demos.empty()) throw DataError("few-shot prompting needs at least one demonstration");
  std::vector<Part> examples;
  for (const auto& d : demos) {
    if (d.label.empty()) throw DataError("demonstration '" + d.id + "' has no label");
    std::string text = "Text: " + d.text_target;
    if (with_alignment) {
      if (!d.text_english || trim(*d.text_english).empty()) {
        throw DataError("aligned demonstration '" + d.id + "' has no English side");
      }
      text += " means " + *d.text_english + " in English";
    }
    text += ". Topic option is: " + d.label + ".";
    examples.push_back(single(SegmentKind::demonstration, d.id, std::move(text)));
  }
  Part desc = single(SegmentKind::task_description, "",
                     classification_description(spec.labels, spec.language_name) + " " + std::string(kClosing));
  return assemble(order_parts(spec.position, std::move(desc), std::move(examples),
                              {input_part(input_target), cue_part()}),
                  kClassificationSeparator);
}

namespace {

void require_choices(const MultiChoiceExample& ex) {
  for (std::size_t i = 0; i < ex.choices.size(); ++i) {
    if (trim(ex.choices[i]).empty()) {
      throw DataError("multiple-choice example '" + ex.id + "' is missing choice " +
                      std::string(1, static_cast<char>('A' + i)));
    }
  }
}

std::string choices_text(const MultiChoiceExample& ex) {
  std::string out = "Choices:";
  for (std::size_t i = 0; i < ex.choices.size(); ++i) {
    out += "\n(" + std::string(1, static_cast<char>('A' + i)) + ") " + ex.choices[i];
  }
  return out;
}

}  // namespace

RenderedPrompt render_multichoice(const PromptSpec& spec, const MultiChoiceExample& example,
                                  const MultiChoiceContext& context) {
  require_task(spec, Task::multichoice);
  require_choices(example);
  require_input(example.passage_target);

  std::string instruction(kMultiChoiceInstruction);
  Part passage;
  switch (spec.variant) {
    case Variant::word_alignment: {
      if (!context.dictionary) throw DataError("word_alignment needs a dictionary");
      auto g = gloss_tokens(example.passage_target, *context.dictionary);
      instruction += " " + word_alignment_instruction(spec.language_name);
      passage.push_back({SegmentKind::input, "input", "Passage:\n" + example.passage_target});
      for (auto& o : g.omitted) passage.push_back(std::move(o));
      if (!g.clauses.empty()) {
        passage.push_back({SegmentKind::separator, "", "\n"});
        for (auto& c : g.clauses) passage.push_back(std::move(c));
      }
      break;
    }
    case Variant::word_translation: {
      if (!context.dictionary) throw DataError("word_translation needs a dictionary");
      auto g = gloss_tokens(example.passage_target, *context.dictionary);
      if (g.words.empty()) throw DataError("no passage word is in the dictionary; nothing to translate");
      passage.push_back({SegmentKind::input, "input", "Passage:\n" + join_words(g.words)});
      for (auto& o : g.omitted) passage.push_back(std::move(o));
      break;
    }
    default:
      passage.push_back({SegmentKind::input, "input", "Passage:\n" + example.passage_target});
      break;
  }
  std::vector<Part> trailing = {passage, single(SegmentKind::input, "input", "Query:\n" + example.question),
                                single(SegmentKind::input, "input", choices_text(example)),
                                single(SegmentKind::cue, "", std::string(kAnswerCue))};
  Part desc = single(SegmentKind::task_description, "", instruction);

  std::vector<Part> examples;
  switch (spec.variant) {
    case Variant::sentence_alignment:
      examples.push_back(alignment_part(spec.language_name, context.passage_pairs));
      break;
    case Variant::fewshot_plain:
    case Variant::fewshot_aligned: {
      if (context.demos.empty()) throw DataError("few-shot prompting needs at least one demonstration");
      for (const auto& d : context.demos) {
        require_choices(d);
        std::string p = d.passage_target;
        if (spec.variant == Variant::fewshot_aligned) {
          if (!d.passage_english || trim(*d.passage_english).empty()) {
            throw DataError("aligned demonstration '" + d.id + "' has no English passage");
          }
          p += " means " + *d.passage_english + " in English";
        }
        std::string text = "Passage:\n" + p + std::string(kMultiChoiceSeparator) + "Query:\n" + d.question +
                           std::string(kMultiChoiceSeparator) + choices_text(d) + std::string(kMultiChoiceSeparator) +
                           std::string(kAnswerCue) + " " + std::string(1, static_cast<char>('A' + d.answer_index));
        examples.push_back(single(SegmentKind::demonstration, d.id, std::move(text)));
      }
      break;
    }
    default:
      break;
  }
  return assemble(order_parts(spec.position, std::move(desc), std::move(examples), std::move(trailing)),
                  kMultiChoiceSeparator);
}

}  // namespace lrl
