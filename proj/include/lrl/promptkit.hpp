#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrl/corpus.hpp"
#include "lrl/dictionary.hpp"

namespace lrl {

enum class Variant { baseline_zero, word_alignment, word_translation, sentence_alignment, fewshot_plain, fewshot_aligned };
enum class DescriptionPosition { before_examples, after_examples };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);
std::string_view to_string(DescriptionPosition p);
DescriptionPosition parse_position(std::string_view s);

// False for the zero-shot variants, which take no retrieved examples.
bool variant_uses_examples(Variant v);

struct PromptSpec {
  Variant variant = Variant::baseline_zero;
  std::string language_name;
  Task task = Task::classification;
  int k = 0;
  // Where the task description goes relative to the retrieved examples.
  DescriptionPosition position = DescriptionPosition::before_examples;
  TaskLabelSet labels = TaskLabelSet::sib_topics();

  // Throws ConfigError: k must be 0 exactly for the zero-shot variants,
  // 1..5 for sentence alignment, >= 1 for few-shot.
  void validate() const;
};

// The paper places parallel sentences ahead of the task description and
// demonstrations after it.
DescriptionPosition default_position(Variant v);

enum class SegmentKind {
  task_description,
  alignment_block,
  alignment_pair,
  demonstration,
  input,
  gloss,
  cue,
  separator,
  omitted,  // audit record of dropped material; always empty text
};

std::string_view to_string(SegmentKind k);

struct Segment {
  SegmentKind kind;
  std::string source_id;
  std::string text;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Concatenating segment texts reproduces text byte for byte.
struct RenderedPrompt {
  std::string text;
  std::vector<Segment> segments;
};

// Unlabeled parallel sentence used for sentence-level alignment.
struct AlignmentExample {
  std::string id;
  std::string target;
  std::string english;
};

RenderedPrompt render_baseline(const PromptSpec& spec, std::string_view input_target);

// Appends "w means e in English; ..." for every input token the dictionary
// knows. Unknown tokens are left out and recorded as omitted segments.
RenderedPrompt render_word_alignment(const PromptSpec& spec, std::string_view input_target, const Dictionary& dict);

// Replaces the input with its word-by-word English glosses.
RenderedPrompt render_word_translation(const PromptSpec& spec, std::string_view input_target,
                                       const Dictionary& dict);

RenderedPrompt render_sentence_alignment(const PromptSpec& spec, std::string_view input_target,
                                         std::span<const AlignmentExample> pairs);

RenderedPrompt render_fewshot(const PromptSpec& spec, std::string_view input_target,
                              std::span<const LabeledExample> demos, bool with_alignment);

struct MultiChoiceContext {
  const Dictionary* dictionary = nullptr;       // word-level variants
  std::vector<AlignmentExample> passage_pairs;  // sentence_alignment
  std::vector<MultiChoiceExample> demos;        // few-shot variants
};

// Renders any variant for a multiple-choice example; spec.variant selects
// which parts of the context are used.
RenderedPrompt render_multichoice(const PromptSpec& spec, const MultiChoiceExample& example,
                                  const MultiChoiceContext& context = {});

// Classification task description, e.g. for the tests' golden text.
std::string classification_description(const TaskLabelSet& labels, std::string_view language_name);

}  // namespace lrl
