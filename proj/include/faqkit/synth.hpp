#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faqkit/corpus.hpp"
#include "faqkit/cotrain.hpp"
#include "faqkit/ner.hpp"

namespace faqkit::synth {

/// Deterministic pseudo-word generator over a syllable inventory; never
/// returns the same word twice.
class WordFactory {
 public:
  WordFactory(std::vector<std::string> onsets, std::vector<std::string> nuclei, std::vector<std::string> codas,
              std::uint64_t seed);
  std::string word(std::size_t min_syllables, std::size_t max_syllables);

 private:
  std::vector<std::string> onsets_, nuclei_, codas_;
  Rng rng_;
  std::vector<std::string> issued_;
};

struct FaqOptions {
  std::size_t n_questions = 200;
  std::size_t paraphrases_per_answer = 4;
  /// Answers that no question points to, padding the candidate pool.
  std::size_t extra_answers = 10;
  /// Chance that a question borrows a word from its own answer.
  double overlap_rate = 0.3;
  /// Chance that a question contains a word from another answer.
  double distractor_rate = 0.3;
};

/// Each answer has its own question-side and answer-side lexicons, so
/// questions and their answers share few surface words; the association is
/// only learnable from co-occurrence in (question, answer) training pairs.
corpus::FaqCollection faq_collection(const FaqOptions& opts, std::uint64_t seed);

/// Conditionally independent views given the class: each view alone is
/// (almost) separable.
struct TwoViewData {
  cotrain::PartiallyLabeled data;
  std::vector<std::size_t> truth;
};

TwoViewData two_view(std::size_t n_labeled, std::size_t n_unlabeled, std::size_t n_classes,
                     std::size_t dims_per_view, std::uint64_t seed);

std::vector<std::string> default_ner_classes();

/// Sentences of filler words with entity phrases inserted. Every entity phrase
/// uses words unique to it, so a token string determines its tag.
std::vector<ner::NerExample> ner_corpus(std::size_t n_sentences, const std::vector<std::string>& classes,
                                        std::uint64_t seed);

struct LabeledText {
  std::string text;
  std::string label;
};

std::vector<std::string> sentiment_classes();
std::vector<LabeledText> sentiment_corpus(std::size_t n, std::uint64_t seed);

/// Customer-service style lines from the domain lexicon, and lines from an
/// unrelated lexicon over the same alphabet.
std::vector<std::string> domain_corpus(std::size_t n_lines, std::uint64_t seed);
std::vector<std::string> ood_corpus(std::size_t n_lines, std::uint64_t seed);

}  // namespace faqkit::synth
