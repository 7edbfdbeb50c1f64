#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "faqkit/features.hpp"
#include "faqkit/learn/model.hpp"
#include "faqkit/learn/train.hpp"

namespace faqkit::ner {

struct EntitySpan {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive
  std::string class_name;
  auto operator<=>(const EntitySpan&) const = default;
};

/// U for single-token spans, B I* L otherwise, O elsewhere.
/// Throws DataError on overlapping or out-of-range spans.
std::vector<std::string> encode_bilou(std::size_t n_tokens, const std::vector<EntitySpan>& spans);

/// Inverse of encode_bilou on valid input. Invalid sequences are repaired:
/// I/L without an open span opens one at that token, an unterminated B closes
/// at the last contiguous same-class tag, and a class change closes the open span.
/// Throws DataError on malformed tag strings.
std::vector<EntitySpan> decode_bilou(const std::vector<std::string>& tags);

/// "O" followed by B-, I-, L-, U- for each class in order.
std::vector<std::string> tag_set(const std::vector<std::string>& classes);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Exact (start, end, class) matches, micro-averaged over sentences.
Prf entity_f1(const std::vector<std::vector<EntitySpan>>& pred, const std::vector<std::vector<EntitySpan>>& gold);

struct NerExample {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

std::vector<NerExample> read_ner_jsonl(const std::filesystem::path& path);
std::string write_ner_jsonl(const std::vector<NerExample>& examples);
std::vector<std::string> read_class_list(const std::filesystem::path& path);

/// Unigram LSA space used to embed single tokens, plus the context window.
struct TokenContext {
  features::LsaModel lsa;
  std::size_t window = 2;

  std::size_t dim() const;
};

inline constexpr std::size_t kShapeFeatures = 6;

/// Fits unigram LSA on the sentences of the dataset (each sentence is one document).
TokenContext fit_token_context(const std::vector<NerExample>& data, std::size_t k, std::size_t window,
                               const corpus::PreprocessOptions& prep = {});

/// LSA projections of tokens[pos - w .. pos + w] (zeros past the edges) then
/// is-digit, capitalized, and a one-hot length bucket (1-2, 3-5, 6-9, 10+).
std::vector<double> token_features(const std::vector<std::string>& tokens, std::size_t pos,
                                   const TokenContext& ctx);

class NerModel {
 public:
  NerModel() = default;
  NerModel(TokenContext ctx, std::vector<std::string> classes, learn::DenseModel head);

  const TokenContext& context() const { return ctx_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::string>& tags() const { return tags_; }
  const learn::DenseModel& head() const { return head_; }

  std::vector<std::vector<double>> sentence_features(const std::vector<std::string>& tokens) const;
  std::vector<std::string> predict_tags(const std::vector<std::string>& tokens) const;
  std::vector<std::string> predict_tags(const std::vector<std::string>& tokens, const learn::Head& head) const;

  /// Context and classes only; the head is stored separately by the bundle format.
  void write_context(std::ostream& out) const;
  static NerModel read_context(std::istream& in, learn::DenseModel head);

 private:
  TokenContext ctx_;
  std::vector<std::string> classes_;
  std::vector<std::string> tags_;
  learn::DenseModel head_;
};

/// AdamW 5e-5, 2% warmup, 5 epochs, no label smoothing.
inline learn::TrainConfig default_ner_config() {
  learn::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.label_smoothing = 0.0;
  return cfg;
}

/// Per-token softmax head over token_features. Throws DataError for tags
/// outside the configured class set.
NerModel train_ner(const std::vector<NerExample>& data, TokenContext ctx, const std::vector<std::string>& classes,
                   const learn::TrainConfig& cfg = default_ner_config());

Prf evaluate_ner(const NerModel& model, const std::vector<NerExample>& data);
Prf evaluate_ner(const NerModel& model, const learn::Head& head, const std::vector<NerExample>& data);

}  // namespace faqkit::ner
