#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faqkit/features.hpp"
#include "faqkit/learn/forest.hpp"
#include "faqkit/learn/model.hpp"
#include "faqkit/ner.hpp"
#include "faqkit/quant.hpp"

namespace faqkit::bundle {

inline constexpr std::string_view kRanker = "ranker";
inline constexpr std::string_view kNer = "ner";
inline constexpr std::string_view kSentiment = "sentiment";

/// Self-contained model file: a kind tag, an optional head (float64 or int8)
/// and an opaque, kind-specific context blob.
struct Bundle {
  std::string kind;
  std::optional<learn::DenseModel> dense;
  std::optional<quant::QuantizedModel> quantized;
  std::string context;

  /// The dense head if present, else the quantized one; throws if neither.
  const learn::Head& head() const;
};

std::string serialize(const Bundle& b);
Bundle deserialize(const std::string& bytes);
void save(const std::filesystem::path& path, const Bundle& b);
Bundle load(const std::filesystem::path& path);

struct RankerContext {
  std::string mode;  // "pointwise" or "pairwise"
  features::PairFeaturizer featurizer;
  std::map<std::int64_t, std::string> answers;
};

std::string encode(const RankerContext& ctx);
RankerContext decode_ranker(const std::string& blob);

struct SentimentContext {
  features::LsaModel lsa;
  std::vector<std::string> classes;
  std::optional<learn::TreeEnsemble> forest;
};

std::string encode(const SentimentContext& ctx);
SentimentContext decode_sentiment(const std::string& blob);

/// NER bundles store NerModel::write_context as their blob.
std::string encode(const ner::NerModel& model);
ner::NerModel decode_ner(const std::string& blob, const learn::DenseModel& head);

}  // namespace faqkit::bundle
