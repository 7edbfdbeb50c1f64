#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace faqkit::tokenizer {

inline constexpr std::string_view kContinuationPrefix = "##";
inline constexpr std::string_view kPad = "[PAD]";
inline constexpr std::string_view kUnk = "[UNK]";
inline constexpr std::string_view kCls = "[CLS]";
inline constexpr std::string_view kSep = "[SEP]";
inline constexpr std::string_view kMask = "[MASK]";
inline constexpr std::size_t kNumSpecials = 5;
inline constexpr std::size_t kMaxWordChars = 100;
inline constexpr std::size_t kDefaultVocabSize = 34100;

/// WordPiece vocabulary: specials on ids 0..4, then the trained token list.
class Vocabulary {
 public:
  /// Validates uniqueness, presence of the specials at ids 0..4 and the
  /// word-initial/continuation shape of the remaining tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  bool contains(std::string_view tok) const { return index_.count(std::string(tok)) != 0; }
  /// Returns -1 when absent.
  std::int64_t id_of(std::string_view tok) const;
  std::uint32_t unk_id() const { return 1; }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct TokenSequence {
  std::vector<std::uint32_t> ids;
  std::size_t length() const { return ids.size(); }
};

/// NFKC then lowercase; accents are kept.
std::string normalize(std::string_view text);

struct TrainOptions {
  std::size_t vocab_size = kDefaultVocabSize;
  std::uint64_t min_pair_frequency = 2;
};

/// Likelihood-ratio WordPiece training: starting from the character alphabet
/// (continuations carry "##"), repeatedly merges the adjacent pair maximizing
/// count(ab) / (count(a) * count(b)); ties go to the lexicographically smallest
/// (a, b). Stops at vocab_size or when no pair reaches min_pair_frequency.
Vocabulary train_vocab(const std::vector<std::string>& corpus, const TrainOptions& opts);
inline Vocabulary train_vocab(const std::vector<std::string>& corpus, std::size_t vocab_size) {
  return train_vocab(corpus, TrainOptions{vocab_size, 2});
}

/// Greedy longest-prefix match per whitespace word after normalize().
TokenSequence tokenize(std::string_view text, const Vocabulary& vocab);
std::vector<std::string> tokenize_to_strings(std::string_view text, const Vocabulary& vocab);
/// Joins tokens, gluing "##" continuations to their predecessor.
std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab);

struct LengthStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  std::size_t n = 0;
};

/// Percentiles use linear interpolation between order statistics.
LengthStats length_stats(const std::vector<std::string>& corpus, const Vocabulary& vocab);

}  // namespace faqkit::tokenizer
