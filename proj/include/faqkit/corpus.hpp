#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace faqkit::corpus {

struct Question {
  std::int64_t q_id = 0;
  std::string text;
};

struct Answer {
  std::int64_t doc_id = 0;
  std::string text;
};

/// Questions, answers and the (q_id, doc_id) relevance relation. Each question
/// has between one and five relevant answers.
class FaqCollection {
 public:
  static constexpr std::size_t kMaxRelevant = 5;

  FaqCollection() = default;
  /// Validates every invariant; throws DataError on violation.
  FaqCollection(std::vector<Question> questions, std::vector<Answer> answers,
                std::set<std::pair<std::int64_t, std::int64_t>> relevance);

  const std::vector<Question>& questions() const { return questions_; }
  const std::vector<Answer>& answers() const { return answers_; }
  const std::set<std::pair<std::int64_t, std::int64_t>>& relevance() const { return relevance_; }

  bool is_relevant(std::int64_t q_id, std::int64_t doc_id) const {
    return relevance_.count({q_id, doc_id}) != 0;
  }
  /// Sorted doc_ids relevant to q_id.
  std::vector<std::int64_t> relevant_for(std::int64_t q_id) const;
  const Question& question(std::int64_t q_id) const;
  const Answer& answer(std::int64_t doc_id) const;

 private:
  std::vector<Question> questions_;
  std::vector<Answer> answers_;
  std::set<std::pair<std::int64_t, std::int64_t>> relevance_;
};

struct RankingSample {
  std::int64_t q_id = 0;
  std::int64_t doc_id = 0;
  int label = 0;
  bool operator==(const RankingSample&) const = default;
};

/// One line of the FAQ JSON-lines format.
struct FaqRow {
  std::int64_t q_id = 0;
  std::string question;
  std::int64_t doc_id = 0;
  std::string answer;
  int label = 0;
};

std::vector<FaqRow> read_faq_rows(const std::filesystem::path& path);
void write_faq_rows(std::ostream& out, const std::vector<FaqRow>& rows);
/// label=1 rows define relevance; every row contributes its question and answer.
FaqCollection collection_from_rows(const std::vector<FaqRow>& rows);
std::vector<FaqRow> rows_from_samples(const std::vector<RankingSample>& samples,
                                      const FaqCollection& faq);
std::vector<RankingSample> samples_from_rows(const std::vector<FaqRow>& rows);

struct PreprocessOptions {
  bool lowercase = true;
  bool strip_accents = true;
  bool remove_punct = true;
  bool remove_numbers = false;
  std::optional<std::filesystem::path> stopword_file;
  bool stemming = false;
};

/// Applies the enabled transforms in a fixed order: lowercase, strip accents,
/// remove punctuation/special characters, remove numbers, drop stopwords, stem.
/// Construction loads the stopword file once (ConfigError if missing).
class Preprocessor {
 public:
  Preprocessor() : Preprocessor(PreprocessOptions{}) {}
  explicit Preprocessor(PreprocessOptions opts);
  /// Uses an in-memory stopword set; opts.stopword_file is ignored.
  Preprocessor(PreprocessOptions opts, std::unordered_set<std::string> stopwords);

  std::vector<std::string> operator()(std::string_view text) const;
  const PreprocessOptions& options() const { return opts_; }
  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

 private:
  PreprocessOptions opts_;
  std::unordered_set<std::string> stopwords_;
};

std::vector<std::string> preprocess(std::string_view text, const PreprocessOptions& opts);

/// Light Portuguese suffix stripper (plurals, adverbial -mente, a few nominal suffixes).
std::string stem_pt(std::string_view word);

/// Replaces each ASCII digit with a seeded uniform random digit. Length and
/// non-digit bytes are preserved.
std::string anonymize_numbers(std::string_view text, std::uint64_t seed);

/// Per question: all relevant answers (label 1) followed by m - |relevant|
/// distinct non-relevant answers sampled uniformly without replacement.
std::vector<RankingSample> build_ranking_dataset(const FaqCollection& faq, std::size_t m,
                                                 std::uint64_t seed);

struct Split {
  std::vector<RankingSample> train;
  std::vector<RankingSample> test;
};

/// Partitions by q_id; round(ratio * n_questions) questions go to train.
Split split(const std::vector<RankingSample>& samples, double ratio, std::uint64_t seed);

struct ImbalanceStats {
  double positive_fraction = 0.0;
  double negative_fraction = 0.0;
};

ImbalanceStats imbalance_stats(const std::vector<RankingSample>& samples);

}  // namespace faqkit::corpus
