#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace faqkit::bm25 {

struct Posting {
  std::int64_t doc_id = 0;
  std::uint32_t tf = 0;
  bool operator==(const Posting&) const = default;
};

struct Params {
  double k1 = 1.2;
  double b = 0.75;
  double delta = 1.0;
  /// Throws ConfigError if any parameter is out of range.
  void validate() const;
};

/// Term -> postings, plus per-document lengths. Immutable after build().
class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Throws DataError on duplicate doc ids. Empty documents are allowed.
  static InvertedIndex build(const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& docs);

  std::size_t n_docs() const { return doc_lengths_.size(); }
  double avgdl() const { return avgdl_; }
  /// Postings sorted by doc_id; empty span for unknown terms.
  const std::vector<Posting>& postings(const std::string& term) const;
  std::size_t doc_frequency(const std::string& term) const { return postings(term).size(); }
  std::uint32_t term_frequency(const std::string& term, std::int64_t doc_id) const;
  bool has_doc(std::int64_t doc_id) const { return doc_lengths_.count(doc_id) != 0; }
  std::size_t doc_length(std::int64_t doc_id) const;
  const std::map<std::int64_t, std::size_t>& doc_lengths() const { return doc_lengths_; }
  const std::unordered_map<std::string, std::vector<Posting>>& all_postings() const { return postings_; }

  void write(std::ostream& out) const;
  static InvertedIndex read(std::istream& in);
  /// Directory layout: postings.bin (length-prefixed records) and stats.json.
  void save_dir(const std::filesystem::path& dir) const;
  static InvertedIndex load_dir(const std::filesystem::path& dir);

 private:
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::map<std::int64_t, std::size_t> doc_lengths_;
  double avgdl_ = 0.0;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)); always non-negative.
double idf(std::size_t n_docs, std::size_t df);

/// Sum over every query term of IDF * [TF(k1+1) / (TF + k1(1 - b + b|D|/avgdl)) + delta].
/// Terms absent from the document still contribute IDF * delta.
double score(const std::vector<std::string>& query, std::int64_t doc_id, const InvertedIndex& index,
             const Params& params);

/// Same formula for a document that need not be indexed: TF and |D| come from
/// doc_tokens, df/N/avgdl from the index.
double score_text(const std::vector<std::string>& query, const std::vector<std::string>& doc_tokens,
                  const InvertedIndex& index, const Params& params);

struct Hit {
  std::int64_t doc_id = 0;
  double score = 0.0;
};

/// Top-k by descending score; ties by ascending doc_id.
std::vector<Hit> search(const std::vector<std::string>& query, const InvertedIndex& index,
                        const Params& params, std::size_t k);

}  // namespace faqkit::bm25
