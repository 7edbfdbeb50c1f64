#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "faqkit/bm25.hpp"
#include "faqkit/common.hpp"
#include "faqkit/corpus.hpp"

namespace faqkit::features {

/// All contiguous n-grams for n = 1..n_max, joined with '_', in order of
/// (n, start position).
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n_max = 3);

struct SparseVector {
  /// (column, value) sorted by column, no duplicates.
  std::vector<std::pair<std::uint32_t, double>> entries;
};

struct TfidfOptions {
  std::size_t n_max = 3;
  /// Drop n-grams appearing in fewer documents than this.
  std::size_t min_df = 1;
};

/// TF-IDF term-document matrix. Columns are n-grams; rows are documents.
/// TF is the raw count and IDF = ln(N / df).
class TermDocMatrix {
 public:
  std::size_t n_terms() const { return terms_.size(); }
  std::size_t n_docs() const { return rows_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<SparseVector>& rows() const { return rows_; }
  std::size_t n_max() const { return n_max_; }
  /// -1 if the n-gram is not in the vocabulary.
  std::int64_t column(const std::string& term) const;

  /// Vectorizes a new token list with the fitted vocabulary and IDF.
  SparseVector transform(const std::vector<std::string>& tokens) const;
  std::vector<double> transform_dense(const std::vector<std::string>& tokens) const;
  /// Dense terms x docs matrix (the orientation factored by svd()).
  Matrix terms_by_docs() const;

  void write(std::ostream& out) const;
  static TermDocMatrix read(std::istream& in);

 private:
  friend TermDocMatrix tfidf_fit(const std::vector<std::vector<std::string>>&, const TfidfOptions&);
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
  std::vector<SparseVector> rows_;
  std::size_t n_max_ = 3;
};

TermDocMatrix tfidf_fit(const std::vector<std::vector<std::string>>& corpus, const TfidfOptions& opts = {});

/// Truncated SVD factors of a terms x docs matrix T ~= U diag(sigma) V^t.
struct LsaProjection {
  Matrix u;                   // terms x k, orthonormal columns
  std::vector<double> sigma;  // k values, descending, all > 0
  Matrix v;                   // docs x k, orthonormal columns
  std::size_t k() const { return sigma.size(); }
};

/// Full thin SVD via Householder QR followed by one-sided Jacobi rotations.
/// Returns min(rows, cols) components, singular values descending, including
/// zeros. Sign convention: the largest-magnitude entry of each U column is positive.
LsaProjection thin_svd(const Matrix& t);

/// Rank-k truncation of thin_svd(t). Throws ConfigError if k is outside
/// [1, min(rows, cols)], DataError on non-finite input or if sigma_k is
/// numerically zero.
LsaProjection svd(const Matrix& t, std::size_t k);
LsaProjection svd(const TermDocMatrix& t, std::size_t k);

/// sigma^-1 U^t d.
std::vector<double> project(std::span<const double> d, const LsaProjection& proj);
std::vector<double> project(const SparseVector& d, const LsaProjection& proj);

/// u.v / (|u||v|). Throws DataError on dimension mismatch or a zero-norm argument.
double cosine(std::span<const double> u, std::span<const double> v);

/// Unit-cost edit distance over code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

struct CatalogEntry {
  std::string text;
  std::string label;
};

/// Exact match after preprocessing wins; otherwise the entry minimizing
/// levenshtein / max(length) if that ratio is <= max_edit_ratio. Ties go to
/// the earliest catalog entry unless class_priority ranks one label higher.
std::optional<std::string> prefilter_match(std::string_view text, const std::vector<CatalogEntry>& catalog,
                                           double max_edit_ratio = 0.2,
                                           const corpus::Preprocessor& prep = corpus::Preprocessor{},
                                           const std::vector<std::string>& class_priority = {});

/// Dense vectors keyed by id, loaded from "n dim" + "id v1 ... vdim" text files
/// (word2vec text format).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  static EmbeddingTable load(const std::filesystem::path& path);
  void add(std::string id, std::vector<double> vec);
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(const std::string& id) const;
  double similarity(const std::string& a, const std::string& b) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// Preprocessing + TF-IDF + truncated SVD, fitted once and then used to map
/// arbitrary text into the latent space.
class LsaModel {
 public:
  LsaModel() = default;
  static LsaModel fit(const std::vector<std::string>& documents, const corpus::PreprocessOptions& prep,
                      const TfidfOptions& tfidf, std::size_t k);

  bool fitted() const { return fitted_; }
  std::size_t k() const { return proj_.k(); }
  std::vector<std::string> tokens(std::string_view text) const { return prep_(text); }
  std::vector<double> embed(std::string_view text) const;
  std::vector<double> embed_tokens(const std::vector<std::string>& tokens) const;
  const TermDocMatrix& matrix() const { return tdm_; }
  const LsaProjection& projection() const { return proj_; }
  const corpus::Preprocessor& preprocessor() const { return prep_; }

  void write(std::ostream& out) const;
  static LsaModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static LsaModel load(const std::filesystem::path& path);

 private:
  corpus::Preprocessor prep_;
  TermDocMatrix tdm_;
  LsaProjection proj_;
  bool fitted_ = false;
};

struct FeatureOptions {
  bm25::Params bm25;
  bool include_lsa_vectors = false;
};

/// Named slots of the pair feature vector.
enum FeatureSlot : std::size_t { kCosine = 0, kBm25 = 1, kJaccard = 2, kLengthRatio = 3, kNumBaseFeatures = 4 };

/// Replaces an encoder's pooled (question, answer) representation with
/// [LSA cosine, per-question min-max BM25+, token Jaccard, length ratio,
/// optional LSA(q) ++ LSA(a)].
class PairFeaturizer {
 public:
  PairFeaturizer() = default;
  PairFeaturizer(LsaModel lsa, bm25::InvertedIndex index, FeatureOptions opts);

  /// LSA is fitted on every (question ++ relevant answer) text plus each pool
  /// answer; the BM25 index covers the answer pool.
  static PairFeaturizer fit(const std::vector<std::pair<std::string, std::string>>& relevant_pairs,
                            const std::vector<corpus::Answer>& answer_pool,
                            const corpus::PreprocessOptions& prep, const TfidfOptions& tfidf,
                            std::size_t lsa_k, FeatureOptions opts);

  bool fitted() const { return lsa_.fitted(); }
  std::size_t dim() const;
  const LsaModel& lsa() const { return lsa_; }
  const bm25::InvertedIndex& index() const { return index_; }
  const FeatureOptions& options() const { return opts_; }

  /// Features for every candidate of one question; BM25 is min-max normalized
  /// across the candidates (a zero range maps to 0).
  std::vector<std::vector<double>> featurize(std::string_view question,
                                             const std::vector<std::string_view>& answers) const;
  /// Single pair: the BM25 slot degenerates to 0 under per-question normalization.
  std::vector<double> pair_features(std::string_view question, std::string_view answer) const;

  void write(std::ostream& out) const;
  static PairFeaturizer read(std::istream& in);

 private:
  void require_fitted() const;
  LsaModel lsa_;
  bm25::InvertedIndex index_;
  FeatureOptions opts_;
};

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);
double length_ratio(std::size_t a, std::size_t b);

}  // namespace faqkit::features
