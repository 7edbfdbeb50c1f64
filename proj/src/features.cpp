#include "faqkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "faqkit/io.hpp"
#include "faqkit/text.hpp"

namespace faqkit::features {

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n_max) {
  if (n_max == 0) throw ConfigError("n_max must be >= 1");
  std::vector<std::string> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        g += '_';
        g += tokens[i + j];
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::int64_t TermDocMatrix::column(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector TermDocMatrix::transform(const std::vector<std::string>& tokens) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : ngrams(tokens, n_max_)) {
    auto it = index_.find(g);
    if (it != index_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  for (const auto& [col, tf] : counts) {
    const double w = tf * idf_[col];
    if (w != 0.0) v.entries.emplace_back(col, w);
  }
  return v;
}

std::vector<double> TermDocMatrix::transform_dense(const std::vector<std::string>& tokens) const {
  std::vector<double> d(n_terms(), 0.0);
  for (const auto& [col, w] : transform(tokens).entries) d[col] = w;
  return d;
}

Matrix TermDocMatrix::terms_by_docs() const {
  Matrix t(n_terms(), n_docs());
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    for (const auto& [col, w] : rows_[j].entries) t(col, j) = w;
  }
  return t;
}

void TermDocMatrix::write(std::ostream& out) const {
  io::write_pod<std::uint64_t>(out, n_max_);
  io::write_pod<std::uint64_t>(out, terms_.size());
  for (const auto& t : terms_) io::write_string(out, t);
  io::write_doubles(out, idf_);
}

TermDocMatrix TermDocMatrix::read(std::istream& in) {
  TermDocMatrix m;
  m.n_max_ = io::read_pod<std::uint64_t>(in);
  const auto n = io::read_pod<std::uint64_t>(in);
  m.terms_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    m.terms_.push_back(io::read_string(in));
    m.index_.emplace(m.terms_.back(), static_cast<std::uint32_t>(i));
  }
  m.idf_ = io::read_doubles(in);
  if (m.idf_.size() != n) throw DataError("TF-IDF payload size mismatch");
  return m;
}

TermDocMatrix tfidf_fit(const std::vector<std::vector<std::string>>& corpus, const TfidfOptions& opts) {
  if (corpus.empty()) throw DataError("tfidf_fit: empty corpus");
  if (opts.n_max == 0) throw ConfigError("n_max must be >= 1");
  std::vector<std::map<std::string, std::size_t>> counts(corpus.size());
  std::map<std::string, std::size_t> df;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (auto& g : ngrams(corpus[i], opts.n_max)) ++counts[i][g];
    for (const auto& [g, _] : counts[i]) ++df[g];
  }
  TermDocMatrix m;
  m.n_max_ = opts.n_max;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [g, f] : df) {
    if (f < opts.min_df) continue;
    m.index_.emplace(g, static_cast<std::uint32_t>(m.terms_.size()));
    m.terms_.push_back(g);
    m.idf_.push_back(std::log(n / static_cast<double>(f)));
  }
  m.rows_.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& [g, tf] : counts[i]) {
      auto it = m.index_.find(g);
      if (it == m.index_.end()) continue;
      m.rows_[i].entries.emplace_back(it->second, static_cast<double>(tf) * m.idf_[it->second]);
    }
    // std::map iteration is sorted by term and terms_ is in the same order.
  }
  return m;
}

namespace {

void require_finite(const Matrix& t) {
  for (double x : t.data) {
    if (!std::isfinite(x)) throw DataError("svd: non-finite input");
  }
}

// The factorization works on column-major copies (row j of a Matrix holds
// column j) so every inner loop runs over contiguous memory.

/// One-sided Jacobi on a square matrix given by its columns: rotates pairs of
/// columns of w (and v) until all are orthogonal. Afterwards w = r * v.
void one_sided_jacobi(Matrix& wc, Matrix& vc) {
  const std::size_t n = wc.rows;
  const std::size_t m = wc.cols;
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      double* wp_col = wc.row(p).data();
      double* vp_col = vc.row(p).data();
      for (std::size_t q = p + 1; q < n; ++q) {
        double* wq_col = wc.row(q).data();
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = wp_col[i], wq = wq_col[i];
          alpha += wp * wp;
          beta += wq * wq;
          gamma += wp * wq;
        }
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = wp_col[i], wq = wq_col[i];
          wp_col[i] = c * wp - s * wq;
          wq_col[i] = s * wp + c * wq;
        }
        double* vq_col = vc.row(q).data();
        for (std::size_t i = 0; i < vc.cols; ++i) {
          const double vp = vp_col[i], vq = vq_col[i];
          vp_col[i] = c * vp - s * vq;
          vq_col[i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
  }
}

struct QrResult {
  Matrix qc;  // n x m: columns of the m x n orthonormal factor
  Matrix rc;  // n x n: columns of the upper triangular factor
};

/// Householder QR for m >= n, input given by its n columns of length m.
QrResult householder_qr(Matrix ac) {
  const std::size_t n = ac.rows, m = ac.cols;
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* col = ac.row(j).data();
    std::vector<double> v(col + j, col + m);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      reflectors.emplace_back();
      continue;
    }
    v[0] += std::copysign(norm, v[0]);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    for (std::size_t c = j; c < n; ++c) {
      double* target = ac.row(c).data() + j;
      double dot = 0.0;
      for (std::size_t i = 0; i < m - j; ++i) dot += v[i] * target[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = 0; i < m - j; ++i) target[i] -= f * v[i];
    }
    for (double& x : v) x /= std::sqrt(vnorm2);
    reflectors.push_back(std::move(v));
  }
  QrResult out{Matrix(n, m), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) out.rc(j, i) = ac(j, i);
  }
  for (std::size_t i = 0; i < n; ++i) out.qc(i, i) = 1.0;
  for (std::size_t jj = n; jj-- > 0;) {
    const auto& v = reflectors[jj];
    if (v.empty()) continue;
    for (std::size_t c = 0; c < n; ++c) {
      double* target = out.qc.row(c).data() + jj;
      double dot = 0.0;
      for (std::size_t i = 0; i < m - jj; ++i) dot += v[i] * target[i];
      for (std::size_t i = 0; i < m - jj; ++i) target[i] -= 2.0 * dot * v[i];
    }
  }
  return out;
}

LsaProjection thin_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows, n = a.cols;
  auto [qc, wc] = householder_qr(transpose(a));
  Matrix vc(n, n);
  for (std::size_t i = 0; i < n; ++i) vc(i, i) = 1.0;
  one_sided_jacobi(wc, vc);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double x : wc.row(j)) s += x * x;
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  LsaProjection out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  Matrix uc(n, m);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.sigma[c] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) out.v(i, c) = vc(src, i);
    if (sigma[src] == 0.0) continue;
    // column c of U = Q * (w_src / sigma)
    double* u = uc.row(c).data();
    for (std::size_t l = 0; l < n; ++l) {
      const double f = wc(src, l) / sigma[src];
      if (f == 0.0) continue;
      const double* q = qc.row(l).data();
      for (std::size_t i = 0; i < m; ++i) u[i] += q[i] * f;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    double* u = uc.row(c).data();
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(u[i]) > best + 1e-12) {
        best = std::abs(u[i]);
        arg = i;
      }
    }
    if (u[arg] < 0.0) {
      for (std::size_t i = 0; i < m; ++i) u[i] = -u[i];
      for (std::size_t i = 0; i < n; ++i) out.v(i, c) = -out.v(i, c);
    }
  }
  out.u = transpose(uc);
  return out;
}

}  // namespace

LsaProjection thin_svd(const Matrix& t) {
  require_finite(t);
  if (t.rows == 0 || t.cols == 0) throw DataError("svd: empty matrix");
  if (t.rows >= t.cols) return thin_svd_tall(t);
  // Wide input: factor the transpose and swap roles, then restore the U sign convention.
  auto tt = thin_svd_tall(transpose(t));
  LsaProjection out{std::move(tt.v), std::move(tt.sigma), std::move(tt.u)};
  for (std::size_t c = 0; c < out.k(); ++c) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < out.u.rows; ++i) {
      if (std::abs(out.u(i, c)) > best + 1e-12) {
        best = std::abs(out.u(i, c));
        arg = i;
      }
    }
    if (out.u(arg, c) < 0.0) {
      for (std::size_t i = 0; i < out.u.rows; ++i) out.u(i, c) = -out.u(i, c);
      for (std::size_t i = 0; i < out.v.rows; ++i) out.v(i, c) = -out.v(i, c);
    }
  }
  return out;
}

LsaProjection svd(const Matrix& t, std::size_t k) {
  if (k == 0 || k > std::min(t.rows, t.cols)) {
    throw ConfigError("svd: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(t.rows, t.cols)) + "]");
  }
  auto full = thin_svd(t);
  const double tol = static_cast<double>(std::max(t.rows, t.cols)) * std::numeric_limits<double>::epsilon() *
                     (full.sigma.empty() ? 0.0 : full.sigma[0]);
  if (!(full.sigma[k - 1] > tol)) {
    throw DataError("svd: matrix rank is below k = " + std::to_string(k));
  }
  LsaProjection out{Matrix(full.u.rows, k), std::vector<double>(full.sigma.begin(), full.sigma.begin() + k),
                    Matrix(full.v.rows, k)};
  for (std::size_t i = 0; i < full.u.rows; ++i) {
    for (std::size_t c = 0; c < k; ++c) out.u(i, c) = full.u(i, c);
  }
  for (std::size_t i = 0; i < full.v.rows; ++i) {
    for (std::size_t c = 0; c < k; ++c) out.v(i, c) = full.v(i, c);
  }
  return out;
}

LsaProjection svd(const TermDocMatrix& t, std::size_t k) { return svd(t.terms_by_docs(), k); }

std::vector<double> project(std::span<const double> d, const LsaProjection& proj) {
  if (d.size() != proj.u.rows) throw DataError("project: dimension mismatch");
  std::vector<double> out(proj.k(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    for (std::size_t c = 0; c < proj.k(); ++c) out[c] += proj.u(i, c) * d[i];
  }
  for (std::size_t c = 0; c < proj.k(); ++c) {
    if (!(proj.sigma[c] > 0.0)) throw DataError("project: zero singular value");
    out[c] /= proj.sigma[c];
  }
  return out;
}

std::vector<double> project(const SparseVector& d, const LsaProjection& proj) {
  std::vector<double> out(proj.k(), 0.0);
  for (const auto& [i, x] : d.entries) {
    if (i >= proj.u.rows) throw DataError("project: dimension mismatch");
    for (std::size_t c = 0; c < proj.k(); ++c) out[c] += proj.u(i, c) * x;
  }
  for (std::size_t c = 0; c < proj.k(); ++c) {
    if (!(proj.sigma[c] > 0.0)) throw DataError("project: zero singular value");
    out[c] /= proj.sigma[c];
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto x = text::to_u32(a);
  const auto y = text::to_u32(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

std::optional<std::string> prefilter_match(std::string_view input, const std::vector<CatalogEntry>& catalog,
                                           double max_edit_ratio, const corpus::Preprocessor& prep,
                                           const std::vector<std::string>& class_priority) {
  if (catalog.empty()) throw ConfigError("prefilter_match: empty catalog");
  auto rank_of = [&](const std::string& label) {
    auto it = std::find(class_priority.begin(), class_priority.end(), label);
    return static_cast<std::size_t>(it - class_priority.begin());
  };
  const std::string needle = text::join(prep(input), " ");
  std::optional<std::size_t> exact;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (text::join(prep(catalog[i].text), " ") == needle) {
      if (!exact || rank_of(catalog[i].label) < rank_of(catalog[*exact].label)) exact = i;
    }
  }
  if (exact) return catalog[*exact].label;

  const std::size_t needle_len = text::code_point_count(needle);
  std::optional<std::size_t> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const std::string cand = text::join(prep(catalog[i].text), " ");
    const std::size_t denom = std::max(needle_len, text::code_point_count(cand));
    if (denom == 0) continue;
    const double ratio = static_cast<double>(levenshtein(needle, cand)) / static_cast<double>(denom);
    if (ratio < best_ratio || (ratio == best_ratio && best && rank_of(catalog[i].label) < rank_of(catalog[*best].label))) {
      best_ratio = ratio;
      best = i;
    }
  }
  if (best && best_ratio <= max_edit_ratio) return catalog[*best].label;
  return std::nullopt;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file " + path.string());
  std::size_t n = 0, dim = 0;
  if (!(in >> n >> dim) || dim == 0) throw DataError("embedding file: bad header");
  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::string id;
    if (!(in >> id)) throw DataError("embedding file: expected " + std::to_string(n) + " rows");
    std::vector<double> v(dim);
    for (auto& x : v) {
      if (!(in >> x)) throw DataError("embedding file: short row for " + id);
    }
    table.add(std::move(id), std::move(v));
  }
  return table;
}

void EmbeddingTable::add(std::string id, std::vector<double> vec) {
  if (vec.size() != dim_) throw DataError("embedding " + id + " has wrong dimension");
  for (double x : vec) {
    if (!std::isfinite(x)) throw DataError("embedding " + id + " has non-finite entries");
  }
  vectors_[std::move(id)] = std::move(vec);
}

const std::vector<double>* EmbeddingTable::find(const std::string& id) const {
  auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

double EmbeddingTable::similarity(const std::string& a, const std::string& b) const {
  const auto* va = find(a);
  const auto* vb = find(b);
  if (!va || !vb) throw DataError("unknown embedding id");
  return cosine(*va, *vb);
}

LsaModel LsaModel::fit(const std::vector<std::string>& documents, const corpus::PreprocessOptions& prep,
                       const TfidfOptions& tfidf, std::size_t k) {
  LsaModel m;
  m.prep_ = corpus::Preprocessor(prep);
  std::vector<std::vector<std::string>> toks;
  toks.reserve(documents.size());
  for (const auto& d : documents) toks.push_back(m.prep_(d));
  m.tdm_ = tfidf_fit(toks, tfidf);
  m.proj_ = svd(m.tdm_, k);
  m.fitted_ = true;
  return m;
}

std::vector<double> LsaModel::embed(std::string_view text) const { return embed_tokens(prep_(text)); }

std::vector<double> LsaModel::embed_tokens(const std::vector<std::string>& tokens) const {
  if (!fitted_) throw DataError("LSA model is not fitted");
  return project(tdm_.transform(tokens), proj_);
}

namespace {
constexpr std::string_view kLsaMagic = "FQKLSA01";
}

void LsaModel::write(std::ostream& out) const {
  if (!fitted_) throw DataError("LSA model is not fitted");
  out.write(kLsaMagic.data(), kLsaMagic.size());
  const auto& o = prep_.options();
  io::write_pod<std::uint8_t>(out, o.lowercase);
  io::write_pod<std::uint8_t>(out, o.strip_accents);
  io::write_pod<std::uint8_t>(out, o.remove_punct);
  io::write_pod<std::uint8_t>(out, o.remove_numbers);
  io::write_pod<std::uint8_t>(out, o.stemming);
  std::vector<std::string> stop(prep_.stopwords().begin(), prep_.stopwords().end());
  std::sort(stop.begin(), stop.end());
  io::write_pod<std::uint64_t>(out, stop.size());
  for (const auto& s : stop) io::write_string(out, s);
  tdm_.write(out);
  io::write_matrix(out, proj_.u);
  io::write_doubles(out, proj_.sigma);
  io::write_matrix(out, proj_.v);
}

LsaModel LsaModel::read(std::istream& in) {
  io::expect_magic(in, kLsaMagic);
  corpus::PreprocessOptions o;
  o.lowercase = io::read_pod<std::uint8_t>(in) != 0;
  o.strip_accents = io::read_pod<std::uint8_t>(in) != 0;
  o.remove_punct = io::read_pod<std::uint8_t>(in) != 0;
  o.remove_numbers = io::read_pod<std::uint8_t>(in) != 0;
  o.stemming = io::read_pod<std::uint8_t>(in) != 0;
  std::unordered_set<std::string> stop;
  const auto n_stop = io::read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_stop; ++i) stop.insert(io::read_string(in));
  LsaModel m;
  m.prep_ = corpus::Preprocessor(o, std::move(stop));
  m.tdm_ = TermDocMatrix::read(in);
  m.proj_.u = io::read_matrix(in);
  m.proj_.sigma = io::read_doubles(in);
  m.proj_.v = io::read_matrix(in);
  if (m.proj_.u.rows != m.tdm_.n_terms() || m.proj_.u.cols != m.proj_.k()) {
    throw DataError("LSA model: inconsistent dimensions");
  }
  m.fitted_ = true;
  return m;
}

void LsaModel::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  write(out);
  io::write_file_atomic(path, out.str());
}

LsaModel LsaModel::load(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  return read(in);
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double length_ratio(std::size_t a, std::size_t b) {
  const std::size_t hi = std::max(a, b);
  return hi == 0 ? 0.0 : static_cast<double>(std::min(a, b)) / static_cast<double>(hi);
}

PairFeaturizer::PairFeaturizer(LsaModel lsa, bm25::InvertedIndex index, FeatureOptions opts)
    : lsa_(std::move(lsa)), index_(std::move(index)), opts_(opts) {
  opts_.bm25.validate();
}

PairFeaturizer PairFeaturizer::fit(const std::vector<std::pair<std::string, std::string>>& relevant_pairs,
                                   const std::vector<corpus::Answer>& answer_pool,
                                   const corpus::PreprocessOptions& prep, const TfidfOptions& tfidf,
                                   std::size_t lsa_k, FeatureOptions opts) {
  if (answer_pool.empty()) throw DataError("featurizer: empty answer pool");
  std::vector<std::string> docs;
  docs.reserve(relevant_pairs.size() + answer_pool.size());
  for (const auto& [q, a] : relevant_pairs) docs.push_back(q + "\n" + a);
  for (const auto& a : answer_pool) docs.push_back(a.text);
  auto lsa = LsaModel::fit(docs, prep, tfidf, lsa_k);
  std::vector<std::pair<std::int64_t, std::vector<std::string>>> index_docs;
  index_docs.reserve(answer_pool.size());
  for (const auto& a : answer_pool) index_docs.emplace_back(a.doc_id, lsa.tokens(a.text));
  auto index = bm25::InvertedIndex::build(index_docs);
  return PairFeaturizer(std::move(lsa), std::move(index), opts);
}

std::size_t PairFeaturizer::dim() const {
  return kNumBaseFeatures + (opts_.include_lsa_vectors ? 2 * lsa_.k() : 0);
}

void PairFeaturizer::require_fitted() const {
  if (!fitted()) throw DataError("featurizer context is not fitted");
}

std::vector<std::vector<double>> PairFeaturizer::featurize(std::string_view question,
                                                           const std::vector<std::string_view>& answers) const {
  require_fitted();
  const auto q_tokens = lsa_.tokens(question);
  const auto q_vec = lsa_.embed_tokens(q_tokens);
  const bool q_zero = std::all_of(q_vec.begin(), q_vec.end(), [](double x) { return x == 0.0; });
  std::vector<std::vector<double>> out;
  out.reserve(answers.size());
  std::vector<double> raw_bm25;
  raw_bm25.reserve(answers.size());
  for (auto a : answers) {
    const auto a_tokens = lsa_.tokens(a);
    const auto a_vec = lsa_.embed_tokens(a_tokens);
    const bool a_zero = std::all_of(a_vec.begin(), a_vec.end(), [](double x) { return x == 0.0; });
    std::vector<double> f(dim(), 0.0);
    f[kCosine] = (q_zero || a_zero) ? 0.0 : cosine(q_vec, a_vec);
    raw_bm25.push_back(bm25::score_text(q_tokens, a_tokens, index_, opts_.bm25));
    f[kJaccard] = jaccard(q_tokens, a_tokens);
    f[kLengthRatio] = length_ratio(q_tokens.size(), a_tokens.size());
    if (opts_.include_lsa_vectors) {
      std::copy(q_vec.begin(), q_vec.end(), f.begin() + kNumBaseFeatures);
      std::copy(a_vec.begin(), a_vec.end(), f.begin() + kNumBaseFeatures + static_cast<std::ptrdiff_t>(lsa_.k()));
    }
    out.push_back(std::move(f));
  }
  if (!raw_bm25.empty()) {
    const auto [lo, hi] = std::minmax_element(raw_bm25.begin(), raw_bm25.end());
    const double range = *hi - *lo;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i][kBm25] = range > 0.0 ? (raw_bm25[i] - *lo) / range : 0.0;
    }
  }
  return out;
}

std::vector<double> PairFeaturizer::pair_features(std::string_view question, std::string_view answer) const {
  return featurize(question, {answer}).front();
}

void PairFeaturizer::write(std::ostream& out) const {
  require_fitted();
  lsa_.write(out);
  index_.write(out);
  io::write_pod<double>(out, opts_.bm25.k1);
  io::write_pod<double>(out, opts_.bm25.b);
  io::write_pod<double>(out, opts_.bm25.delta);
  io::write_pod<std::uint8_t>(out, opts_.include_lsa_vectors);
}

PairFeaturizer PairFeaturizer::read(std::istream& in) {
  auto lsa = LsaModel::read(in);
  auto index = bm25::InvertedIndex::read(in);
  FeatureOptions opts;
  opts.bm25.k1 = io::read_pod<double>(in);
  opts.bm25.b = io::read_pod<double>(in);
  opts.bm25.delta = io::read_pod<double>(in);
  opts.include_lsa_vectors = io::read_pod<std::uint8_t>(in) != 0;
  return PairFeaturizer(std::move(lsa), std::move(index), opts);
}

}  // namespace faqkit::features
