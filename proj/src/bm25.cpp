#include "faqkit/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "faqkit/common.hpp"
#include "faqkit/io.hpp"

namespace faqkit::bm25 {

void Params::validate() const {
  if (!(k1 > 0.0) || !std::isfinite(k1)) throw ConfigError("k1 must be > 0");
  if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("b must lie in [0, 1]");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be >= 0");
}

InvertedIndex InvertedIndex::build(
    const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& docs) {
  InvertedIndex idx;
  std::size_t total = 0;
  for (const auto& [doc_id, tokens] : docs) {
    if (!idx.doc_lengths_.emplace(doc_id, tokens.size()).second) {
      throw DataError("duplicate doc_id " + std::to_string(doc_id));
    }
    total += tokens.size();
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, f] : tf) idx.postings_[term].push_back({doc_id, f});
  }
  for (auto& [term, list] : idx.postings_) {
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) { return a.doc_id < b.doc_id; });
  }
  idx.avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
  return idx;
}

const std::vector<Posting>& InvertedIndex::postings(const std::string& term) const {
  static const std::vector<Posting> empty;
  auto it = postings_.find(term);
  return it == postings_.end() ? empty : it->second;
}

std::uint32_t InvertedIndex::term_frequency(const std::string& term, std::int64_t doc_id) const {
  const auto& list = postings(term);
  auto it = std::lower_bound(list.begin(), list.end(), doc_id,
                             [](const Posting& p, std::int64_t id) { return p.doc_id < id; });
  return (it != list.end() && it->doc_id == doc_id) ? it->tf : 0;
}

std::size_t InvertedIndex::doc_length(std::int64_t doc_id) const {
  auto it = doc_lengths_.find(doc_id);
  if (it == doc_lengths_.end()) throw DataError("unknown doc_id " + std::to_string(doc_id));
  return it->second;
}

void InvertedIndex::write(std::ostream& out) const {
  io::write_pod<std::uint64_t>(out, doc_lengths_.size());
  for (const auto& [id, len] : doc_lengths_) {
    io::write_pod<std::int64_t>(out, id);
    io::write_pod<std::uint64_t>(out, len);
  }
  std::vector<const std::string*> terms;
  for (const auto& [t, _] : postings_) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
  io::write_pod<std::uint64_t>(out, terms.size());
  for (const auto* t : terms) {
    io::write_string(out, *t);
    const auto& list = postings_.at(*t);
    io::write_pod<std::uint64_t>(out, list.size());
    for (const auto& p : list) {
      io::write_pod<std::int64_t>(out, p.doc_id);
      io::write_pod<std::uint32_t>(out, p.tf);
    }
  }
}

InvertedIndex InvertedIndex::read(std::istream& in) {
  InvertedIndex idx;
  const auto n_docs = io::read_pod<std::uint64_t>(in);
  std::size_t total = 0;
  for (std::uint64_t i = 0; i < n_docs; ++i) {
    const auto id = io::read_pod<std::int64_t>(in);
    const auto len = io::read_pod<std::uint64_t>(in);
    idx.doc_lengths_[id] = len;
    total += len;
  }
  const auto n_terms = io::read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    auto term = io::read_string(in);
    const auto n = io::read_pod<std::uint64_t>(in);
    std::vector<Posting> list(n);
    for (auto& p : list) {
      p.doc_id = io::read_pod<std::int64_t>(in);
      p.tf = io::read_pod<std::uint32_t>(in);
      if (p.tf == 0 || !idx.has_doc(p.doc_id)) throw DataError("corrupt posting for term " + term);
    }
    idx.postings_.emplace(std::move(term), std::move(list));
  }
  idx.avgdl_ = n_docs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n_docs);
  return idx;
}

void InvertedIndex::save_dir(const std::filesystem::path& dir) const {
  std::ostringstream bin;
  write(bin);
  nlohmann::json stats;
  stats["n_docs"] = n_docs();
  stats["avgdl"] = avgdl_;
  stats["n_terms"] = postings_.size();
  stats["format"] = "faqkit-bm25-v1";
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "postings.bin", bin.str());
  io::write_file_atomic(dir / "stats.json", stats.dump(2) + "\n");
}

InvertedIndex InvertedIndex::load_dir(const std::filesystem::path& dir) {
  std::istringstream in(io::read_file(dir / "postings.bin"));
  auto idx = read(in);
  const auto stats = nlohmann::json::parse(io::read_file(dir / "stats.json"));
  if (stats.at("n_docs").get<std::size_t>() != idx.n_docs()) {
    throw DataError("index stats.json disagrees with postings.bin");
  }
  return idx;
}

double idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

namespace {

double term_weight(double tf, double doc_len, double avgdl, const Params& p) {
  const double norm = avgdl > 0.0 ? doc_len / avgdl : 0.0;
  return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm)) + p.delta;
}

void require_nonempty(const InvertedIndex& index) {
  if (index.n_docs() == 0) throw DataError("BM25 index is empty");
}

}  // namespace

double score(const std::vector<std::string>& query, std::int64_t doc_id, const InvertedIndex& index,
             const Params& params) {
  require_nonempty(index);
  const auto len = static_cast<double>(index.doc_length(doc_id));
  double s = 0.0;
  for (const auto& q : query) {
    const double w = idf(index.n_docs(), index.doc_frequency(q));
    s += w * term_weight(index.term_frequency(q, doc_id), len, index.avgdl(), params);
  }
  return s;
}

double score_text(const std::vector<std::string>& query, const std::vector<std::string>& doc_tokens,
                  const InvertedIndex& index, const Params& params) {
  require_nonempty(index);
  std::unordered_map<std::string, std::uint32_t> tf;
  for (const auto& t : doc_tokens) ++tf[t];
  const auto len = static_cast<double>(doc_tokens.size());
  double s = 0.0;
  for (const auto& q : query) {
    auto it = tf.find(q);
    const double f = it == tf.end() ? 0.0 : it->second;
    s += idf(index.n_docs(), index.doc_frequency(q)) * term_weight(f, len, index.avgdl(), params);
  }
  return s;
}

std::vector<Hit> search(const std::vector<std::string>& query, const InvertedIndex& index, const Params& params,
                        std::size_t k) {
  require_nonempty(index);
  if (k == 0) throw ConfigError("k must be >= 1");
  // Full evaluation per document keeps search() consistent with score() to the bit.
  std::vector<Hit> hits;
  hits.reserve(index.n_docs());
  for (const auto& [id, _] : index.doc_lengths()) hits.push_back({id, score(query, id, index, params)});
  auto cmp = [](const Hit& a, const Hit& b) { return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id; };
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), cmp);
  hits.resize(k);
  return hits;
}

}  // namespace faqkit::bm25
