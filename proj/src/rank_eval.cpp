#include "faqkit/rank_eval.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "faqkit/common.hpp"

namespace faqkit::rank_eval {

RankedList rank_by_scores(std::int64_t q_id, const std::vector<std::int64_t>& doc_ids,
                          const std::vector<double>& scores) {
  if (doc_ids.empty()) throw DataError("no candidates to rank");
  if (doc_ids.size() != scores.size()) throw DataError("doc_ids and scores differ in length");
  std::set<std::int64_t> seen;
  for (auto id : doc_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate candidate doc_id " + std::to_string(id));
  }
  std::vector<std::size_t> order(doc_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : doc_ids[a] < doc_ids[b];
  });
  RankedList out{q_id, {}, {}};
  for (auto i : order) {
    out.doc_ids.push_back(doc_ids[i]);
    out.scores.push_back(scores[i]);
  }
  return out;
}

double ranking_score(std::span<const double> output) {
  if (output.size() == 1) return output[0];
  if (output.size() == 2) return learn::softmax(output)[1];
  throw DataError("ranking head must have 1 or 2 outputs");
}

RankedList rank_features(const learn::Head& head, std::int64_t q_id, const std::vector<std::int64_t>& doc_ids,
                         const std::vector<std::vector<double>>& features) {
  if (doc_ids.size() != features.size()) throw DataError("doc_ids and features differ in length");
  std::vector<double> scores;
  scores.reserve(features.size());
  for (const auto& f : features) scores.push_back(ranking_score(head.forward(f)));
  return rank_by_scores(q_id, doc_ids, scores);
}

RankedList rank_candidates(const learn::Head& head, std::int64_t q_id, std::string_view question,
                           const std::vector<Candidate>& candidates, const features::PairFeaturizer& featurizer) {
  if (candidates.empty()) throw DataError("no candidates to rank");
  std::vector<std::int64_t> ids;
  std::vector<std::string_view> texts;
  for (const auto& c : candidates) {
    ids.push_back(c.doc_id);
    texts.push_back(c.text);
  }
  return rank_features(head, q_id, ids, featurizer.featurize(question, texts));
}

RankedList bm25_rank(std::int64_t q_id, std::string_view question, const std::vector<Candidate>& candidates,
                     const features::PairFeaturizer& featurizer) {
  if (candidates.empty()) throw DataError("no candidates to rank");
  const auto q = featurizer.lsa().tokens(question);
  std::vector<std::int64_t> ids;
  std::vector<double> scores;
  for (const auto& c : candidates) {
    ids.push_back(c.doc_id);
    scores.push_back(bm25::score_text(q, featurizer.lsa().tokens(c.text), featurizer.index(),
                                      featurizer.options().bm25));
  }
  return rank_by_scores(q_id, ids, scores);
}

double reciprocal_rank(const RankedList& ranked, const std::set<std::int64_t>& relevant, std::size_t k) {
  if (k == 0) throw ConfigError("k must be >= 1");
  const std::size_t n = std::min(k, ranked.doc_ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant.count(ranked.doc_ids[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

namespace {

const std::set<std::int64_t>& relevant_for(const Relevance& relevance, std::int64_t q_id) {
  static const std::set<std::int64_t> none;
  auto it = relevance.find(q_id);
  return it == relevance.end() ? none : it->second;
}

}  // namespace

double mrr(const std::vector<RankedList>& rankings, const Relevance& relevance, std::size_t k) {
  if (rankings.empty()) throw DataError("mrr over an empty query set");
  double s = 0.0;
  for (const auto& r : rankings) s += reciprocal_rank(r, relevant_for(relevance, r.q_id), k);
  return s / static_cast<double>(rankings.size());
}

double ap_at_1(const std::vector<RankedList>& rankings, const Relevance& relevance) {
  if (rankings.empty()) throw DataError("ap@1 over an empty query set");
  std::size_t hits = 0;
  for (const auto& r : rankings) {
    if (!r.doc_ids.empty() && relevant_for(relevance, r.q_id).count(r.doc_ids.front())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

EvalReport evaluate(const std::vector<RankedList>& rankings, const Relevance& relevance, std::size_t k) {
  return {mrr(rankings, relevance, k), ap_at_1(rankings, relevance), k, rankings.size()};
}

F1Report f1_report(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                   const std::vector<std::string>& classes) {
  if (preds.size() != golds.size()) throw DataError("predictions and gold labels differ in length");
  if (classes.empty()) throw ConfigError("empty class list");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], i).second) throw ConfigError("duplicate class " + classes[i]);
  }
  auto lookup = [&](const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw DataError("unknown class label '" + label + "'");
    return it->second;
  };
  std::vector<std::size_t> tp(classes.size(), 0), fp(classes.size(), 0), fn(classes.size(), 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = lookup(preds[i]), g = lookup(golds[i]);
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  auto harmonic = [](double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); };
  F1Report rep;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ClassScores s{classes[c], ratio(tp[c], tp[c] + fp[c]), ratio(tp[c], tp[c] + fn[c]), 0.0, tp[c] + fn[c]};
    s.f1 = harmonic(s.precision, s.recall);
    rep.macro_precision += s.precision;
    rep.macro_recall += s.recall;
    rep.macro_f1 += s.f1;
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
    rep.per_class.push_back(std::move(s));
  }
  const double n = static_cast<double>(classes.size());
  rep.macro_precision /= n;
  rep.macro_recall /= n;
  rep.macro_f1 /= n;
  rep.micro_precision = ratio(tp_all, tp_all + fp_all);
  rep.micro_recall = ratio(tp_all, tp_all + fn_all);
  rep.micro_f1 = harmonic(rep.micro_precision, rep.micro_recall);
  return rep;
}

RankedList rerank(std::string_view query, const bm25::InvertedIndex& index, const bm25::Params& params,
                  const learn::Head& head, const features::PairFeaturizer& featurizer,
                  const std::map<std::int64_t, std::string>& answers, std::size_t k) {
  const auto hits = bm25::search(featurizer.lsa().tokens(query), index, params, k);
  std::vector<std::string_view> texts;
  for (const auto& h : hits) {
    auto it = answers.find(h.doc_id);
    if (it == answers.end()) throw DataError("no answer text for doc_id " + std::to_string(h.doc_id));
    texts.push_back(it->second);
  }
  const auto feats = featurizer.featurize(query, texts);
  std::vector<std::size_t> order(hits.size());
  std::vector<double> scores(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    order[i] = i;
    scores[i] = ranking_score(head.forward(feats[i]));
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedList out;
  for (auto i : order) {
    out.doc_ids.push_back(hits[i].doc_id);
    out.scores.push_back(scores[i]);
  }
  return out;
}

}  // namespace faqkit::rank_eval
