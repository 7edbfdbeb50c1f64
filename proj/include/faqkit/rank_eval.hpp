#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "faqkit/bm25.hpp"
#include "faqkit/features.hpp"
#include "faqkit/learn/model.hpp"

namespace faqkit::rank_eval {

struct RankedList {
  std::int64_t q_id = 0;
  std::vector<std::int64_t> doc_ids;  // best first
  std::vector<double> scores;         // nonincreasing
};

struct Candidate {
  std::int64_t doc_id = 0;
  std::string_view text;
};

using Relevance = std::map<std::int64_t, std::set<std::int64_t>>;

/// Sorts by score descending, ties by ascending doc_id.
RankedList rank_by_scores(std::int64_t q_id, const std::vector<std::int64_t>& doc_ids,
                          const std::vector<double>& scores);

/// Ranking score of a head output: positive-class softmax probability for a
/// 2-logit head, the raw value for a 1-output head.
double ranking_score(std::span<const double> output);

/// Scores precomputed feature rows with the head and ranks them.
RankedList rank_features(const learn::Head& head, std::int64_t q_id, const std::vector<std::int64_t>& doc_ids,
                         const std::vector<std::vector<double>>& features);

RankedList rank_candidates(const learn::Head& head, std::int64_t q_id, std::string_view question,
                           const std::vector<Candidate>& candidates, const features::PairFeaturizer& featurizer);

/// BM25+ baseline over the same candidate set (scored with index statistics).
RankedList bm25_rank(std::int64_t q_id, std::string_view question, const std::vector<Candidate>& candidates,
                     const features::PairFeaturizer& featurizer);

/// 1 / position of the first relevant doc within the top k; 0 if none.
double reciprocal_rank(const RankedList& ranked, const std::set<std::int64_t>& relevant, std::size_t k);
double mrr(const std::vector<RankedList>& rankings, const Relevance& relevance, std::size_t k);
/// Fraction of queries whose top-1 doc is relevant (any of the relevant set).
double ap_at_1(const std::vector<RankedList>& rankings, const Relevance& relevance);

struct EvalReport {
  double mrr_at_k = 0.0;
  double ap_at_1 = 0.0;
  std::size_t k = 10;
  std::size_t n_queries = 0;
};

EvalReport evaluate(const std::vector<RankedList>& rankings, const Relevance& relevance, std::size_t k);

struct ClassScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct F1Report {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
};

/// Confusion-matrix scores; 0 whenever a denominator is 0.
F1Report f1_report(const std::vector<std::string>& preds, const std::vector<std::string>& golds,
                   const std::vector<std::string>& classes);

/// BM25+ top-k over the index, rescored by the head. Equal model scores keep
/// the BM25+ order.
RankedList rerank(std::string_view query, const bm25::InvertedIndex& index, const bm25::Params& params,
                  const learn::Head& head, const features::PairFeaturizer& featurizer,
                  const std::map<std::int64_t, std::string>& answers, std::size_t k);

}  // namespace faqkit::rank_eval
