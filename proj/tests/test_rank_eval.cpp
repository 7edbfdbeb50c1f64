#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "faqkit/bm25.hpp"
#include "faqkit/features.hpp"
#include "faqkit/learn/model.hpp"
#include "faqkit/rank_eval.hpp"
#include "test_util.hpp"

using namespace faqkit;
using namespace faqkit::rank_eval;

namespace {

/// Scores a candidate with a fixed linear function of its features.
class LinearHead : public learn::Head {
 public:
  explicit LinearHead(std::vector<double> w) : w_(std::move(w)) {}
  std::size_t in_dim() const override { return w_.size(); }
  std::size_t out_dim() const override { return 1; }
  std::vector<double> forward(std::span<const double> x) const override {
    double s = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * x[i];
    return {s};
  }

 private:
  std::vector<double> w_;
};

RankedList list_of(std::int64_t q, std::vector<std::int64_t> ids) {
  std::vector<double> scores(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) scores[i] = static_cast<double>(ids.size() - i);
  return rank_by_scores(q, ids, scores);
}

const std::vector<corpus::Answer> kPool{{1, "cartao de credito bloqueado"},
                                        {2, "cartao cartao cartao bloqueado hoje"},
                                        {3, "saldo da conta corrente"},
                                        {4, "fatura do cartao"},
                                        {5, "abrir conta no aplicativo"}};

}  // namespace

TEST_SUITE("rank_eval") {
  TEST_CASE("reciprocal rank") {
    const auto r = list_of(1, {10, 11, 12, 13, 14, 15, 16, 17, 18});
    CHECK(reciprocal_rank(r, {16}, 10) == doctest::Approx(1.0 / 7));
    CHECK(reciprocal_rank(r, {99}, 10) == 0.0);
    CHECK(reciprocal_rank(r, {10}, 10) == 1.0);
    CHECK(reciprocal_rank(r, {16}, 6) == 0.0);
    CHECK(reciprocal_rank(r, {13, 16}, 10) == doctest::Approx(0.25));
    CHECK_THROWS_AS(reciprocal_rank(r, {10}, 0), ConfigError);
  }

  TEST_CASE("mrr and ap@1 fixtures") {
    const std::vector<RankedList> two{list_of(1, {5, 6, 7, 8}), list_of(2, {1, 2, 3, 4})};
    const Relevance rel{{1, {5}}, {2, {4}}};
    CHECK(mrr(two, rel, 10) == doctest::Approx(0.625));
    CHECK(ap_at_1(two, rel) == doctest::Approx(0.5));
    const Relevance all_first{{1, {5}}, {2, {1}}};
    CHECK(mrr(two, all_first, 10) == 1.0);
    CHECK(ap_at_1(two, all_first) == 1.0);
    const Relevance none{{1, {8}}, {2, {4}}};
    CHECK(ap_at_1(two, none) == 0.0);

    std::vector<RankedList> ten;
    Relevance r10;
    for (int q = 0; q < 10; ++q) {
      ten.push_back(list_of(q, {100, 101, 102}));
      r10[q] = {q < 6 ? 100 : 102};
    }
    CHECK(ap_at_1(ten, r10) == doctest::Approx(0.6));
    CHECK_THROWS_AS(mrr({}, rel, 10), DataError);
    CHECK_THROWS_AS(ap_at_1({}, rel), DataError);
  }

  TEST_CASE("mrr equals a per-query loop and bounds ap@1") {
    Rng rng(9);
    for (int t = 0; t < 30; ++t) {
      std::vector<RankedList> lists;
      Relevance rel;
      double sum = 0;
      for (int q = 0; q < 20; ++q) {
        std::vector<std::int64_t> ids(12);
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
        rng.shuffle(ids);
        lists.push_back(list_of(q, ids));
        std::set<std::int64_t> r;
        for (std::size_t n = 0; n < 1 + rng.below(3); ++n) r.insert(static_cast<std::int64_t>(rng.below(16)));
        rel[q] = r;
        for (std::size_t pos = 0; pos < 10; ++pos) {
          if (r.count(ids[pos])) {
            sum += 1.0 / static_cast<double>(pos + 1);
            break;
          }
        }
      }
      const double m = mrr(lists, rel, 10);
      CHECK(m == doctest::Approx(sum / 20));
      CHECK(m >= ap_at_1(lists, rel));
      CHECK(m <= 1.0);
      for (std::size_t k = 1; k < 12; ++k) CHECK(mrr(lists, rel, k) <= mrr(lists, rel, k + 1));
    }
  }

  TEST_CASE("rank_by_scores ties go to ascending doc id") {
    const auto r = rank_by_scores(1, {9, 3, 5, 1}, {0.5, 0.9, 0.5, 0.1});
    CHECK(r.doc_ids == std::vector<std::int64_t>{3, 5, 9, 1});
    CHECK_THROWS_AS(rank_by_scores(1, {}, {}), DataError);
    CHECK_THROWS_AS(rank_by_scores(1, {1, 1}, {0.1, 0.2}), DataError);
  }

  TEST_CASE("rank_features matches independent scoring") {
    Rng rng(4);
    auto model = learn::DenseModel::init(learn::Arch::kLinear, 4, 2, 1, 8);
    std::vector<std::int64_t> ids;
    std::vector<std::vector<double>> feats;
    for (int i = 0; i < 15; ++i) {
      ids.push_back(100 + i);
      feats.push_back(testing::random_vector(rng, 4));
    }
    const auto r = rank_features(model, 7, ids, feats);
    std::vector<std::pair<double, std::int64_t>> oracle;
    for (std::size_t i = 0; i < ids.size(); ++i) oracle.emplace_back(-learn::softmax(model.forward(feats[i]))[1], ids[i]);
    std::sort(oracle.begin(), oracle.end());
    for (std::size_t i = 0; i < ids.size(); ++i) CHECK(r.doc_ids[i] == oracle[i].second);

    auto shifted = model;
    shifted.tensors()[1].data[0] += 3.0;
    shifted.tensors()[1].data[1] += 3.0;
    CHECK(rank_features(shifted, 7, ids, feats).doc_ids == r.doc_ids);
    CHECK(rank_features(model, 7, {5}, {feats[0]}).doc_ids == std::vector<std::int64_t>{5});
    CHECK(ranking_score(std::vector<double>{2.5}) == 2.5);
  }

  TEST_CASE("f1 report") {
    const std::vector<std::string> cls{"neg", "neu", "pos"};
    const std::vector<std::string> gold{"neg", "neu", "pos", "neg", "neu", "pos"};
    auto same = f1_report(gold, gold, cls);
    CHECK(same.macro_f1 == 1.0);
    CHECK(same.micro_f1 == 1.0);
    const std::vector<std::string> one(6, "pos");
    const auto r = f1_report(one, gold, cls);
    CHECK(r.per_class[2].recall == 1.0);
    CHECK(r.per_class[0].recall == 0.0);
    CHECK(r.per_class[0].precision == 0.0);
    CHECK(r.per_class[0].f1 == 0.0);

    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
      std::vector<std::string> p, g;
      for (int i = 0; i < 50; ++i) {
        p.push_back(cls[rng.below(3)]);
        g.push_back(cls[rng.below(3)]);
      }
      std::size_t conf[3][3] = {};
      auto idx = [&](const std::string& s) { return static_cast<std::size_t>(std::find(cls.begin(), cls.end(), s) - cls.begin()); };
      for (std::size_t i = 0; i < p.size(); ++i) ++conf[idx(g[i])][idx(p[i])];
      const auto rep = f1_report(p, g, cls);
      double macro = 0;
      std::size_t correct = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double tp = static_cast<double>(conf[c][c]);
        double pred = 0, act = 0;
        for (std::size_t o = 0; o < 3; ++o) {
          pred += static_cast<double>(conf[o][c]);
          act += static_cast<double>(conf[c][o]);
        }
        const double pr = pred ? tp / pred : 0, rc = act ? tp / act : 0, f = pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0;
        CHECK(rep.per_class[c].precision == doctest::Approx(pr));
        CHECK(rep.per_class[c].recall == doctest::Approx(rc));
        CHECK(rep.per_class[c].f1 == doctest::Approx(f));
        macro += f / 3;
        correct += conf[c][c];
      }
      CHECK(rep.macro_f1 == doctest::Approx(macro));
      CHECK(rep.micro_f1 == doctest::Approx(static_cast<double>(correct) / 50));
    }
    CHECK_THROWS_AS(f1_report({"neg"}, {}, cls), DataError);
    CHECK_THROWS_AS(f1_report({"bad"}, {"neg"}, cls), DataError);
  }

  TEST_CASE("rerank") {
    const auto fz = features::PairFeaturizer::fit({}, kPool, {}, {}, 3, {});
    std::map<std::int64_t, std::string> answers;
    for (const auto& a : kPool) answers[a.doc_id] = a.text;
    const auto base = bm25::search(fz.lsa().tokens("cartao bloqueado"), fz.index(), {}, 3);
    const LinearHead constant(std::vector<double>(fz.dim(), 0.0));
    const auto kept = rerank("cartao bloqueado", fz.index(), {}, constant, fz, answers, 3);
    REQUIRE(kept.doc_ids.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(kept.doc_ids[i] == base[i].doc_id);

    std::vector<double> w(fz.dim(), 0.0);
    w[features::kBm25] = -1.0;
    const LinearHead reverse(w);
    const auto flipped = rerank("cartao bloqueado", fz.index(), {}, reverse, fz, answers, 3);
    CHECK(flipped.doc_ids.front() == base.back().doc_id);
    CHECK(flipped.doc_ids.front() != base.front().doc_id);
    const auto one = rerank("cartao bloqueado", fz.index(), {}, reverse, fz, answers, 1);
    CHECK(one.doc_ids == std::vector<std::int64_t>{base.front().doc_id});
  }

  TEST_CASE("evaluate report") {
    const std::vector<RankedList> two{list_of(1, {5, 6, 7, 8}), list_of(2, {1, 2, 3, 4})};
    const auto rep = evaluate(two, {{1, {5}}, {2, {4}}}, 10);
    CHECK(rep.n_queries == 2);
    CHECK(rep.k == 10);
    CHECK(rep.mrr_at_k == doctest::Approx(0.625));
  }
}
