#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "doctest.h"
#include "faqkit/bm25.hpp"
#include "faqkit/features.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace faqkit;
using oracles::diff_norm;
using oracles::reconstruct;
using namespace faqkit::features;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  }
  return e;
}


std::size_t recursive_edit(const std::string& a, const std::string& b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t cost = a.back() == b.back() ? 0 : 1;
  const auto a1 = a.substr(0, a.size() - 1);
  const auto b1 = b.substr(0, b.size() - 1);
  return std::min({recursive_edit(a1, b) + 1, recursive_edit(a, b1) + 1, recursive_edit(a1, b1) + cost});
}

const std::vector<std::string> kDocs{
    "como desbloquear o cartao de credito", "cartao bloqueado pelo aplicativo", "consultar saldo da conta corrente",
    "pagar fatura do cartao de credito",    "abrir conta pelo aplicativo",      "limite do cartao de credito",
    "saldo e extrato da conta",             "transferir dinheiro da conta"};

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("ngrams") {
    CHECK(ngrams({"a", "b"}) == std::vector<std::string>{"a", "b", "a_b"});
    CHECK(ngrams({}).empty());
    const auto g = ngrams({"a", "b", "c"}, 3);
    CHECK(g.size() == 6);
    CHECK(std::count(g.begin(), g.end(), "a_b_c") == 1);
    CHECK_THROWS_AS(ngrams({"a"}, 0), ConfigError);
  }

  TEST_CASE("tfidf matches per-cell computation") {
    const std::vector<std::vector<std::string>> corpus{{"a", "b", "a"}, {"b", "c"}, {"a", "c", "c", "d"}, {"b"}};
    const auto m = tfidf_fit(corpus, {1, 1});
    const auto dense = m.terms_by_docs();
    for (std::size_t t = 0; t < m.n_terms(); ++t) {
      const auto& term = m.terms()[t];
      double df = 0;
      for (const auto& d : corpus) df += std::count(d.begin(), d.end(), term) > 0 ? 1 : 0;
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        const double tf = static_cast<double>(std::count(corpus[d].begin(), corpus[d].end(), term));
        CHECK(dense(t, d) == doctest::Approx(tf * std::log(4.0 / df)).epsilon(1e-14));
      }
    }
    const auto all = tfidf_fit({{"x", "y"}, {"x"}}, {1, 1});
    CHECK(all.idf()[static_cast<std::size_t>(all.column("x"))] == 0.0);
    const auto single = tfidf_fit({{"x", "y"}}, {});
    for (double v : single.idf()) CHECK(v == 0.0);
    CHECK_THROWS_AS(tfidf_fit({}, {}), DataError);
  }

  TEST_CASE("svd examples") {
    Matrix d(3, 3);
    d(0, 0) = 3;
    d(1, 1) = 2;
    d(2, 2) = 1;
    const auto p = svd(d, 3);
    CHECK(p.sigma[0] == doctest::Approx(3));
    CHECK(p.sigma[1] == doctest::Approx(2));
    CHECK(p.sigma[2] == doctest::Approx(1));

    Matrix r1(4, 3);
    const std::vector<double> u{1, -2, 0.5, 3}, v{2, 1, -1};
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) r1(i, j) = u[i] * v[j];
    }
    CHECK(diff_norm(reconstruct(svd(r1, 1)), r1) <= 1e-10);
    CHECK_THROWS_AS(svd(r1, 2), DataError);
    CHECK_THROWS_AS(svd(r1, 0), ConfigError);
    CHECK_THROWS_AS(svd(r1, 4), ConfigError);
    Matrix bad(2, 2, 1.0);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(svd(bad, 1), DataError);
  }

  TEST_CASE("singular values agree with an independent eigen-solver") {
    Rng rng(31);
    for (int t = 0; t < 30; ++t) {
      const auto r = 2 + rng.below(30), c = 2 + rng.below(30);
      const auto m = testing::random_matrix(rng, r, c);
      const auto p = thin_svd(m);
      // eigenvalues of the smaller Gram matrix are the squared singular values
      const auto e = to_eigen(m);
      const Eigen::MatrixXd gram = r >= c ? Eigen::MatrixXd(e.transpose() * e) : Eigen::MatrixXd(e * e.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
      auto ev = es.eigenvalues();
      std::vector<double> expect;
      for (Eigen::Index i = ev.size() - 1; i >= 0; --i) expect.push_back(std::sqrt(std::max(0.0, ev(i))));
      REQUIRE(p.k() == expect.size());
      for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(p.sigma[i] - expect[i]) <= 1e-9);
      Eigen::JacobiSVD<Eigen::MatrixXd> js(e);
      for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(std::abs(p.sigma[i] - js.singularValues()(static_cast<Eigen::Index>(i))) <= 1e-9);
      }
    }
  }

  TEST_CASE("svd invariants on random matrices") {
    Rng rng(7);
    for (int t = 0; t < 30; ++t) {
      const auto r = 1 + rng.below(50), c = 1 + rng.below(50);
      const auto m = testing::random_matrix(rng, r, c);
      const auto k = std::min(r, c);
      const auto p = svd(m, k);
      CHECK(diff_norm(reconstruct(p), m) <= 1e-8);
      for (std::size_t i = 0; i < k; ++i) {
        if (i + 1 < k) CHECK(p.sigma[i] >= p.sigma[i + 1]);
        for (std::size_t j = 0; j < k; ++j) {
          double uu = 0, vv = 0;
          for (std::size_t a = 0; a < r; ++a) uu += p.u(a, i) * p.u(a, j);
          for (std::size_t a = 0; a < c; ++a) vv += p.v(a, i) * p.v(a, j);
          CHECK(std::abs(uu - (i == j ? 1.0 : 0.0)) <= 1e-8);
          CHECK(std::abs(vv - (i == j ? 1.0 : 0.0)) <= 1e-8);
        }
        // sign convention
        std::size_t arg = 0;
        for (std::size_t a = 1; a < r; ++a) {
          if (std::abs(p.u(a, i)) > std::abs(p.u(arg, i))) arg = a;
        }
        CHECK(p.u(arg, i) > 0);
      }
      double prev = std::numeric_limits<double>::infinity();
      for (std::size_t kk = 1; kk <= k; ++kk) {
        const double err = diff_norm(reconstruct(svd(m, kk)), m);
        CHECK(err <= prev + 1e-10);
        prev = err;
      }
    }
  }

  TEST_CASE("project examples") {
    Rng rng(12);
    const auto m = testing::random_matrix(rng, 12, 7);
    const auto p = svd(m, 7);
    for (std::size_t j = 0; j < 7; ++j) {
      std::vector<double> col(12);
      for (std::size_t i = 0; i < 12; ++i) col[i] = m(i, j);
      const auto z = project(col, p);
      for (std::size_t c = 0; c < 7; ++c) CHECK(std::abs(z[c] - p.v(j, c)) <= 1e-8);
    }
    const auto zero = project(std::vector<double>(12, 0.0), p);
    for (double z : zero) CHECK(z == 0.0);

    const auto d = testing::random_vector(rng, 12);
    const auto got = project(d, p);
    const auto eu = to_eigen(p.u);
    Eigen::VectorXd ed(12);
    for (int i = 0; i < 12; ++i) ed(i) = d[static_cast<std::size_t>(i)];
    Eigen::VectorXd s(7);
    for (int i = 0; i < 7; ++i) s(i) = 1.0 / p.sigma[static_cast<std::size_t>(i)];
    const Eigen::VectorXd expect = s.asDiagonal() * (eu.transpose() * ed);
    for (int c = 0; c < 7; ++c) CHECK(std::abs(got[static_cast<std::size_t>(c)] - expect(c)) <= 1e-10);

    const auto d2 = testing::random_vector(rng, 12);
    std::vector<double> mix(12);
    for (std::size_t i = 0; i < 12; ++i) mix[i] = 2.5 * d[i] + d2[i];
    const auto lhs = project(mix, p);
    const auto r2 = project(d2, p);
    for (std::size_t c = 0; c < 7; ++c) CHECK(std::abs(lhs[c] - (2.5 * got[c] + r2[c])) <= 1e-10);
    CHECK_THROWS_AS(project(std::vector<double>(5, 1.0), p), DataError);
  }

  TEST_CASE("sparse and dense projections agree") {
    const auto m = LsaModel::fit(kDocs, {}, {}, 4);
    for (const auto& doc : kDocs) {
      const auto toks = m.tokens(doc);
      const auto a = project(m.matrix().transform(toks), m.projection());
      const auto b = project(m.matrix().transform_dense(toks), m.projection());
      for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
    }
  }

  TEST_CASE("cosine") {
    const std::vector<double> u{1, 2, 3}, neg{-1, -2, -3}, e1{1, 0}, e2{0, 1};
    CHECK(cosine(u, u) == doctest::Approx(1));
    CHECK(cosine(u, neg) == doctest::Approx(-1));
    CHECK(cosine(e1, e2) == doctest::Approx(0));
    const std::vector<double> scaled{3, 6, 9}, v{0.5, -1, 2};
    CHECK(cosine(scaled, v) == doctest::Approx(cosine(u, v)));
    CHECK_THROWS_AS(cosine(u, std::vector<double>{0, 0, 0}), DataError);
  }

  TEST_CASE("levenshtein") {
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("kitten", "sitting") == recursive_edit("kitten", "sitting"));
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("ação", "acao") == 2);
    Rng rng(4);
    auto rnd = [&] {
      std::string s;
      for (std::size_t i = 0; i < rng.below(7); ++i) s += static_cast<char>('a' + rng.below(3));
      return s;
    };
    for (int t = 0; t < 200; ++t) {
      const auto a = rnd(), b = rnd(), c = rnd();
      CHECK(levenshtein(a, b) == recursive_edit(a, b));
      CHECK(levenshtein(a, b) == levenshtein(b, a));
      CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    }
  }

  TEST_CASE("prefilter_match") {
    const std::vector<CatalogEntry> catalog{{"cartao de credito", "produto"}, {"conta corrente", "produto"},
                                            {"aplicativo", "servico"}};
    CHECK(prefilter_match("Cartão de Crédito", catalog) == std::optional<std::string>("produto"));
    CHECK_FALSE(prefilter_match("previdencia privada", catalog).has_value());
    // "aplicatvo" vs "aplicativo": one edit over 10 characters
    CHECK(prefilter_match("aplicatvo", catalog, 0.2) == std::optional<std::string>("servico"));
    CHECK_FALSE(prefilter_match("aplicatvo", catalog, 0.05).has_value());
    CHECK_THROWS_AS(prefilter_match("x", {}), ConfigError);
  }

  TEST_CASE("embedding table") {
    testing::TempDir dir("emb");
    {
      std::ofstream f(dir / "e.txt");
      f << "2 3\nfoo 1 0 0\nbar 0 1 0\n";
    }
    const auto t = EmbeddingTable::load(dir / "e.txt");
    CHECK(t.size() == 2);
    CHECK(t.dim() == 3);
    CHECK(t.similarity("foo", "bar") == doctest::Approx(0));
    CHECK(t.similarity("foo", "foo") == doctest::Approx(1));
    CHECK_THROWS_AS(t.similarity("foo", "baz"), DataError);
    {
      std::ofstream f(dir / "bad.txt");
      f << "1 3\nfoo 1 0\n";
    }
    CHECK_THROWS_AS(EmbeddingTable::load(dir / "bad.txt"), DataError);
  }

  TEST_CASE("lsa model persists") {
    const auto m = LsaModel::fit(kDocs, {}, {}, 5);
    std::stringstream s;
    m.write(s);
    const auto back = LsaModel::read(s);
    for (const auto& d : kDocs) CHECK(back.embed(d) == m.embed(d));
    CHECK_THROWS_AS(LsaModel().embed("x"), DataError);
  }

  TEST_CASE("pair features") {
    std::vector<corpus::Answer> pool;
    for (std::size_t i = 0; i < kDocs.size(); ++i) pool.push_back({static_cast<std::int64_t>(i), kDocs[i]});
    const auto fz = PairFeaturizer::fit({{"cartao bloqueado", kDocs[1]}}, pool, {}, {}, 4, {});
    const auto same = fz.pair_features(kDocs[0], kDocs[0]);
    CHECK(same[kCosine] == doctest::Approx(1));
    CHECK(same[kJaccard] == 1.0);
    CHECK(same[kLengthRatio] == 1.0);
    CHECK(fz.pair_features("saldo", "cartao")[kJaccard] == 0.0);

    const std::string q = "quero desbloquear meu cartao";
    std::vector<std::string_view> answers{kDocs[0], kDocs[2], kDocs[3]};
    const auto f = fz.featurize(q, answers);
    const auto qt = fz.lsa().tokens(q);
    std::vector<double> raw;
    for (auto a : answers) raw.push_back(bm25::score_text(qt, fz.lsa().tokens(a), fz.index(), {}));
    const double lo = *std::min_element(raw.begin(), raw.end()), hi = *std::max_element(raw.begin(), raw.end());
    for (std::size_t i = 0; i < answers.size(); ++i) {
      const auto at = fz.lsa().tokens(answers[i]);
      CHECK(f[i][kCosine] == doctest::Approx(cosine(fz.lsa().embed(q), fz.lsa().embed(answers[i]))));
      CHECK(f[i][kBm25] == doctest::Approx((raw[i] - lo) / (hi - lo)));
      CHECK(f[i][kJaccard] == doctest::Approx(jaccard(qt, at)));
      CHECK(f[i][kLengthRatio] == doctest::Approx(length_ratio(qt.size(), at.size())));
      CHECK(f[i].size() == fz.dim());
    }
    CHECK_THROWS_AS(PairFeaturizer().pair_features("a", "b"), DataError);

    FeatureOptions with_vec;
    with_vec.include_lsa_vectors = true;
    const auto fz2 = PairFeaturizer::fit({}, pool, {}, {}, 3, with_vec);
    CHECK(fz2.dim() == kNumBaseFeatures + 6);
    const auto g = fz2.pair_features(kDocs[2], kDocs[5]);
    const auto eq = fz2.lsa().embed(kDocs[2]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(g[kNumBaseFeatures + c] == eq[c]);

    std::stringstream s;
    fz.write(s);
    const auto back = PairFeaturizer::read(s);
    CHECK(back.featurize(q, answers) == f);
  }
}
