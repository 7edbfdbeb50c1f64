#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "faqkit/bm25.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace faqkit;
using namespace faqkit::oracles;
using namespace faqkit::bm25;

TEST_SUITE("bm25") {
  TEST_CASE("index counts") {
    const auto idx = InvertedIndex::build({{7, {"a", "b", "a"}}});
    CHECK(idx.term_frequency("a", 7) == 2);
    CHECK(idx.term_frequency("b", 7) == 1);
    CHECK(idx.doc_length(7) == 3);
    CHECK(idx.avgdl() == 3.0);
    CHECK_THROWS_AS(InvertedIndex::build({{1, {"a"}}, {1, {"b"}}}), DataError);
    const auto empty = InvertedIndex::build({});
    CHECK(empty.n_docs() == 0);
    CHECK_THROWS(search({"a"}, empty, {}, 3));
  }

  TEST_CASE("postings equal a nested-loop count") {
    Rng rng(21);
    const auto docs = random_docs(rng, 50, 15, 20);
    const auto idx = InvertedIndex::build(docs);
    for (std::size_t t = 0; t < 15; ++t) {
      const std::string term = "t" + std::to_string(t);
      std::vector<Posting> expect;
      for (const auto& [id, toks] : docs) {
        std::uint32_t c = 0;
        for (const auto& x : toks) c += x == term ? 1 : 0;
        if (c) expect.push_back({id, c});
      }
      auto got = idx.postings(term);
      std::sort(got.begin(), got.end(), [](const Posting& a, const Posting& b) { return a.doc_id < b.doc_id; });
      CHECK(got == expect);
    }
  }

  TEST_CASE("score matches direct evaluation on a 3-doc fixture") {
    const Docs docs{{1, {"cartao", "bloqueado", "cartao"}}, {2, {"saldo", "conta"}}, {3, {"cartao", "conta", "fatura", "pagar"}}};
    const auto idx = InvertedIndex::build(docs);
    const Params p{1.2, 0.75, 1.0};
    for (const auto& q : std::vector<std::vector<std::string>>{{"cartao"}, {"conta", "fatura"}, {"pix"}, {"cartao", "cartao", "saldo"}}) {
      for (std::int64_t d = 1; d <= 3; ++d) CHECK(std::abs(score(q, d, idx, p) - direct_score(q, d, docs, p)) <= 1e-9);
    }
    CHECK(score({}, 1, idx, p) == 0.0);
    // absent term contributes idf * delta
    CHECK(score({"pix"}, 2, idx, p) == doctest::Approx(idf(3, 0) * 1.0));
    CHECK_THROWS(score({"a"}, 99, idx, p));
  }

  TEST_CASE("b = 0 and delta = 0 reduce to classic saturation") {
    const Docs docs{{1, {"a", "a", "b"}}, {2, {"b"}}};
    const auto idx = InvertedIndex::build(docs);
    const Params p{1.5, 0.0, 0.0};
    const double tf = 2;
    CHECK(score({"a"}, 1, idx, p) == doctest::Approx(idf(2, 1) * tf * 2.5 / (tf + 1.5)));
  }

  TEST_CASE("search orders by score then doc id") {
    Rng rng(5);
    const auto docs = random_docs(rng, 50, 12, 15);
    const auto idx = InvertedIndex::build(docs);
    const Params p;
    for (int t = 0; t < 20; ++t) {
      std::vector<std::string> q;
      for (std::size_t i = 0; i < 1 + rng.below(4); ++i) q.push_back("t" + std::to_string(rng.below(14)));
      std::vector<Hit> all;
      for (const auto& [id, toks] : docs) all.push_back({id, score(q, id, idx, p)});
      std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
        return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
      });
      const auto got = search(q, idx, p, docs.size());
      REQUIRE(got.size() == all.size());
      for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(got[i].doc_id == all[i].doc_id);
        CHECK(got[i].score == all[i].score);
      }
      CHECK(search(q, idx, p, 5).size() == 5);
    }
  }

  TEST_CASE("search examples") {
    const auto one = InvertedIndex::build({{4, {"x"}}});
    CHECK(search({"x"}, one, {}, 1).front().doc_id == 4);
    const auto idx = InvertedIndex::build({{1, {"a", "b", "c"}}, {2, {"a", "a", "c"}}});
    CHECK(search({"a"}, idx, {}, 2).front().doc_id == 2);
  }

  TEST_CASE("an absent term shifts all scores equally") {
    Rng rng(8);
    const auto docs = random_docs(rng, 30, 10, 12);
    const auto idx = InvertedIndex::build(docs);
    const std::vector<std::string> q{"t1", "t3"};
    auto q2 = q;
    q2.push_back("never_seen");
    const double shift = score(q2, docs[0].first, idx, {}) - score(q, docs[0].first, idx, {});
    for (const auto& [id, toks] : docs) CHECK(score(q2, id, idx, {}) - score(q, id, idx, {}) == doctest::Approx(shift));
    const auto a = search(q, idx, {}, docs.size());
    const auto b = search(q2, idx, {}, docs.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].doc_id == b[i].doc_id);
  }

  TEST_CASE("score is nondecreasing in tf") {
    for (std::uint32_t tf = 0; tf < 10; ++tf) {
      std::vector<std::string> d1(tf, "a"), d2(tf + 1, "a");
      d1.resize(12, "z");
      d2.resize(12, "z");
      const auto idx = InvertedIndex::build({{1, d1}, {2, d2}, {3, {"q"}}});
      CHECK(score({"a"}, 2, idx, {}) >= score({"a"}, 1, idx, {}));
    }
  }

  TEST_CASE("params are validated") {
    CHECK_THROWS_AS((Params{0.0, 0.75, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((Params{1.2, 1.5, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((Params{1.2, 0.75, -1.0}.validate()), ConfigError);
  }

  TEST_CASE("index persists") {
    Rng rng(2);
    const auto docs = random_docs(rng, 20, 8, 10);
    const auto idx = InvertedIndex::build(docs);
    testing::TempDir dir("idx");
    idx.save_dir(dir.path());
    const auto back = InvertedIndex::load_dir(dir.path());
    CHECK(back.doc_lengths() == idx.doc_lengths());
    CHECK(back.avgdl() == idx.avgdl());
    for (const auto& [id, toks] : docs) CHECK(score({"t1", "t2"}, id, back, {}) == score({"t1", "t2"}, id, idx, {}));
  }
}
