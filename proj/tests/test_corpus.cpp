#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "faqkit/corpus.hpp"
#include "faqkit/synth.hpp"
#include "test_util.hpp"

using namespace faqkit;
using namespace faqkit::corpus;

namespace {

FaqCollection small_faq(std::size_t n_questions, std::size_t n_answers) {
  std::vector<Question> qs;
  std::vector<Answer> as;
  std::set<std::pair<std::int64_t, std::int64_t>> rel;
  for (std::size_t i = 0; i < n_answers; ++i) as.push_back({static_cast<std::int64_t>(100 + i), "answer " + std::to_string(i)});
  for (std::size_t i = 0; i < n_questions; ++i) {
    const auto q = static_cast<std::int64_t>(i + 1);
    qs.push_back({q, "question " + std::to_string(i)});
    rel.insert({q, 100 + static_cast<std::int64_t>(i % n_answers)});
    if (i % 3 == 0) rel.insert({q, 100 + static_cast<std::int64_t>((i + 1) % n_answers)});
  }
  return FaqCollection(qs, as, rel);
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("anonymize_numbers keeps layout and is seeded") {
    CHECK(anonymize_numbers("sem digitos", 1) == "sem digitos");
    const auto a = anonymize_numbers("conta 12345", 7);
    REQUIRE(a.size() == 11);
    CHECK(a.substr(0, 6) == "conta ");
    CHECK(std::all_of(a.begin() + 6, a.end(), [](char c) { return c >= '0' && c <= '9'; }));
    CHECK(anonymize_numbers("conta 12345", 7) == a);

    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      std::string s;
      const std::string alphabet = "ab 0123456789-é";
      const auto len = rng.below(30);
      for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
      const auto out = anonymize_numbers(s, rng.next());
      REQUIRE(out.size() == s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const bool digit = s[i] >= '0' && s[i] <= '9';
        if (digit) {
          CHECK((out[i] >= '0' && out[i] <= '9'));
        } else {
          CHECK(out[i] == s[i]);
        }
      }
    }
  }

  TEST_CASE("preprocess applies transforms in order") {
    PreprocessOptions all;
    CHECK(preprocess("Ótimo!", all) == std::vector<std::string>{"otimo"});
    CHECK(preprocess("", all).empty());
    PreprocessOptions nums;
    nums.remove_numbers = true;
    CHECK(preprocess("abc 123 abc", nums) == std::vector<std::string>{"abc", "abc"});

    PreprocessOptions keep;
    keep.lowercase = false;
    keep.strip_accents = false;
    CHECK(preprocess("Ótimo serviço", keep) == std::vector<std::string>{"Ótimo", "serviço"});
  }

  TEST_CASE("stopword file is applied and a missing file is a configuration error") {
    testing::TempDir dir("stop");
    {
      std::ofstream f(dir / "stop.txt");
      f << "o\nde\n";
    }
    PreprocessOptions o;
    o.stopword_file = dir / "stop.txt";
    CHECK(preprocess("O cartão de crédito", o) == std::vector<std::string>{"cartao", "credito"});
    o.stopword_file = dir / "missing.txt";
    CHECK_THROWS_AS(Preprocessor{o}, ConfigError);
  }

  TEST_CASE("build_ranking_dataset samples per question") {
    const auto faq = small_faq(12, 40);
    const auto samples = build_ranking_dataset(faq, 15, 9);
    std::map<std::int64_t, std::vector<RankingSample>> by_q;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    for (const auto& s : samples) {
      by_q[s.q_id].push_back(s);
      CHECK(seen.insert({s.q_id, s.doc_id}).second);
      CHECK(s.label == (faq.is_relevant(s.q_id, s.doc_id) ? 1 : 0));
    }
    for (const auto& [q, v] : by_q) {
      CHECK(v.size() == 15);
      std::size_t pos = 0;
      for (const auto& s : v) pos += static_cast<std::size_t>(s.label);
      CHECK(pos == faq.relevant_for(q).size());
    }
    for (const auto& pair : faq.relevance()) CHECK(seen.count(pair) == 1);
    CHECK(build_ranking_dataset(faq, 15, 9) == samples);
    CHECK_THROWS_AS(build_ranking_dataset(faq, 41, 9), ConfigError);
  }

  TEST_CASE("m equal to the relevant count yields positives only") {
    std::vector<Question> qs{{1, "q"}};
    std::vector<Answer> as{{10, "a"}, {11, "b"}, {12, "c"}};
    FaqCollection faq(qs, as, {{1, 10}, {1, 11}});
    const auto samples = build_ranking_dataset(faq, 2, 1);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].label == 1);
    CHECK(samples[1].label == 1);
  }

  TEST_CASE("split partitions by question") {
    const auto faq = small_faq(10, 30);
    const auto samples = build_ranking_dataset(faq, 5, 2);
    const auto sp = split(samples, 0.5, 4);
    std::set<std::int64_t> tr, te, all;
    for (const auto& s : sp.train) tr.insert(s.q_id);
    for (const auto& s : sp.test) te.insert(s.q_id);
    for (const auto& s : samples) all.insert(s.q_id);
    CHECK(tr.size() == 5);
    CHECK(te.size() == 5);
    for (auto q : tr) CHECK(te.count(q) == 0);
    std::set<std::int64_t> uni = tr;
    uni.insert(te.begin(), te.end());
    CHECK(uni == all);
    CHECK(sp.train.size() + sp.test.size() == samples.size());
    const auto again = split(samples, 0.5, 4);
    CHECK(again.train == sp.train);
    CHECK_THROWS_AS(split(samples, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(split(samples, 0.0, 4), ConfigError);

    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
      const double ratio = rng.uniform(0.1, 0.9);
      const auto r = split(samples, ratio, rng.next());
      std::set<std::int64_t> a, b;
      for (const auto& s : r.train) a.insert(s.q_id);
      for (const auto& s : r.test) b.insert(s.q_id);
      for (auto q : a) CHECK(b.count(q) == 0);
    }
  }

  TEST_CASE("imbalance_stats") {
    std::vector<RankingSample> pos{{1, 1, 1}, {2, 2, 1}};
    auto s = imbalance_stats(pos);
    CHECK(s.positive_fraction == 1.0);
    CHECK(s.negative_fraction == 0.0);
    std::vector<RankingSample> mix;
    for (int q = 0; q < 4; ++q) {
      mix.push_back({q, 0, 1});
      for (int d = 1; d < 30; ++d) mix.push_back({q, d, 0});
    }
    s = imbalance_stats(mix);
    CHECK(s.positive_fraction == doctest::Approx(1.0 / 30));
    CHECK(s.positive_fraction + s.negative_fraction == doctest::Approx(1.0));
    CHECK_THROWS_AS(imbalance_stats({}), DataError);
  }

  TEST_CASE("FAQ rows round trip through JSON lines") {
    const auto faq = synth::faq_collection({20, 2, 3, 0.3, 0.3}, 5);
    const auto samples = build_ranking_dataset(faq, 6, 1);
    const auto rows = rows_from_samples(samples, faq);
    testing::TempDir dir("rows");
    {
      std::ofstream f(dir / "rows.jsonl");
      write_faq_rows(f, rows);
    }
    const auto back = read_faq_rows(dir / "rows.jsonl");
    CHECK(samples_from_rows(back) == samples);
    const auto faq2 = collection_from_rows(back);
    for (const auto& s : samples) CHECK(faq2.is_relevant(s.q_id, s.doc_id) == (s.label == 1));
  }

  TEST_CASE("collection invariants are enforced") {
    std::vector<Question> qs{{1, "q"}};
    std::vector<Answer> as{{10, "a"}};
    CHECK_THROWS_AS(FaqCollection(qs, as, {{1, 99}}), DataError);
    std::vector<Question> dup{{1, "q"}, {1, "r"}};
    CHECK_THROWS_AS(FaqCollection(dup, as, {{1, 10}}), DataError);
  }
}
