#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "faqkit/cotrain.hpp"
#include "faqkit/learn/forest.hpp"
#include "faqkit/synth.hpp"
#include "test_util.hpp"

using namespace faqkit;
using namespace faqkit::cotrain;

namespace {

/// Emits a fixed distribution regardless of input.
class ConstantLearner : public learn::ProbClassifier {
 public:
  explicit ConstantLearner(std::vector<double> p) : p_(std::move(p)) {}
  void fit(const std::vector<std::vector<double>>&, const std::vector<std::size_t>&, std::size_t) override {}
  std::vector<double> predict_proba(std::span<const double>) const override { return p_; }

 private:
  std::vector<double> p_;
};

LearnerFactory forest_factory(std::uint64_t seed) {
  return [seed] { return std::make_unique<learn::ForestClassifier>(learn::ForestConfig{60, 4, 2, seed, 1}); };
}

}  // namespace

TEST_SUITE("cotrain") {
  TEST_CASE("view split") {
    Rng rng(3);
    const auto x = std::vector<std::vector<double>>{testing::random_vector(rng, 4), testing::random_vector(rng, 4)};
    const auto [t1, t2] = split_views(x, {{0, 1}, {2, 3}});
    CHECK(t1.size() == 2);
    CHECK(t1[0].size() == 2);
    CHECK(t2[1][1] == x[1][3]);

    for (int t = 0; t < 20; ++t) {
      const std::size_t m = 2 + rng.below(20);
      const auto vs = random_bisection(m, rng.next());
      vs.validate(m);
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < 5; ++i) rows.push_back(testing::random_vector(rng, m));
      const auto [a, b] = split_views(rows, vs);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t j = 0; j < vs.view1.size(); ++j) CHECK(a[r][j] == rows[r][vs.view1[j]]);
        for (std::size_t j = 0; j < vs.view2.size(); ++j) CHECK(b[r][j] == rows[r][vs.view2[j]]);
        std::vector<double> re(m);
        for (std::size_t j = 0; j < vs.view1.size(); ++j) re[vs.view1[j]] = a[r][j];
        for (std::size_t j = 0; j < vs.view2.size(); ++j) re[vs.view2[j]] = b[r][j];
        CHECK(re == rows[r]);
      }
    }
    CHECK_THROWS(ViewSplit{{0, 1}, {1, 2}}.validate(3));
    CHECK_THROWS(ViewSplit{{0}, {2}}.validate(3));
    CHECK_THROWS(ViewSplit{{}, {0, 1}}.validate(2));
  }

  TEST_CASE("combined prediction") {
    const std::vector<double> u{1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (double p : combined_predict(u, u, u)) CHECK(p == doctest::Approx(1.0 / 3));
    const std::vector<double> certain{0, 1, 0}, soft{0.5, 0.2, 0.3};
    const auto c = combined_predict(certain, soft, u);
    CHECK(std::max_element(c.begin(), c.end()) - c.begin() == 1);
    const std::vector<double> p1{0.5, 0.3, 0.2}, p2{0.2, 0.5, 0.3}, pri{0.5, 0.25, 0.25};
    const double a = 0.5 * 0.2 / 0.5, b = 0.3 * 0.5 / 0.25, d = 0.2 * 0.3 / 0.25, z = a + b + d;
    const auto got = combined_predict(p1, p2, pri);
    CHECK(got[0] == doctest::Approx(a / z));
    CHECK(got[1] == doctest::Approx(b / z));
    CHECK(got[2] == doctest::Approx(d / z));
    const std::vector<double> l{1, 0, 0}, r{0, 1, 0};
    CHECK_THROWS(combined_predict(l, r, u));
  }

  TEST_CASE("empty unlabeled pool returns the input") {
    PartiallyLabeled d;
    d.n_classes = 2;
    d.x = {{0, 1}, {1, 0}};
    d.y = {0, 1};
    d.views = {{0}, {1}};
    CotrainConfig cfg;
    cfg.make_learner = forest_factory(1);
    const auto res = cotrain::cotrain(d, cfg);
    CHECK(res.labels == d.y);
    CHECK(res.log.empty());
  }

  TEST_CASE("unreachable threshold adds nothing") {
    PartiallyLabeled d;
    d.n_classes = 2;
    d.x = {{0, 1}, {1, 0}, {0.5, 0.5}, {0.2, 0.1}};
    d.y = {0, 1, kUnlabeled, kUnlabeled};
    d.views = {{0}, {1}};
    CotrainConfig cfg;
    cfg.tau = 1.0;
    cfg.make_learner = [] { return std::make_unique<ConstantLearner>(std::vector<double>{0.6, 0.4}); };
    const auto res = cotrain::cotrain(d, cfg);
    CHECK(res.labels == d.y);
    REQUIRE(res.log.size() == 1);
    CHECK(res.log[0].round == 1);
    CHECK(std::accumulate(res.log[0].added_per_class.begin(), res.log[0].added_per_class.end(), std::size_t{0}) == 0);
  }

  TEST_CASE("config validation") {
    CotrainConfig cfg;
    cfg.make_learner = forest_factory(1);
    cfg.tau = 0.5;
    CHECK_THROWS(cfg.validate());
    cfg.tau = 0.9;
    cfg.k_per_class = 0;
    CHECK_THROWS(cfg.validate());
  }

  TEST_CASE("two-view synthetic data expands with correct labels") {
    const auto tv = synth::two_view(50, 450, 3, 4, 11);
    CotrainConfig cfg;
    cfg.make_learner = forest_factory(11);
    cfg.k_per_class = 10;
    const auto res = cotrain::cotrain(tv.data, cfg);
    std::size_t before = 0, after = 0, added = 0, correct = 0;
    for (std::size_t i = 0; i < res.labels.size(); ++i) {
      before += tv.data.y[i] != kUnlabeled ? 1 : 0;
      after += res.labels[i] != kUnlabeled ? 1 : 0;
      if (tv.data.y[i] != kUnlabeled) {
        CHECK(res.labels[i] == tv.data.y[i]);
      } else if (res.labels[i] != kUnlabeled) {
        ++added;
        correct += static_cast<std::size_t>(res.labels[i]) == tv.truth[i] ? 1 : 0;
      }
    }
    CHECK(after >= 5 * before);
    CHECK(static_cast<double>(correct) >= 0.95 * static_cast<double>(added));
    std::size_t prev = before;
    for (const auto& r : res.log) {
      CHECK(r.pool_size >= prev);
      prev = r.pool_size;
    }
    CHECK(res.priors.size() == 3);
    CHECK(std::accumulate(res.priors.begin(), res.priors.end(), 0.0) == doctest::Approx(1.0));
    const auto again = cotrain::cotrain(tv.data, cfg);
    CHECK(again.labels == res.labels);
    const auto jsonl = round_log_jsonl(res.log);
    CHECK(static_cast<std::size_t>(std::count(jsonl.begin(), jsonl.end(), '\n')) == res.log.size());
    CHECK(jsonl.find("\"added_per_class\"") != std::string::npos);
  }
}
