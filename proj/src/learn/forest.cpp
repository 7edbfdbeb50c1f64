#include "faqkit/learn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "faqkit/common.hpp"
#include "faqkit/io.hpp"

namespace faqkit::learn {

std::vector<double> DecisionTree::predict_proba(std::span<const double> x) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const auto& n = nodes[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[node].proba;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

struct Builder {
  const std::vector<std::vector<double>>& x;
  const std::vector<std::size_t>& y;
  std::size_t n_classes;
  const ForestConfig& cfg;
  Rng rng;
  DecisionTree tree;

  std::vector<double> distribution(const std::vector<std::size_t>& idx) const {
    std::vector<double> p(n_classes, 0.0);
    for (auto i : idx) p[y[i]] += 1.0;
    for (double& v : p) v /= static_cast<double>(idx.size());
    return p;
  }

  std::int32_t make_leaf(const std::vector<std::size_t>& idx) {
    TreeNode leaf;
    leaf.proba = distribution(idx);
    tree.nodes.push_back(std::move(leaf));
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  }

  static double gini(const std::vector<double>& counts, double n) {
    if (n == 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += c * c;
    return 1.0 - s / (n * n);
  }

  std::int32_t grow(std::vector<std::size_t> idx, std::size_t depth) {
    std::vector<double> counts(n_classes, 0.0);
    for (auto i : idx) counts[y[i]] += 1.0;
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (pure || depth >= cfg.max_depth || idx.size() < cfg.min_samples_split) return make_leaf(idx);

    const std::size_t d = x.front().size();
    const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    std::vector<std::size_t> feats(d);
    for (std::size_t f = 0; f < d; ++f) feats[f] = f;
    for (std::size_t i = 0; i < mtry; ++i) std::swap(feats[i], feats[i + rng.below(d - i)]);

    const double n = static_cast<double>(idx.size());
    double best_impurity = gini(counts, n);
    std::int64_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t fi = 0; fi < mtry; ++fi) {
      const std::size_t f = feats[fi];
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      std::vector<double> left(n_classes, 0.0), right = counts;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        left[y[sorted[k]]] += 1.0;
        right[y[sorted[k]]] -= 1.0;
        const double lo = x[sorted[k]][f], hi = x[sorted[k + 1]][f];
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(k + 1);
        const double imp = (nl * gini(left, nl) + (n - nl) * gini(right, n - nl)) / n;
        if (imp < best_impurity - 1e-15) {
          best_impurity = imp;
          best_feature = static_cast<std::int64_t>(f);
          best_threshold = lo + (hi - lo) / 2.0;
        }
      }
    }
    if (best_feature < 0) return make_leaf(idx);

    std::vector<std::size_t> li, ri;
    for (auto i : idx) (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? li : ri).push_back(i);
    const auto self = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[self].feature = static_cast<std::int32_t>(best_feature);
    tree.nodes[self].threshold = best_threshold;
    idx.clear();
    idx.shrink_to_fit();
    const auto l = grow(std::move(li), depth + 1);
    const auto r = grow(std::move(ri), depth + 1);
    tree.nodes[self].left = l;
    tree.nodes[self].right = r;
    return self;
  }
};

}  // namespace

TreeEnsemble fit_forest(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                        std::size_t n_classes, const ForestConfig& cfg) {
  if (x.empty()) throw DataError("fit_forest: empty data");
  if (x.size() != y.size()) throw DataError("fit_forest: features and labels differ in length");
  if (cfg.n_trees == 0) throw ConfigError("n_trees must be >= 1");
  if (n_classes == 0) throw ConfigError("n_classes must be >= 1");
  const std::size_t d = x.front().size();
  if (d == 0) throw DataError("fit_forest: zero features");
  for (const auto& row : x) {
    if (row.size() != d) throw DataError("fit_forest: ragged feature matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("fit_forest: non-finite feature");
    }
  }
  for (auto label : y) {
    if (label >= n_classes) throw DataError("fit_forest: label out of range");
  }

  TreeEnsemble ens;
  ens.n_classes_ = n_classes;
  ens.n_features_ = d;
  ens.trees_.resize(cfg.n_trees);
  auto build = [&](std::size_t t) {
    Builder b{x, y, n_classes, cfg, Rng(cfg.seed + t), {}};
    std::vector<std::size_t> boot(x.size());
    for (auto& i : boot) i = b.rng.below(x.size());
    b.grow(std::move(boot), 0);
    ens.trees_[t] = std::move(b.tree);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.n_trees));
  if (threads == 1) {
    for (std::size_t t = 0; t < cfg.n_trees; ++t) build(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < cfg.n_trees; t += threads) build(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return ens;
}

std::vector<double> TreeEnsemble::predict_proba(std::span<const double> x) const {
  if (trees_.empty()) throw DataError("forest is not fitted");
  if (x.size() != n_features_) throw DataError("forest: feature dimension mismatch");
  std::vector<double> p(n_classes_, 0.0);
  for (const auto& t : trees_) {
    const auto q = t.predict_proba(x);
    for (std::size_t c = 0; c < n_classes_; ++c) p[c] += q[c];
  }
  for (double& v : p) v /= static_cast<double>(trees_.size());
  return p;
}

namespace {
constexpr std::string_view kForestMagic = "FQKRF001";
}

void TreeEnsemble::write(std::ostream& out) const {
  out.write(kForestMagic.data(), kForestMagic.size());
  io::write_pod<std::uint64_t>(out, n_classes_);
  io::write_pod<std::uint64_t>(out, n_features_);
  io::write_pod<std::uint64_t>(out, trees_.size());
  for (const auto& t : trees_) {
    io::write_pod<std::uint64_t>(out, t.nodes.size());
    for (const auto& n : t.nodes) {
      io::write_pod<std::int32_t>(out, n.feature);
      io::write_pod<double>(out, n.threshold);
      io::write_pod<std::int32_t>(out, n.left);
      io::write_pod<std::int32_t>(out, n.right);
      io::write_doubles(out, n.proba);
    }
  }
}

TreeEnsemble TreeEnsemble::read(std::istream& in) {
  io::expect_magic(in, kForestMagic);
  TreeEnsemble e;
  e.n_classes_ = io::read_pod<std::uint64_t>(in);
  e.n_features_ = io::read_pod<std::uint64_t>(in);
  e.trees_.resize(io::read_pod<std::uint64_t>(in));
  for (auto& t : e.trees_) {
    t.nodes.resize(io::read_pod<std::uint64_t>(in));
    for (auto& n : t.nodes) {
      n.feature = io::read_pod<std::int32_t>(in);
      n.threshold = io::read_pod<double>(in);
      n.left = io::read_pod<std::int32_t>(in);
      n.right = io::read_pod<std::int32_t>(in);
      n.proba = io::read_doubles(in);
      const bool leaf = n.feature < 0;
      const auto n_nodes = static_cast<std::int32_t>(t.nodes.size());
      if (leaf ? n.proba.size() != e.n_classes_
               : (n.left <= 0 || n.right <= 0 || n.left >= n_nodes || n.right >= n_nodes ||
                  static_cast<std::size_t>(n.feature) >= e.n_features_)) {
        throw DataError("corrupt forest node");
      }
    }
  }
  return e;
}

void ForestClassifier::fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                           std::size_t n_classes) {
  ensemble_ = fit_forest(x, y, n_classes, cfg_);
}

std::vector<double> ForestClassifier::predict_proba(std::span<const double> x) const {
  return ensemble_.predict_proba(x);
}

}  // namespace faqkit::learn
