#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace faqkit::learn {

struct TreeNode {
  // Internal node: feature >= 0, goes left when x[feature] <= threshold.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> proba;  // leaves only
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<double> predict_proba(std::span<const double> x) const;
  std::size_t depth() const;
};

struct ForestConfig {
  std::size_t n_trees = 450;
  std::size_t max_depth = 5;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

/// Bagged Gini trees with sqrt(d) candidate features per split. Tree i is grown
/// from seed + i, so results do not depend on the thread count.
class TreeEnsemble {
 public:
  TreeEnsemble() = default;

  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::vector<double> predict_proba(std::span<const double> x) const;

  void write(std::ostream& out) const;
  static TreeEnsemble read(std::istream& in);

 private:
  friend TreeEnsemble fit_forest(const std::vector<std::vector<double>>&, const std::vector<std::size_t>&,
                                 std::size_t, const ForestConfig&);
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<DecisionTree> trees_;
};

TreeEnsemble fit_forest(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                        std::size_t n_classes, const ForestConfig& cfg = {});

/// Probabilistic base learner used by co-training.
class ProbClassifier {
 public:
  virtual ~ProbClassifier() = default;
  virtual void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                   std::size_t n_classes) = 0;
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
};

class ForestClassifier : public ProbClassifier {
 public:
  explicit ForestClassifier(ForestConfig cfg = {}) : cfg_(cfg) {}
  void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
           std::size_t n_classes) override;
  std::vector<double> predict_proba(std::span<const double> x) const override;
  const TreeEnsemble& ensemble() const { return ensemble_; }

 private:
  ForestConfig cfg_;
  TreeEnsemble ensemble_;
};

}  // namespace faqkit::learn
