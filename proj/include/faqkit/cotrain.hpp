#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "faqkit/learn/forest.hpp"

namespace faqkit::cotrain {

/// Column partition of the feature matrix into two disjoint, exhaustive views.
struct ViewSplit {
  std::vector<std::size_t> view1;
  std::vector<std::size_t> view2;

  /// Throws DataError for empty, overlapping, out-of-range or incomplete views.
  void validate(std::size_t n_columns) const;
};

/// Random bisection of [0, n_columns) with a fixed seed; both halves sorted.
ViewSplit random_bisection(std::size_t n_columns, std::uint64_t seed);

using Rows = std::vector<std::vector<double>>;

std::vector<double> project_columns(std::span<const double> row, const std::vector<std::size_t>& cols);
std::pair<Rows, Rows> split_views(const Rows& x, const ViewSplit& split);

inline constexpr std::int64_t kUnlabeled = -1;

struct PartiallyLabeled {
  Rows x;
  /// Class index in [0, n_classes) or kUnlabeled.
  std::vector<std::int64_t> y;
  std::size_t n_classes = 2;
  ViewSplit views;
};

using LearnerFactory = std::function<std::unique_ptr<learn::ProbClassifier>()>;

struct CotrainConfig {
  double tau = 0.9;
  std::size_t k_per_class = 5;
  std::size_t max_rounds = 50;
  /// Defaults to a ForestClassifier with its default configuration.
  LearnerFactory make_learner;

  void validate() const;
};

struct RoundLog {
  std::size_t round = 0;
  std::vector<std::size_t> added_per_class;
  std::size_t pool_size = 0;
  std::size_t u_remaining = 0;
};

struct CotrainResult {
  std::vector<std::int64_t> labels;
  std::unique_ptr<learn::ProbClassifier> h1;
  std::unique_ptr<learn::ProbClassifier> h2;
  std::vector<RoundLog> log;
  /// Class frequencies of the final labeled pool.
  std::vector<double> priors;
};

/// Each round fits h1 on view 1 and h2 on view 2 of the labeled pool. For each
/// classifier and class, the top k_per_class unlabeled rows (probability
/// descending, row index ascending) with probability >= tau on which both
/// classifiers agree are labeled. Stops when nothing qualifies, U is empty, or
/// max_rounds is reached; h1/h2 are refitted on the final pool.
CotrainResult cotrain(const PartiallyLabeled& data, const CotrainConfig& cfg);

/// p(c) proportional to p1(c) p2(c) / prior(c), renormalized.
std::vector<double> combined_predict(std::span<const double> p1, std::span<const double> p2,
                                     std::span<const double> priors);
std::vector<double> combined_predict(const learn::ProbClassifier& h1, const learn::ProbClassifier& h2,
                                     std::span<const double> x, const ViewSplit& views,
                                     std::span<const double> priors);

/// One JSON object per line: {"round", "added_per_class", "pool_size", "u_remaining"}.
std::string round_log_jsonl(const std::vector<RoundLog>& log);

}  // namespace faqkit::cotrain
