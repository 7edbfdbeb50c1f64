#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "faqkit/corpus.hpp"
#include "faqkit/features.hpp"
#include "faqkit/learn/model.hpp"
#include "faqkit/learn/optim.hpp"

namespace faqkit::learn {

/// Featurized candidates of one question.
struct QuestionGroup {
  std::int64_t q_id = 0;
  std::vector<std::int64_t> doc_ids;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

/// Groups samples by q_id (ascending) keeping sample order inside a group, and
/// featurizes each group with per-question BM25 normalization.
std::vector<QuestionGroup> featurize_groups(const std::vector<corpus::RankingSample>& samples,
                                            const corpus::FaqCollection& faq,
                                            const features::PairFeaturizer& featurizer);

struct TrainConfig {
  Arch arch = Arch::kLinear;
  std::size_t hidden = 16;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  double lr = 5e-5;
  double warmup_fraction = 0.02;
  AdamWConfig adamw;
  double label_smoothing = 0.1;
  double margin = 0.2;
  std::uint64_t seed = 42;
};

struct LossRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  DenseModel model;
  std::vector<LossRecord> trace;
};

/// Minibatch smoothed-CE training of a K-way softmax head over the rows of x.
TrainResult train_classifier(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                             std::size_t n_classes, const TrainConfig& cfg);

/// Pointwise ranking: 2-logit classifier over (question, candidate) features.
TrainResult train_pointwise(const std::vector<QuestionGroup>& groups, const TrainConfig& cfg);

/// Pairwise ranking: every negative is paired with a seeded random positive of
/// the same question; both members go through the same 1-output model.
TrainResult train_pairwise(const std::vector<QuestionGroup>& groups, const TrainConfig& cfg);

/// CSV with header "step,lr,loss".
std::string loss_trace_csv(const std::vector<LossRecord>& trace);

}  // namespace faqkit::learn
