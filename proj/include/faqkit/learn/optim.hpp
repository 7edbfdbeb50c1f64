#pragma once

#include <cstddef>
#include <vector>

#include "faqkit/common.hpp"
#include "faqkit/learn/model.hpp"

namespace faqkit::learn {

/// Linear warmup from 0 to peak_lr over ceil(warmup_fraction * total_steps)
/// steps, then linear decay to 0 at total_steps.
struct Schedule {
  std::size_t total_steps = 1;
  double warmup_fraction = 0.02;
  double peak_lr = 5e-5;

  void validate() const;
  std::size_t warmup_steps() const;
  double lr_at(std::size_t step) const;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptimizerState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t step = 0;

  static OptimizerState for_model(const DenseModel& model);
};

/// One decoupled-weight-decay Adam update using lr = schedule.lr_at(state.step),
/// then advances state.step. Returns the learning rate used.
double adamw_step(DenseModel& model, const Gradients& grads, OptimizerState& state, const Schedule& schedule,
                  const AdamWConfig& cfg = {});

}  // namespace faqkit::learn
