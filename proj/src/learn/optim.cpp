#include "faqkit/learn/optim.hpp"

#include <cmath>
#include <string>

namespace faqkit::learn {

void Schedule::validate() const {
  if (total_steps == 0) throw ConfigError("total_steps must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup fraction must lie in [0, 1)");
  if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr)) throw ConfigError("learning rate must be finite and >= 0");
}

std::size_t Schedule::warmup_steps() const {
  return static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(total_steps)));
}

double Schedule::lr_at(std::size_t step) const {
  validate();
  if (step > total_steps) {
    throw DataError("step " + std::to_string(step) + " beyond total_steps " + std::to_string(total_steps));
  }
  const std::size_t warm = warmup_steps();
  if (step < warm) return peak_lr * static_cast<double>(step) / static_cast<double>(warm);
  if (total_steps == warm) return peak_lr;
  return peak_lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warm);
}

OptimizerState OptimizerState::for_model(const DenseModel& model) {
  OptimizerState s;
  s.m = model.zero_gradients();
  s.v = model.zero_gradients();
  return s;
}

double adamw_step(DenseModel& model, const Gradients& grads, OptimizerState& state, const Schedule& schedule,
                  const AdamWConfig& cfg) {
  auto& params = model.tensors();
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DataError("optimizer: tensor count mismatch");
  }
  if (state.step >= schedule.total_steps) throw DataError("optimizer: schedule exhausted");
  const double lr = schedule.lr_at(state.step);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].data;
    const auto& g = grads[i].data;
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
      throw DataError("optimizer: tensor shape mismatch");
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      p[j] *= 1.0 - lr * cfg.weight_decay;
      p[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg.eps);
    }
  }
  return lr;
}

}  // namespace faqkit::learn
