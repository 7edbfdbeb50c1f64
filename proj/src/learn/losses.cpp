#include "faqkit/learn/losses.hpp"

#include <cmath>
#include <string>

#include "faqkit/common.hpp"
#include "faqkit/learn/model.hpp"

namespace faqkit::learn {

LossGrad smoothed_ce_loss(std::span<const double> logits, std::size_t label, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("label smoothing must lie in [0, 1)");
  if (label >= logits.size()) throw DataError("label " + std::to_string(label) + " out of range");
  for (double z : logits) {
    if (!std::isfinite(z)) throw DataError("non-finite logits");
  }
  const std::size_t k = logits.size();
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double log_z = mx + std::log(sum);

  LossGrad out;
  out.grad.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = (i == label ? 1.0 - epsilon : 0.0) + epsilon / static_cast<double>(k);
    const double log_p = logits[i] - log_z;
    out.loss -= t * log_p;
    out.grad[i] = std::exp(log_p) - t;
  }
  return out;
}

HingeGrad hinge_pair_loss(double s_pos, double s_neg, double margin) {
  if (!std::isfinite(s_pos) || !std::isfinite(s_neg) || !std::isfinite(margin)) {
    throw DataError("non-finite hinge inputs");
  }
  if (margin < 0.0) throw ConfigError("margin must be >= 0");
  const double slack = margin - s_pos + s_neg;
  if (slack <= 0.0) return {};
  return {slack, -1.0, 1.0};
}

}  // namespace faqkit::learn
