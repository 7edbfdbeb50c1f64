#pragma once

#include <span>
#include <vector>

namespace faqkit::learn {

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Cross entropy against the smoothed target (1 - eps) onehot(label) + eps / K.
/// Gradient wrt the logits is softmax(logits) - target.
LossGrad smoothed_ce_loss(std::span<const double> logits, std::size_t label, double epsilon);

struct HingeGrad {
  double loss = 0.0;
  double d_pos = 0.0;
  double d_neg = 0.0;
};

/// max(0, margin - s_pos + s_neg). A tie at the boundary is inactive.
HingeGrad hinge_pair_loss(double s_pos, double s_neg, double margin);

}  // namespace faqkit::learn
