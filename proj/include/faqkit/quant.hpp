#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "faqkit/common.hpp"
#include "faqkit/learn/model.hpp"

namespace faqkit::quant {

/// Per-tensor affine int8: w ~= (q - zero_point) * scale.
struct QuantizedTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> data;
  double scale = 1.0;
  std::int32_t zero_point = 0;
};

/// scale = (max - min) / 255 over the range widened to contain 0 (scale = 1
/// for an all-zero tensor); zero_point = round(-128 - min / scale) clamped to
/// [-128, 127]; q = clamp(round(w / scale + zero_point)).
QuantizedTensor quantize(const Matrix& w);
Matrix dequantize(const QuantizedTensor& q);

/// Integer-accumulated product: x is rounded to int16 with a symmetric
/// per-call scale sx = max|x| / 32767, then
/// y = scale * sx * (sum_j q_ij xq_j - zero_point * sum_j xq_j).
std::vector<double> quantized_matvec(const QuantizedTensor& qw, std::span<const double> x);

/// DenseModel with every tensor (weights and biases) quantized.
class QuantizedModel : public learn::Head {
 public:
  QuantizedModel() = default;
  explicit QuantizedModel(const learn::DenseModel& model);

  learn::Arch arch() const { return arch_; }
  std::size_t in_dim() const override { return in_; }
  std::size_t out_dim() const override { return out_; }
  const std::vector<QuantizedTensor>& tensors() const { return tensors_; }
  std::vector<double> forward(std::span<const double> x) const override;
  learn::DenseModel dequantized() const;

  /// "FQKQ8001", arch tag, dims, then per tensor: shape, scale, zero_point, int8 payload.
  void write(std::ostream& out) const;
  static QuantizedModel read(std::istream& in);

 private:
  learn::Arch arch_ = learn::Arch::kLinear;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t hidden_ = 0;
  std::vector<QuantizedTensor> tensors_;
  std::vector<std::vector<double>> biases_;  // dequantized bias tensors
};

struct SizeReport {
  std::size_t full_bytes = 0;
  std::size_t quantized_bytes = 0;
  double ratio = 0.0;
};

/// Serialized sizes of the full-precision and quantized parameter files.
SizeReport size_report(const learn::DenseModel& model);

struct LatencyStats {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  std::size_t measured = 0;
};

/// Wall-clock latency per forward pass; the first 10% of the reps x samples
/// timings are discarded as warm-up (never all of them).
LatencyStats bench_inference(const learn::Head& head, const std::vector<std::vector<double>>& samples,
                             std::size_t reps);

/// Timings summary helper shared with the matvec benchmark.
LatencyStats summarize_latencies(std::vector<double> micros);

}  // namespace faqkit::quant
