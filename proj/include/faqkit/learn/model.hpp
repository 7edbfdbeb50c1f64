#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faqkit/common.hpp"

namespace faqkit::learn {

enum class Arch : std::uint8_t { kLinear = 0, kMlp = 1 };

std::string arch_name(Arch arch);
Arch parse_arch(const std::string& name);

/// Anything mapping a feature vector to output logits/scores. Implemented by
/// the full-precision DenseModel and by the int8 quant::QuantizedModel.
class Head {
 public:
  virtual ~Head() = default;
  virtual std::size_t in_dim() const = 0;
  virtual std::size_t out_dim() const = 0;
  virtual std::vector<double> forward(std::span<const double> x) const = 0;
};

/// Parameter gradients, one matrix per model tensor in the same order.
using Gradients = std::vector<Matrix>;

/// Linear layer (W x + b) or one hidden tanh layer (W2 tanh(W1 x + b1) + b2).
/// Biases are stored as n x 1 matrices so every tensor is treated alike.
class DenseModel : public Head {
 public:
  DenseModel() = default;
  /// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  static DenseModel init(Arch arch, std::size_t in, std::size_t out, std::size_t hidden, std::uint64_t seed);

  Arch arch() const { return arch_; }
  std::size_t in_dim() const override { return in_; }
  std::size_t out_dim() const override { return out_; }
  std::size_t hidden() const { return hidden_; }

  std::vector<Matrix>& tensors() { return tensors_; }
  const std::vector<Matrix>& tensors() const { return tensors_; }
  std::vector<std::string> tensor_names() const;
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> x) const override;
  /// Gradients of <upstream, forward(x)> wrt every tensor.
  Gradients backward(std::span<const double> x, std::span<const double> upstream) const;
  Gradients zero_gradients() const;

  /// "FQKDM001", arch tag, dims, then each tensor as row-major float64.
  void write(std::ostream& out) const;
  static DenseModel read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static DenseModel load(const std::filesystem::path& path);

  bool operator==(const DenseModel& o) const {
    return arch_ == o.arch_ && in_ == o.in_ && out_ == o.out_ && hidden_ == o.hidden_ && tensors_ == o.tensors_;
  }

 private:
  void check_input(std::span<const double> x) const;
  Arch arch_ = Arch::kLinear;
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::size_t hidden_ = 0;
  std::vector<Matrix> tensors_;
};

/// out = W x + b with W given as a rows x cols matrix.
void affine(const Matrix& w, const Matrix& b, std::span<const double> x, std::span<double> out);

std::vector<double> softmax(std::span<const double> logits);
std::size_t argmax(std::span<const double> v);

}  // namespace faqkit::learn
