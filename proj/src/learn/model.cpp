#include "faqkit/learn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "faqkit/io.hpp"

namespace faqkit::learn {

namespace {
constexpr std::string_view kMagic = "FQKDM001";
}

std::string arch_name(Arch arch) { return arch == Arch::kLinear ? "linear" : "mlp"; }

Arch parse_arch(const std::string& name) {
  if (name == "linear") return Arch::kLinear;
  if (name == "mlp") return Arch::kMlp;
  throw ConfigError("unknown architecture '" + name + "' (expected linear or mlp)");
}

DenseModel DenseModel::init(Arch arch, std::size_t in, std::size_t out, std::size_t hidden, std::uint64_t seed) {
  if (in == 0 || out == 0) throw ConfigError("model dimensions must be positive");
  if (arch == Arch::kMlp && hidden == 0) throw ConfigError("hidden width must be positive");
  DenseModel m;
  m.arch_ = arch;
  m.in_ = in;
  m.out_ = out;
  m.hidden_ = arch == Arch::kMlp ? hidden : 0;
  Rng rng(seed);
  auto layer = [&](std::size_t rows, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix w(rows, fan_in), b(rows, 1);
    for (double& x : w.data) x = rng.uniform(-bound, bound);
    for (double& x : b.data) x = rng.uniform(-bound, bound);
    m.tensors_.push_back(std::move(w));
    m.tensors_.push_back(std::move(b));
  };
  if (arch == Arch::kLinear) {
    layer(out, in);
  } else {
    layer(hidden, in);
    layer(out, hidden);
  }
  return m;
}

std::vector<std::string> DenseModel::tensor_names() const {
  if (arch_ == Arch::kLinear) return {"w", "b"};
  return {"w1", "b1", "w2", "b2"};
}

std::size_t DenseModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

void affine(const Matrix& w, const Matrix& b, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = w.data.data() + r * w.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    out[r] = s + b.data[r];
  }
}

void DenseModel::check_input(std::span<const double> x) const {
  if (tensors_.empty()) throw DataError("model is not initialized");
  if (x.size() != in_) {
    throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model input " +
                    std::to_string(in_));
  }
}

std::vector<double> DenseModel::forward(std::span<const double> x) const {
  check_input(x);
  std::vector<double> out(out_);
  if (arch_ == Arch::kLinear) {
    affine(tensors_[0], tensors_[1], x, out);
    return out;
  }
  std::vector<double> h(hidden_);
  affine(tensors_[0], tensors_[1], x, h);
  for (double& v : h) v = std::tanh(v);
  affine(tensors_[2], tensors_[3], h, out);
  return out;
}

Gradients DenseModel::zero_gradients() const {
  Gradients g;
  g.reserve(tensors_.size());
  for (const auto& t : tensors_) g.emplace_back(t.rows, t.cols);
  return g;
}

Gradients DenseModel::backward(std::span<const double> x, std::span<const double> upstream) const {
  check_input(x);
  if (upstream.size() != out_) throw DataError("upstream gradient has wrong dimension");
  Gradients g = zero_gradients();
  auto outer = [](Matrix& gw, Matrix& gb, std::span<const double> delta, std::span<const double> input) {
    for (std::size_t r = 0; r < gw.rows; ++r) {
      for (std::size_t c = 0; c < gw.cols; ++c) gw(r, c) = delta[r] * input[c];
      gb.data[r] = delta[r];
    }
  };
  if (arch_ == Arch::kLinear) {
    outer(g[0], g[1], upstream, x);
    return g;
  }
  std::vector<double> h(hidden_);
  affine(tensors_[0], tensors_[1], x, h);
  for (double& v : h) v = std::tanh(v);
  outer(g[2], g[3], upstream, h);
  const Matrix& w2 = tensors_[2];
  std::vector<double> dh(hidden_, 0.0);
  for (std::size_t r = 0; r < out_; ++r) {
    for (std::size_t j = 0; j < hidden_; ++j) dh[j] += w2(r, j) * upstream[r];
  }
  for (std::size_t j = 0; j < hidden_; ++j) dh[j] *= 1.0 - h[j] * h[j];
  outer(g[0], g[1], dh, x);
  return g;
}

void DenseModel::write(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  io::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(arch_));
  io::write_pod<std::uint64_t>(out, in_);
  io::write_pod<std::uint64_t>(out, out_);
  io::write_pod<std::uint64_t>(out, hidden_);
  for (const auto& t : tensors_) io::write_matrix(out, t);
}

DenseModel DenseModel::read(std::istream& in) {
  io::expect_magic(in, kMagic);
  const auto tag = io::read_pod<std::uint8_t>(in);
  if (tag > 1) throw DataError("unknown architecture tag in model file");
  const auto arch = static_cast<Arch>(tag);
  const auto n_in = io::read_pod<std::uint64_t>(in);
  const auto n_out = io::read_pod<std::uint64_t>(in);
  const auto hidden = io::read_pod<std::uint64_t>(in);
  DenseModel m = DenseModel::init(arch, n_in, n_out, arch == Arch::kMlp ? hidden : 1, 0);
  for (auto& t : m.tensors_) {
    Matrix loaded = io::read_matrix(in);
    if (loaded.rows != t.rows || loaded.cols != t.cols) throw DataError("model tensor shape mismatch");
    for (double v : loaded.data) {
      if (!std::isfinite(v)) throw DataError("model file contains non-finite parameters");
    }
    t = std::move(loaded);
  }
  return m;
}

void DenseModel::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  write(out);
  io::write_file_atomic(path, out.str());
}

DenseModel DenseModel::load(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  return read(in);
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw DataError("softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw DataError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace faqkit::learn
