#include "faqkit/quant.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "faqkit/io.hpp"

namespace faqkit::quant {

QuantizedTensor quantize(const Matrix& w) {
  QuantizedTensor q;
  q.rows = w.rows;
  q.cols = w.cols;
  q.data.resize(w.data.size());
  double lo = 0.0, hi = 0.0;
  for (double v : w.data) {
    if (!std::isfinite(v)) throw DataError("quantize: non-finite input");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  q.scale = hi > lo ? (hi - lo) / 255.0 : 1.0;
  q.zero_point = static_cast<std::int32_t>(std::clamp(std::nearbyint(-128.0 - lo / q.scale), -128.0, 127.0));
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double v = std::nearbyint(w.data[i] / q.scale + q.zero_point);
    q.data[i] = static_cast<std::int8_t>(std::clamp(v, -128.0, 127.0));
  }
  return q;
}

Matrix dequantize(const QuantizedTensor& q) {
  Matrix m(q.rows, q.cols);
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    m.data[i] = static_cast<double>(static_cast<std::int32_t>(q.data[i]) - q.zero_point) * q.scale;
  }
  return m;
}

namespace {

constexpr double kActivationLevels = 32767.0;
constexpr std::size_t kBlock = 256;

/// y = scale * sx * (sum q*xq - zp * sum xq), with x rounded to int16 under a
/// per-call symmetric scale sx and products accumulated in blocked int32.
void matvec_into(const QuantizedTensor& qw, std::span<const double> x, std::span<double> out) {
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double sx = max_abs / kActivationLevels;
  std::vector<std::int16_t> xq(x.size());
  std::int64_t sum_xq = 0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    xq[c] = static_cast<std::int16_t>(std::lround(x[c] / sx));
    sum_xq += xq[c];
  }
  const std::int8_t* base = qw.data.data();
  const std::int16_t* xs = xq.data();
  const std::size_t n = qw.cols;
  for (std::size_t r = 0; r < qw.rows; ++r) {
    const std::int8_t* row = base + r * n;
    std::int64_t acc = 0;
    for (std::size_t c0 = 0; c0 < n; c0 += kBlock) {
      const std::size_t end = std::min(n, c0 + kBlock);
      std::int32_t block = 0;
      for (std::size_t c = c0; c < end; ++c) block += static_cast<std::int32_t>(row[c]) * xs[c];
      acc += block;
    }
    out[r] = qw.scale * sx * static_cast<double>(acc - static_cast<std::int64_t>(qw.zero_point) * sum_xq);
  }
}

}  // namespace

std::vector<double> quantized_matvec(const QuantizedTensor& qw, std::span<const double> x) {
  if (x.size() != qw.cols) throw DataError("quantized_matvec: dimension mismatch");
  std::vector<double> y(qw.rows);
  matvec_into(qw, x, y);
  return y;
}

QuantizedModel::QuantizedModel(const learn::DenseModel& model)
    : arch_(model.arch()), in_(model.in_dim()), out_(model.out_dim()), hidden_(model.hidden()) {
  if (model.tensors().empty()) throw DataError("cannot quantize an uninitialized model");
  for (const auto& t : model.tensors()) tensors_.push_back(quantize(t));
  for (std::size_t i = 1; i < tensors_.size(); i += 2) biases_.push_back(dequantize(tensors_[i]).data);
}

std::vector<double> QuantizedModel::forward(std::span<const double> x) const {
  if (x.size() != in_) throw DataError("feature dimension does not match quantized model input");
  std::vector<double> out(out_);
  if (arch_ == learn::Arch::kLinear) {
    matvec_into(tensors_[0], x, out);
    for (std::size_t r = 0; r < out_; ++r) out[r] += biases_[0][r];
    return out;
  }
  std::vector<double> h(hidden_);
  matvec_into(tensors_[0], x, h);
  for (std::size_t j = 0; j < hidden_; ++j) h[j] = std::tanh(h[j] + biases_[0][j]);
  matvec_into(tensors_[2], h, out);
  for (std::size_t r = 0; r < out_; ++r) out[r] += biases_[1][r];
  return out;
}

learn::DenseModel QuantizedModel::dequantized() const {
  auto m = learn::DenseModel::init(arch_, in_, out_, arch_ == learn::Arch::kMlp ? hidden_ : 1, 0);
  for (std::size_t i = 0; i < tensors_.size(); ++i) m.tensors()[i] = dequantize(tensors_[i]);
  return m;
}

namespace {
constexpr std::string_view kMagic = "FQKQ8001";
}

void QuantizedModel::write(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  io::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(arch_));
  io::write_pod<std::uint64_t>(out, in_);
  io::write_pod<std::uint64_t>(out, out_);
  io::write_pod<std::uint64_t>(out, hidden_);
  for (const auto& t : tensors_) {
    io::write_pod<std::uint64_t>(out, t.rows);
    io::write_pod<std::uint64_t>(out, t.cols);
    io::write_pod<double>(out, t.scale);
    io::write_pod<std::int32_t>(out, t.zero_point);
    out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size()));
  }
}

QuantizedModel QuantizedModel::read(std::istream& in) {
  io::expect_magic(in, kMagic);
  const auto tag = io::read_pod<std::uint8_t>(in);
  if (tag > 1) throw DataError("unknown architecture tag in quantized model");
  QuantizedModel m;
  m.arch_ = static_cast<learn::Arch>(tag);
  m.in_ = io::read_pod<std::uint64_t>(in);
  m.out_ = io::read_pod<std::uint64_t>(in);
  m.hidden_ = io::read_pod<std::uint64_t>(in);
  // Shapes are checked against a freshly initialized model of the same architecture.
  const auto ref = learn::DenseModel::init(m.arch_, m.in_, m.out_, m.arch_ == learn::Arch::kMlp ? m.hidden_ : 1, 0);
  for (const auto& shape : ref.tensors()) {
    QuantizedTensor t;
    t.rows = io::read_pod<std::uint64_t>(in);
    t.cols = io::read_pod<std::uint64_t>(in);
    if (t.rows != shape.rows || t.cols != shape.cols) throw DataError("quantized tensor shape mismatch");
    t.scale = io::read_pod<double>(in);
    t.zero_point = io::read_pod<std::int32_t>(in);
    if (!(t.scale > 0.0) || !std::isfinite(t.scale) || t.zero_point < -128 || t.zero_point > 127) {
      throw DataError("invalid quantization parameters");
    }
    t.data.resize(t.rows * t.cols);
    in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size()));
    if (!in) throw DataError("truncated quantized model");
    m.tensors_.push_back(std::move(t));
  }
  for (std::size_t i = 1; i < m.tensors_.size(); i += 2) m.biases_.push_back(dequantize(m.tensors_[i]).data);
  return m;
}

SizeReport size_report(const learn::DenseModel& model) {
  std::ostringstream full, q;
  model.write(full);
  QuantizedModel(model).write(q);
  SizeReport r;
  r.full_bytes = full.str().size();
  r.quantized_bytes = q.str().size();
  r.ratio = static_cast<double>(r.quantized_bytes) / static_cast<double>(r.full_bytes);
  return r;
}

LatencyStats summarize_latencies(std::vector<double> micros) {
  if (micros.empty()) throw DataError("no latency measurements");
  const std::size_t drop = std::min(micros.size() / 10, micros.size() - 1);
  micros.erase(micros.begin(), micros.begin() + static_cast<std::ptrdiff_t>(drop));
  LatencyStats s;
  s.measured = micros.size();
  for (double v : micros) s.mean_us += v;
  s.mean_us /= static_cast<double>(micros.size());
  std::sort(micros.begin(), micros.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(micros.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, micros.size() - 1);
    return micros[lo] + (pos - static_cast<double>(lo)) * (micros[hi] - micros[lo]);
  };
  s.p50_us = quantile(0.5);
  s.p95_us = quantile(0.95);
  return s;
}

LatencyStats bench_inference(const learn::Head& head, const std::vector<std::vector<double>>& samples,
                             std::size_t reps) {
  if (reps == 0) throw ConfigError("reps must be >= 1");
  if (samples.empty()) throw DataError("no benchmark samples");
  std::vector<double> micros;
  micros.reserve(reps * samples.size());
  volatile double sink = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    for (const auto& x : samples) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto y = head.forward(x);
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + y[0];
      micros.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  }
  return summarize_latencies(std::move(micros));
}

}  // namespace faqkit::quant
