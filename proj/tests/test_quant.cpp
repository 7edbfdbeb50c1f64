#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "faqkit/learn/model.hpp"
#include "faqkit/quant.hpp"
#include "test_util.hpp"

using namespace faqkit;
using namespace faqkit::quant;

namespace {

std::vector<double> dense_matvec(const Matrix& w, std::span<const double> x) {
  std::vector<double> y(w.rows, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    for (std::size_t j = 0; j < w.cols; ++j) y[i] += w(i, j) * x[j];
  }
  return y;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_SUITE("quant") {
  TEST_CASE("all-zero tensor") {
    const Matrix z(3, 4);
    const auto q = quantize(z);
    CHECK(q.scale == 1.0);
    CHECK(dequantize(q) == z);
    const std::vector<double> x{1, 2, 3, 4};
    for (double v : quantized_matvec(q, x)) CHECK(v == 0.0);
  }

  TEST_CASE("parameters follow the affine recipe") {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      const double lo = rng.uniform(-3, 1), hi = lo + rng.uniform(0.1, 4);
      const auto w = testing::random_matrix(rng, 8, 8, lo, hi);
      const double mn = std::min(0.0, *std::min_element(w.data.begin(), w.data.end()));
      const double mx = std::max(0.0, *std::max_element(w.data.begin(), w.data.end()));
      const double scale = (mx - mn) / 255.0;
      const auto zp = static_cast<std::int32_t>(std::clamp(std::round(-128.0 - mn / scale), -128.0, 127.0));
      const auto q = quantize(w);
      CHECK(q.scale == doctest::Approx(scale).epsilon(1e-12));
      CHECK(q.zero_point == zp);
      for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double code = std::clamp(std::round(w.data[i] / scale + zp), -128.0, 127.0);
        CHECK(q.data[i] == static_cast<std::int8_t>(code));
      }
    }
  }

  TEST_CASE("elementwise error at most half a step") {
    Rng rng(2);
    const auto w = testing::random_matrix(rng, 64, 64, -0.7, 1.3);
    const auto q = quantize(w);
    const auto d = dequantize(q);
    for (std::size_t i = 0; i < w.data.size(); ++i) CHECK(std::abs(d.data[i] - w.data[i]) <= q.scale / 2 + 1e-12);
    const auto again = dequantize(quantize(d));
    for (std::size_t i = 0; i < d.data.size(); ++i) CHECK(std::abs(again.data[i] - d.data[i]) <= 1e-9);
  }

  TEST_CASE("matvec bounds") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const std::size_t r = 1 + rng.below(40), c = 1 + rng.below(700);
      const auto w = testing::random_matrix(rng, r, c, -1.0, 0.5);
      const auto x = testing::random_vector(rng, c, -2.0, 2.0);
      const auto q = quantize(w);
      const auto d = dequantize(q);
      double xmax = 0, x1 = 0;
      for (double v : x) {
        xmax = std::max(xmax, std::abs(v));
        x1 += std::abs(v);
      }
      const double sx = xmax / 32767.0;
      const auto y = quantized_matvec(q, x);
      const auto yd = dense_matvec(d, x);
      const auto yw = dense_matvec(w, x);
      for (std::size_t i = 0; i < r; ++i) {
        double wabs = 0;
        for (std::size_t j = 0; j < c; ++j) wabs += std::abs(d(i, j));
        const double act = wabs * sx / 2;
        CHECK(std::abs(y[i] - yd[i]) <= act + 1e-9);
        CHECK(std::abs(y[i] - yw[i]) <= x1 * q.scale / 2 + act + 1e-9);
      }
    }
    CHECK_THROWS(quantized_matvec(quantize(Matrix(2, 3, 1.0)), std::vector<double>{1.0}));
  }

  TEST_CASE("matvec is exact on representable inputs") {
    Matrix w(3, 4);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] = 0.01 * static_cast<double>((i * 37) % 256);
    w.data[0] = 2.55;
    const std::vector<double> x{1, -1, 1, -1};
    const auto y = quantized_matvec(quantize(w), x);
    const auto ref = dense_matvec(w, x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }

  TEST_CASE("quantized model tracks the dense one") {
    Rng rng(4);
    for (auto arch : {learn::Arch::kLinear, learn::Arch::kMlp}) {
      const auto m = learn::DenseModel::init(arch, 32, 5, 16, 9);
      const QuantizedModel qm(m);
      CHECK(qm.in_dim() == 32);
      CHECK(qm.out_dim() == 5);
      std::size_t agree = 0;
      for (int i = 0; i < 200; ++i) {
        const auto x = testing::random_vector(rng, 32);
        const auto a = m.forward(x), b = qm.forward(x), c = qm.dequantized().forward(x);
        for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(a[k] - b[k]) < 0.1);
        for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(b[k] - c[k]) < 1e-2);
        agree += argmax(a) == argmax(b) ? 1 : 0;
      }
      CHECK(agree >= 180);

      std::stringstream s;
      qm.write(s);
      const auto back = QuantizedModel::read(s);
      const auto x = testing::random_vector(rng, 32);
      CHECK(back.forward(x) == qm.forward(x));
      CHECK(back.arch() == arch);
    }
    std::stringstream junk("FQKDM001xxxx");
    CHECK_THROWS(QuantizedModel::read(junk));
  }

  TEST_CASE("size ratio on a million parameters") {
    const auto m = learn::DenseModel::init(learn::Arch::kLinear, 1000, 1000, 0, 5);
    CHECK(m.parameter_count() >= 1000000);
    const auto r = size_report(m);
    CHECK(r.ratio <= 0.30);
    CHECK(r.ratio == doctest::Approx(static_cast<double>(r.quantized_bytes) / static_cast<double>(r.full_bytes)));
  }

  TEST_CASE("latency summaries") {
    const auto s = summarize_latencies({100, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(s.measured == 9);
    CHECK(s.p50_us == 5.0);
    CHECK(s.mean_us == 5.0);
    CHECK(summarize_latencies({7}).measured == 1);
    CHECK_THROWS_AS(summarize_latencies({}), DataError);

    const auto m = learn::DenseModel::init(learn::Arch::kLinear, 4, 2, 0, 1);
    const auto one = bench_inference(m, {{1, 2, 3, 4}}, 1);
    CHECK(one.measured == 1);
    CHECK(one.mean_us >= 0.0);
    CHECK(bench_inference(m, {{1, 2, 3, 4}, {0, 0, 0, 0}}, 10).measured == 18);
    CHECK_THROWS_AS(bench_inference(m, {{1, 2, 3, 4}}, 0), ConfigError);
  }
}
