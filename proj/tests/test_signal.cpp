#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "pwc/rng.hpp"
#include "pwc/signal.hpp"

using namespace pwc;
using cplx = std::complex<double>;

namespace {

// brute-force DFT for cross-checking the radix-2 path
std::vector<cplx> dft_reference(const std::vector<cplx>& x, bool inverse) {
  const size_t n = x.size();
  std::vector<cplx> out(n);
  const double sgn = inverse ? 1.0 : -1.0;
  for (size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (size_t j = 0; j < n; ++j)
      acc += x[j] * std::polar(1.0, sgn * 2.0 * M_PI * double(k * j) / double(n));
    out[k] = inverse ? acc / double(n) : acc;
  }
  return out;
}

Image random_image(int h, int w, Rng& rng) {
  Image img(h, w);
  for (double& v : img.data) v = rng.gaussian();
  return img;
}

// direct zero-padded cross-correlation, the oracle for conv2d_same
Image conv_reference(const Image& img, const Image& k) {
  const int rr = k.height / 2, rc = k.width / 2;
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < k.height; ++kr)
        for (int kc = 0; kc < k.width; ++kc) {
          int sr = r + kr - rr, sc = c + kc - rc;
          if (sr >= 0 && sr < img.height && sc >= 0 && sc < img.width)
            acc += img.at(sr, sc) * k.at(kr, kc);
        }
      out.at(r, c) = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("fft of an impulse is all ones") {
  std::vector<cplx> x = {1, 0, 0, 0};
  auto y = fft_1d(x, false);
  for (auto v : y) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("fft of a constant concentrates at DC") {
  std::vector<cplx> x = {1, 1, 1, 1};
  auto y = fft_1d(x, false);
  CHECK(std::abs(y[0] - cplx(4.0, 0.0)) < 1e-14);
  for (size_t k = 1; k < 4; ++k) CHECK(std::abs(y[k]) < 1e-14);
}

TEST_CASE("fft round-trip and reference DFT agreement") {
  Rng rng(11);
  std::vector<cplx> x(64);
  for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
  auto back = fft_1d(fft_1d(x, false), true);
  double scale = 0.0;
  for (auto& v : x) scale = std::max(scale, std::abs(v));
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) / scale < 1e-12);

  auto ref = dft_reference(x, false);
  auto got = fft_1d(x, false);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-9);
}

TEST_CASE("fft round-trip across lengths 2..4096") {
  Rng rng(12);
  for (size_t n = 2; n <= 4096; n *= 2) {
    std::vector<cplx> x(n);
    double scale = 0.0;
    for (auto& v : x) {
      v = {rng.gaussian(), rng.gaussian()};
      scale = std::max(scale, std::abs(v));
    }
    auto back = fft_1d(fft_1d(x, false), true);
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
    CHECK(worst / scale < 1e-12);
  }
}

TEST_CASE("fft rejects non-power-of-two lengths") {
  std::vector<cplx> x(6, cplx(1.0, 0.0));
  CHECK_THROWS_AS((void)fft_1d(x, false), std::invalid_argument);
  CHECK_THROWS_AS((void)fft_1d({}, false), std::invalid_argument);
}

TEST_CASE("envelope of a bin-aligned tone is its amplitude") {
  std::vector<double> x(64);
  for (int n = 0; n < 64; ++n) x[n] = std::cos(2.0 * M_PI * 4.0 * n / 64.0);
  auto env = hilbert_envelope(x);
  for (double e : env) CHECK(e == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> s(128);
  for (int n = 0; n < 128; ++n) s[n] = 0.5 * std::sin(2.0 * M_PI * 8.0 * n / 128.0);
  auto env2 = hilbert_envelope(s);
  for (double e : env2) CHECK(e == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("envelope of zero is zero, empty input rejected") {
  auto env = hilbert_envelope(std::vector<double>(32, 0.0));
  for (double e : env) CHECK(e == 0.0);
  CHECK_THROWS_AS((void)hilbert_envelope({}), std::invalid_argument);
}

TEST_CASE("envelope is invariant to sign flip") {
  Rng rng(13);
  std::vector<double> x(100);  // non power of two: exercises pad/truncate
  for (auto& v : x) v = rng.gaussian();
  std::vector<double> nx(100);
  for (size_t i = 0; i < x.size(); ++i) nx[i] = -x[i];
  auto a = hilbert_envelope(x);
  auto b = hilbert_envelope(nx);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("envelope equals sqrt(x^2 + h^2)") {
  Rng rng(14);
  std::vector<double> x(48);
  for (auto& v : x) v = rng.gaussian();
  auto e = hilbert_envelope(x);
  auto h = hilbert_quadrature(x);
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(e[i] == doctest::Approx(std::sqrt(x[i] * x[i] + h[i] * h[i])).epsilon(1e-12));
}

TEST_CASE("conv2d_same with the 1x1 identity kernel is a no-op") {
  Rng rng(15);
  Image img = random_image(7, 9, rng);
  Image k(1, 1);
  k.at(0, 0) = 1.0;
  Image out = conv2d_same(img, k);
  for (size_t i = 0; i < img.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("conv2d_same on a centered delta reproduces the flipped kernel") {
  Image img(9, 9);
  img.at(4, 4) = 1.0;
  Rng rng(16);
  Image k = random_image(3, 3, rng);
  Image out = conv2d_same(img, k);
  // cross-correlation: out[center + d] = k[center - d]
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      CHECK(out.at(4 + dr, 4 + dc) == doctest::Approx(k.at(1 - dr, 1 - dc)).epsilon(1e-15));
}

TEST_CASE("conv2d_same rejects even kernel dims") {
  Image img(4, 4), k(2, 3);
  CHECK_THROWS_AS((void)conv2d_same(img, k), std::invalid_argument);
}

TEST_CASE("conv2d_same matches the nested-loop reference") {
  Rng rng(17);
  Image img = random_image(8, 8, rng);
  Image k = random_image(3, 3, rng);
  Image got = conv2d_same(img, k);
  Image ref = conv_reference(img, k);
  for (size_t i = 0; i < got.size(); ++i)
    CHECK(got.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-13));
}

TEST_CASE("conv2d_same is linear in the image") {
  Rng rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    Image u = random_image(6, 5, rng), v = random_image(6, 5, rng);
    Image k = random_image(3, 3, rng);
    const double a = rng.gaussian(), b = rng.gaussian();
    Image lhs = conv2d_same(add(scale(u, a), scale(v, b)), k);
    Image rhs = add(scale(conv2d_same(u, k), a), scale(conv2d_same(v, k), b));
    for (size_t i = 0; i < lhs.size(); ++i)
      CHECK(lhs.data[i] == doctest::Approx(rhs.data[i]).epsilon(1e-10));
  }
}

TEST_CASE("q_transform maps an all-zero image to the exact floor") {
  Image img(16, 8);
  Image q = q_transform(img);
  for (double v : q.data) CHECK(v == -60.0);
}

TEST_CASE("q_transform clips the global max to the ceiling") {
  Rng rng(19);
  Image img = random_image(32, 8, rng);
  Image q = q_transform(img);
  double m = -1e9;
  for (double v : q.data) {
    CHECK(v >= -60.0);
    CHECK(v <= 0.0);
    m = std::max(m, v);
  }
  CHECK(m == 0.0);  // 20*log10(eps + 1) >= 0 gets clipped to the ceiling
}

TEST_CASE("q_transform of a single tone column") {
  // one bin-aligned tone column of amplitude 1, zero elsewhere:
  // the tone column sits at 0 dB away from its ends, others at the floor
  Image img(64, 8);
  for (int r = 0; r < 64; ++r) img.at(r, 3) = std::cos(2.0 * M_PI * 8.0 * r / 64.0);
  Image q = q_transform(img);
  for (int r = 8; r < 56; ++r) CHECK(q.at(r, 3) == doctest::Approx(0.0).epsilon(1e-6));
  for (int c = 0; c < 8; ++c) {
    if (c == 3) continue;
    for (int r = 0; r < 64; ++r) CHECK(q.at(r, c) == -60.0);
  }
}

TEST_CASE("q_transform range holds for adversarial inputs") {
  Rng rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    Image img = random_image(16, 4, rng);
    for (double& v : img.data) v *= std::pow(10.0, rng.uniform(-6.0, 6.0));
    Image q = q_transform(img);
    for (double v : q.data) {
      CHECK(v >= -60.0);
      CHECK(v <= 0.0);
    }
  }
}

TEST_CASE("QConfig validation") {
  QConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  QConfig swapped;
  swapped.floor_db = 0.0;
  swapped.ceil_db = -60.0;
  CHECK_THROWS_AS(swapped.validate(), std::invalid_argument);
  QConfig deep = QConfig::with_floor(-80.0);
  CHECK(deep.epsilon == doctest::Approx(1e-4).epsilon(1e-12));
}
