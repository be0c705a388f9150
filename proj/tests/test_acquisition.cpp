#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pwc/acquisition.hpp"
#include "pwc/rng.hpp"

using namespace pwc;

namespace {

PsfKernel identity_psf() {
  PsfKernel k;
  k.taps = Image(1, 1);
  k.taps.at(0, 0) = 1.0;
  return k;
}

Image random_image(int h, int w, Rng& rng) {
  Image img(h, w);
  for (double& v : img.data) v = rng.gaussian();
  return img;
}

MeasurementOperator random_operator(Rng& rng, int m, int ksize) {
  MeasurementOperator op;
  for (int i = 0; i < m; ++i) {
    PsfKernel k;
    k.taps = random_image(ksize, ksize, rng);
    op.psfs.push_back(std::move(k));
  }
  return op;
}

}  // namespace

TEST_CASE("make_psf degenerates to a single unit tap at size 1") {
  PsfKernel k = make_psf(0.0, 0.3, 0.3, 8.0, 1);
  CHECK(k.taps.height == 1);
  CHECK(k.taps.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("make_psf at angle zero is laterally symmetric") {
  PsfKernel k = make_psf(0.0, 1.0, 4.0, 8.0, 9);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c)
      CHECK(k.taps.at(r, c) == doctest::Approx(k.taps.at(r, 8 - c)).epsilon(1e-14));
}

TEST_CASE("opposite steering angles mirror laterally") {
  PsfKernel a = make_psf(10.2, 1.0, 4.0, 8.0, 9);
  PsfKernel b = make_psf(-10.2, 1.0, 4.0, 8.0, 9);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c)
      CHECK(a.taps.at(r, c) == doctest::Approx(b.taps.at(r, 8 - c)).epsilon(1e-12));
}

TEST_CASE("make_psf L1 norm is one and rejects bad arguments") {
  PsfKernel k = make_psf(5.0, 1.0, 4.0, 8.0, 17);
  CHECK(l1_norm(k.taps) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)make_psf(0.0, 1.0, 4.0, 8.0, 8), std::invalid_argument);
  CHECK_THROWS_AS((void)make_psf(0.0, -1.0, 4.0, 8.0, 9), std::invalid_argument);
  CHECK_THROWS_AS((void)make_psf(0.0, 1.0, 4.0, 0.0, 9), std::invalid_argument);
}

TEST_CASE("forward of zero is zero when noise is off") {
  MeasurementOperator op;
  op.psfs = {make_psf(-10.2, 1, 4, 8, 9), make_psf(0, 1, 4, 8, 9), make_psf(10.2, 1, 4, 8, 9)};
  Image x(16, 8);
  auto y = forward(op, x);
  REQUIRE(y.count() == 3);
  for (const auto& f : y.frames)
    for (double v : f.data) CHECK(v == 0.0);
}

TEST_CASE("identity PSF forward reproduces the input exactly") {
  MeasurementOperator op;
  op.psfs = {identity_psf()};
  Rng rng(21);
  Image x = random_image(12, 6, rng);
  auto y = forward(op, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK(y.frames[0].data[i] == x.data[i]);
}

TEST_CASE("forward with a fixed seed is bit-identical") {
  MeasurementOperator op;
  op.psfs = {make_psf(0, 1, 4, 8, 9), make_psf(10.2, 1, 4, 8, 9)};
  op.noise_sigma = 0.1;
  Rng rng(22);
  Image x = random_image(16, 8, rng);
  auto y1 = forward(op, x, 42);
  auto y2 = forward(op, x, 42);
  for (int m = 0; m < 2; ++m)
    for (size_t i = 0; i < x.size(); ++i) CHECK(y1.frames[m].data[i] == y2.frames[m].data[i]);
  // frames use independent noise substreams
  CHECK(y1.frames[0].data[0] != y1.frames[1].data[0]);
}

TEST_CASE("adjoint with identity PSFs sums the frames") {
  MeasurementOperator op1;
  op1.psfs = {identity_psf()};
  Rng rng(23);
  MeasurementSet y;
  y.frames = {random_image(10, 5, rng)};
  y.angles_deg = {0.0};
  Image a = adjoint(op1, y);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == y.frames[0].data[i]);

  MeasurementOperator op3;
  op3.psfs = {identity_psf(), identity_psf(), identity_psf()};
  MeasurementSet y3;
  y3.frames = {random_image(10, 5, rng), random_image(10, 5, rng), random_image(10, 5, rng)};
  y3.angles_deg = {0.0, 0.0, 0.0};
  Image a3 = adjoint(op3, y3);
  for (size_t i = 0; i < a3.size(); ++i)
    CHECK(a3.data[i] ==
          doctest::Approx(y3.frames[0].data[i] + y3.frames[1].data[i] + y3.frames[2].data[i])
              .epsilon(1e-15));
}

TEST_CASE("adjoint satisfies the inner-product identity") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 4 + rng.uniform_int(24);
    const int w = 4 + rng.uniform_int(12);
    const int m = 1 + rng.uniform_int(3);
    const int ksize = 1 + 2 * rng.uniform_int(3);
    MeasurementOperator op = random_operator(rng, m, ksize);
    Image x = random_image(h, w, rng);
    MeasurementSet y;
    for (int i = 0; i < m; ++i) {
      y.frames.push_back(random_image(h, w, rng));
      y.angles_deg.push_back(0.0);
    }
    MeasurementSet ax = forward(op, x);
    double lhs = 0.0;
    for (int i = 0; i < m; ++i) lhs += dot(ax.frames[i], y.frames[i]);
    double rhs = dot(x, adjoint(op, y));
    CHECK(std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0}) < 1e-10);
  }
}

TEST_CASE("forward is linear in the image") {
  Rng rng(25);
  MeasurementOperator op = random_operator(rng, 2, 3);
  Image u = random_image(12, 6, rng), v = random_image(12, 6, rng);
  const double a = 1.7, b = -0.4;
  auto yl = forward(op, add(scale(u, a), scale(v, b)));
  auto yu = forward(op, u);
  auto yv = forward(op, v);
  for (int m = 0; m < 2; ++m)
    for (size_t i = 0; i < u.size(); ++i)
      CHECK(yl.frames[m].data[i] ==
            doctest::Approx(a * yu.frames[m].data[i] + b * yv.frames[m].data[i]).epsilon(1e-12));
}

TEST_CASE("power iteration bounds the operator gain on random probes") {
  Rng rng(26);
  MeasurementOperator op;
  op.psfs = {make_psf(-10.2, 1, 4, 8, 9), make_psf(0, 1, 4, 8, 9), make_psf(10.2, 1, 4, 8, 9)};
  const int h = 24, w = 12;
  const double nrm = operator_norm(op, h, w);
  CHECK(nrm > 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    Image x = random_image(h, w, rng);
    auto ax = forward(op, x);
    double e = 0.0;
    for (const auto& f : ax.frames) e += norm2_sq(f);
    CHECK(std::sqrt(e) <= (nrm + 1e-6) * std::sqrt(norm2_sq(x)));
  }
}

TEST_CASE("adjoint rejects mismatched frame counts") {
  MeasurementOperator op;
  op.psfs = {identity_psf(), identity_psf()};
  MeasurementSet y;
  y.frames = {Image(4, 4)};
  y.angles_deg = {0.0};
  CHECK_THROWS_AS((void)adjoint(op, y), std::invalid_argument);
}
