#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pwc/ista.hpp"
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

// operator with a strong center tap; keeps A^T A well conditioned
MeasurementOperator conditioned_operator(Rng& rng, int m, int ksize) {
  MeasurementOperator op;
  for (int i = 0; i < m; ++i) {
    PsfKernel k;
    k.taps = Image(ksize, ksize);
    for (double& v : k.taps.data) v = 0.15 * rng.gaussian();
    k.taps.at(ksize / 2, ksize / 2) += 1.0;
    op.psfs.push_back(std::move(k));
  }
  return op;
}

// grid-search argmin of 0.5*(u-v)^2 + tau*|u|, the prox oracle
double prox_grid_oracle(double v, double tau) {
  double best_u = -3.0, best = 1e300;
  for (int i = 0; i <= 60000; ++i) {
    const double u = -3.0 + i * 1e-4;
    const double f = 0.5 * (u - v) * (u - v) + tau * std::fabs(u);
    if (f < best) {
      best = f;
      best_u = u;
    }
  }
  return best_u;
}

// dense least squares via normal equations and Gaussian elimination
std::vector<double> solve_normal_equations(const MeasurementOperator& op, const MeasurementSet& y,
                                           int h, int w) {
  const int n = h * w;
  // materialize A^T A and A^T y through the operator itself
  std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j) {
    Image e(h, w);
    e.data[static_cast<size_t>(j)] = 1.0;
    Image col = adjoint(op, forward(op, e));
    for (int i = 0; i < n; ++i) ata[static_cast<size_t>(i)][static_cast<size_t>(j)] = col.data[static_cast<size_t>(i)];
  }
  Image aty = adjoint(op, y);
  std::vector<double> rhs(aty.data.begin(), aty.data.end());
  // partial-pivot elimination
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(ata[i][k]) > std::fabs(ata[piv][k])) piv = i;
    std::swap(ata[k], ata[piv]);
    std::swap(rhs[k], rhs[piv]);
    for (int i = k + 1; i < n; ++i) {
      const double f = ata[i][k] / ata[k][k];
      for (int j = k; j < n; ++j) ata[i][j] -= f * ata[k][j];
      rhs[i] -= f * rhs[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= ata[i][j] * x[j];
    x[i] = s / ata[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("soft threshold boundary and shrinkage values") {
  CHECK(soft_threshold(0.7, 0.7) == 0.0);
  CHECK(soft_threshold(-2.0, 0.5) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(soft_threshold(1.3, 0.0) == 1.3);
  CHECK_THROWS_AS((void)soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("soft threshold matches the grid-search prox oracle") {
  CHECK(std::fabs(soft_threshold(1.3, 0.4) - prox_grid_oracle(1.3, 0.4)) < 1e-3);
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.0, 2.0);
    const double tau = rng.uniform(0.0, 1.0);
    CHECK(std::fabs(soft_threshold(v, tau) - prox_grid_oracle(v, tau)) < 1e-3);
  }
}

TEST_CASE("one unregularized step with an identity operator recovers the data") {
  MeasurementOperator op;
  op.psfs = {identity_psf()};
  Rng rng(32);
  MeasurementSet y;
  y.frames = {random_image(8, 4, rng)};
  y.angles_deg = {0.0};
  IstaConfig cfg;
  cfg.mu = 1.0;
  cfg.lambda_l1 = 0.0;
  cfg.iterations = 1;
  cfg.x0_mode = IstaConfig::Init::Zero;
  auto res = ista_solve(op, y, cfg, 1.0);
  for (size_t i = 0; i < res.x.size(); ++i)
    CHECK(res.x.data[i] == doctest::Approx(y.frames[0].data[i]).epsilon(1e-14));
}

TEST_CASE("a large enough l1 weight shrinks the solution to zero") {
  Rng rng(33);
  MeasurementOperator op = conditioned_operator(rng, 2, 3);
  Image x = random_image(8, 4, rng);
  MeasurementSet y = forward(op, x);
  double aty_max = max_abs(adjoint(op, y));
  IstaConfig cfg;
  cfg.lambda_l1 = 2.0 * aty_max * 1.5;  // threshold mu*lambda/2 > mu*max|A^T y|
  cfg.iterations = 50;
  cfg.x0_mode = IstaConfig::Init::Zero;
  auto res = ista_solve(op, y, cfg);
  for (double v : res.x.data) CHECK(v == 0.0);
}

TEST_CASE("objective decreases from the compound initializer and stays monotone") {
  Rng rng(34);
  MeasurementOperator op = conditioned_operator(rng, 3, 3);
  Image x = random_image(16, 8, rng);
  MeasurementSet y = forward(op, x);
  IstaConfig cfg;
  cfg.lambda_l1 = 0.05;
  cfg.iterations = 200;
  auto res = ista_solve(op, y, cfg);
  CHECK_FALSE(res.diverged);
  CHECK(res.objective.back() <= res.objective.front());
  for (size_t i = 1; i < res.objective.size(); ++i)
    CHECK(res.objective[i] <= res.objective[i - 1] + 1e-9);
}

TEST_CASE("objective trace is non-increasing on random problems at mu = 0.9/L") {
  Rng rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 8 + rng.uniform_int(8);
    const int w = 4 + rng.uniform_int(6);
    MeasurementOperator op = conditioned_operator(rng, 1 + rng.uniform_int(3), 3);
    MeasurementSet y = forward(op, random_image(h, w, rng));
    for (auto& f : y.frames)
      for (double& v : f.data) v += 0.05 * rng.gaussian();
    const double lmax = gram_lmax(op, h, w);
    IstaConfig cfg;
    cfg.mu = 0.9 / lmax;
    cfg.lambda_l1 = rng.uniform(0.0, 0.3);
    cfg.iterations = 60;
    auto res = ista_solve(op, y, cfg, lmax);
    CHECK_FALSE(res.diverged);
    for (size_t i = 1; i < res.objective.size(); ++i)
      CHECK(res.objective[i] <= res.objective[i - 1] + 1e-9);
  }
}

TEST_CASE("unregularized solve matches the normal equations on a tiny system") {
  Rng rng(36);
  const int h = 8, w = 4;  // N = 32
  MeasurementOperator op = conditioned_operator(rng, 2, 3);
  MeasurementSet y = forward(op, random_image(h, w, rng));
  auto direct = solve_normal_equations(op, y, h, w);
  IstaConfig cfg;
  cfg.lambda_l1 = 0.0;
  cfg.iterations = 10000;
  auto res = ista_solve(op, y, cfg);
  double worst = 0.0;
  for (int i = 0; i < h * w; ++i)
    worst = std::max(worst, std::fabs(res.x.data[static_cast<size_t>(i)] - direct[static_cast<size_t>(i)]));
  CHECK(worst < 1e-6);
}

TEST_CASE("compact step identity holds to machine precision") {
  MeasurementOperator op;
  op.psfs = {identity_psf()};
  MeasurementSet zero;
  zero.frames = {Image(6, 4)};
  zero.angles_deg = {0.0};
  CHECK(compact_step_deviation(op, zero, Image(6, 4), 0.7) == 0.0);

  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    MeasurementOperator rop = conditioned_operator(rng, 2, 3);
    Image x = random_image(12, 6, rng);
    MeasurementSet y;
    y.frames = {random_image(12, 6, rng), random_image(12, 6, rng)};
    y.angles_deg = {0.0, 0.0};
    CHECK(compact_step_deviation(rop, y, x, rng.uniform(0.1, 1.5)) < 1e-12);
  }
}

TEST_CASE("with an identity PSF and mu=1 the step argument equals the data") {
  MeasurementOperator op;
  op.psfs = {identity_psf()};
  Rng rng(38);
  Image x = random_image(8, 4, rng);
  MeasurementSet y;
  y.frames = {random_image(8, 4, rng)};
  y.angles_deg = {0.0};
  // x - A^T(Ax - y) = x - x + y = y
  Image arg = sub(x, adjoint(op, {{sub(forward(op, x).frames[0], y.frames[0])}, {0.0}}));
  for (size_t i = 0; i < arg.size(); ++i)
    CHECK(arg.data[i] == doctest::Approx(y.frames[0].data[i]).epsilon(1e-14));
}
