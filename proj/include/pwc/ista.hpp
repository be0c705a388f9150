#pragma once

#include <optional>
#include <vector>

#include "pwc/acquisition.hpp"
#include "pwc/image.hpp"

namespace pwc {

// Proximal operator of tau*|.|_1: sign(v) * max(|v| - tau, 0).
double soft_threshold(double v, double tau);
Image soft_threshold(const Image& v, double tau);

struct IstaConfig {
  double mu = 0.0;         // step size; <= 0 means pick 0.9 / lmax(A^T A)
  double lambda_l1 = 0.0;  // l1 weight in the objective
  int iterations = 100;
  enum class Init { Zero, Compound } x0_mode = Init::Compound;
};

struct IstaResult {
  Image x;
  std::vector<double> objective;  // length iterations + 1, objective[0] at x0
  double mu = 0.0;
  bool diverged = false;
  bool step_warning = false;  // mu * lmax >= 2
};

// ||y - A x||^2 + lambda * |x|_1.
double objective_value(const MeasurementOperator& op, const MeasurementSet& y, const Image& x,
                       double lambda_l1);

// Proximal gradient iterations x <- shrink(x - mu * A^T(A x - y)). The shrink
// amount per iteration is mu*lambda/2, which makes the iteration exact
// proximal gradient descent on objective_value (whose data-term gradient is
// 2 A^T(A x - y), the factor 2 being absorbed into mu). The objective trace is
// then non-increasing whenever mu <= 1/lmax(A^T A).
// lmax_hint skips the internal power iteration when the caller already has it.
IstaResult ista_solve(const MeasurementOperator& op, const MeasurementSet& y,
                      const IstaConfig& cfg, std::optional<double> lmax_hint = std::nullopt);

// Max abs deviation between the two algebraic routes of one gradient step:
// (x - mu A^T(A x - y)) versus (mu A^T y + x - mu A^T A x).
double compact_step_deviation(const MeasurementOperator& op, const MeasurementSet& y,
                              const Image& x, double mu);

}  // namespace pwc
