#include "pwc/ista.hpp"

#include <cmath>
#include <stdexcept>

namespace pwc {

double soft_threshold(double v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  const double a = std::fabs(v) - tau;
  return a > 0.0 ? (v < 0.0 ? -a : a) : 0.0;
}

Image soft_threshold(const Image& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  Image out = v;
  for (double& e : out.data) {
    const double a = std::fabs(e) - tau;
    e = a > 0.0 ? (e < 0.0 ? -a : a) : 0.0;
  }
  return out;
}

double objective_value(const MeasurementOperator& op, const MeasurementSet& y, const Image& x,
                       double lambda_l1) {
  MeasurementSet ax = forward(op, x);
  double res = 0.0;
  for (int m = 0; m < y.count(); ++m) res += norm2_sq(sub(y.frames[m], ax.frames[m]));
  return res + lambda_l1 * l1_norm(x);
}

IstaResult ista_solve(const MeasurementOperator& op, const MeasurementSet& y,
                      const IstaConfig& cfg, std::optional<double> lmax_hint) {
  op.validate();
  y.validate();
  const Image& f0 = y.frames[0];

  IstaResult res;
  double lmax = lmax_hint ? *lmax_hint : gram_lmax(op, f0.height, f0.width);
  res.mu = cfg.mu > 0.0 ? cfg.mu : (lmax > 0.0 ? 0.9 / lmax : 1.0);
  res.step_warning = res.mu * lmax >= 2.0;

  Image x = cfg.x0_mode == IstaConfig::Init::Compound ? compound(y) : Image(f0.height, f0.width);
  const double tau = res.mu * cfg.lambda_l1 / 2.0;

  res.objective.reserve(static_cast<size_t>(cfg.iterations) + 1);
  res.objective.push_back(objective_value(op, y, x, cfg.lambda_l1));
  for (int it = 0; it < cfg.iterations; ++it) {
    MeasurementSet ax = forward(op, x);
    MeasurementSet r = ax;
    for (int m = 0; m < y.count(); ++m) r.frames[m] = sub(ax.frames[m], y.frames[m]);
    Image g = adjoint(op, r);
    for (size_t i = 0; i < x.size(); ++i) x.data[i] -= res.mu * g.data[i];
    x = soft_threshold(x, tau);
    const double obj = objective_value(op, y, x, cfg.lambda_l1);
    res.objective.push_back(obj);
    if (!std::isfinite(obj) || obj > 10.0 * res.objective.front()) {
      res.diverged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

double compact_step_deviation(const MeasurementOperator& op, const MeasurementSet& y,
                              const Image& x, double mu) {
  // route 1: x - mu A^T (A x - y)
  MeasurementSet ax = forward(op, x);
  MeasurementSet r = ax;
  for (int m = 0; m < y.count(); ++m) r.frames[m] = sub(ax.frames[m], y.frames[m]);
  Image lhs = sub(x, scale(adjoint(op, r), mu));
  // route 2: mu A^T y + (x - mu A^T A x)
  Image rhs = add(scale(adjoint(op, y), mu), sub(x, scale(adjoint(op, ax), mu)));
  return max_abs(sub(lhs, rhs));
}

}  // namespace pwc
