#include "pwc/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace pwc {

void adam_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, long t,
               const AdamConfig& cfg) {
  if (!param.same_dims(grad) || !param.same_dims(m) || !param.same_dims(v))
    throw std::invalid_argument("adam_step: shape mismatch");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    param[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam::step: count mismatch");
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.push_back(Tensor::zeros_like(*p));
      v_.push_back(Tensor::zeros_like(*p));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter set changed");
  ++t_;
  for (size_t i = 0; i < params.size(); ++i)
    adam_step(*params[i], *grads[i], m_[i], v_[i], t_, cfg_);
}

}  // namespace pwc
