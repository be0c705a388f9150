#pragma once

#include <vector>

#include "pwc/tensor.hpp"

namespace pwc {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Single-tensor bias-corrected update; t is the 1-based step count after this
// update. m and v must be zero-initialized to the parameter shape.
void adam_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, long t,
               const AdamConfig& cfg);

// Adam over a fixed parameter set; one step() advances all tensors together.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long t_ = 0;
};

}  // namespace pwc
