#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwc/image.hpp"
#include "pwc/signal.hpp"
#include "pwc/tensor.hpp"

namespace pwc {

// Reverse-mode differentiation over dense real tensors. Nodes are evaluated
// eagerly as the graph is built; backward() then accumulates gradients for
// every node reachable from a scalar output whose needs_grad flag is set.
// A tape instance is confined to one thread; independent tapes may run
// concurrently (the conv kernels parallelize internally).
enum class Op {
  Leaf,
  Conv2d,
  LeakyRelu,
  Dropout,
  Upsample2x,
  ConcatCh,
  Add,
  Sub,
  ScalarMul,
  AbsEnvelope,
  Log10Eps,
  DivByMax,
  Clip,
  Sigmoid,
  Bce,
  Mean,
  L1Mean,
  L2Mean,
};

struct Node {
  Op op = Op::Leaf;
  int a = -1, b = -1, c = -1;  // input ids; conv: a=input, b=weights, c=bias or -1
  Tensor value;
  Tensor grad;  // allocated during backward for needs_grad nodes
  bool needs_grad = false;
  double p0 = 0.0, p1 = 0.0;  // slope / rate / eps / scalar / clip bounds
  int stride = 1;
  uint64_t seed = 0;  // dropout mask stream
  bool train_mode = false;
  Tensor aux;  // dropout scale-mask, quadrature component, bce target, channel scales
};

class Tape {
 public:
  // Leaves. requires_grad marks trainable parameters.
  int leaf(Tensor v, bool requires_grad = false);
  int leaf_image(const Image& img, bool requires_grad = false);  // (1, H, W)

  // Multichannel 2-D cross-correlation with TF-style "same" padding.
  // x: (Ci,H,W), w: (Co,Ci,kh,kw) with odd kh/kw, bias: (Co) leaf or -1.
  // stride 1 keeps H,W; stride 2 gives ceil(H/2), ceil(W/2).
  int conv2d(int x, int w, int bias, int stride = 1);
  int leaky_relu(int x, double slope);
  // Inverted-scaling dropout; identity in eval mode; the mask is regenerated
  // deterministically from the seed.
  int dropout(int x, double rate, bool train, uint64_t seed);
  int upsample2x(int x);           // nearest-neighbor, (C,H,W) -> (C,2H,2W)
  int concat_ch(int x, int y);     // along the channel axis
  int add(int x, int y);
  int sub(int x, int y);
  int scalar_mul(int x, double s);
  // Per-column |analytic signal| of a (C,H,W) stack, axial = rows. The
  // backward pass uses d e/d x = x/e - H(h/e) with the Hilbert adjoint -H.
  int abs_envelope(int x);
  int log10_eps(int x, double eps);  // log10(eps + x)
  // x / max(x) per channel; the max is treated as a constant in backprop.
  // A nonpositive max skips the division (all-zero channels pass through).
  int div_by_max(int x);
  int clip(int x, double lo, double hi);  // zero gradient outside [lo, hi]
  int sigmoid(int x);
  // Elementwise binary cross-entropy against a constant target, with
  // probabilities clamped to [1e-7, 1 - 1e-7].
  int bce(int p, Tensor target);
  int mean(int x);              // scalar
  int l1_mean(int x, int y);    // mean |x - y|, scalar
  int l2_mean(int x, int y);    // mean (x - y)^2, scalar

  const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
  Image value_image(int id) const;  // (1,H,W) or (H,W) nodes

  // Accumulate gradients of a scalar output into every needs_grad node.
  void backward(int out);
  const Tensor& grad(int id) const;

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(size_t n) { nodes_.reserve(n); }

 private:
  int push(Node n);
  std::vector<Node> nodes_;
};

// Probability clamp used by bce and the adversarial losses.
inline double clamp_prob(double p) {
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  return p < lo ? lo : (p > hi ? hi : p);
}

struct QConfig;  // signal.hpp

// Differentiable RF-to-image chain: abs_envelope -> div_by_max ->
// 20*log10(eps + .) -> clip. With detach=true the value is computed the same
// way but enters the graph as a constant.
int build_q(Tape& t, int x, const QConfig& cfg, bool detach = false);

}  // namespace pwc
