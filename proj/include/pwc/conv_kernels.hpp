#pragma once

#include <utility>

#include "pwc/tensor.hpp"

// Internal cross-correlation kernels behind Tape::conv2d. Hot path of
// training; parallelized over independent output slices so results are
// bit-identical for any thread count.
namespace pwc::detail {

std::pair<int, int> conv2d_out_hw(int h, int w, int kh, int kw, int stride);

// x (Ci,H,W), w (Co,Ci,kh,kw), bias (Co) or nullptr -> out (Co,Ho,Wo)
void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor* bias, int stride, Tensor& out);

// Accumulates into any non-null gradient. gout has the forward output shape.
void conv2d_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& gout, Tensor* gx,
                     Tensor* gw, Tensor* gb);

}  // namespace pwc::detail
