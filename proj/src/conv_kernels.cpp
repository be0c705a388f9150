#include "pwc/conv_kernels.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace pwc::detail {

namespace {

struct PadSpec {
  int ho, wo;      // output dims
  int ph, pw;      // pad begin (top, left)
  int hp, wp;      // padded dims
};

PadSpec pad_spec(int h, int w, int kh, int kw, int stride) {
  PadSpec s;
  s.ho = (h + stride - 1) / stride;
  s.wo = (w + stride - 1) / stride;
  const int th = std::max((s.ho - 1) * stride + kh - h, 0);
  const int tw = std::max((s.wo - 1) * stride + kw - w, 0);
  s.ph = th / 2;
  s.pw = tw / 2;
  s.hp = h + th;
  s.wp = w + tw;
  return s;
}

// copy channel ci of x into a zeroed (hp, wp) buffer at offset (ph, pw)
void pad_channel(const Tensor& x, int ci, const PadSpec& s, double* buf) {
  const int h = x.dim(1), w = x.dim(2);
  std::fill(buf, buf + static_cast<size_t>(s.hp) * s.wp, 0.0);
  const double* src = x.data() + static_cast<size_t>(ci) * h * w;
  for (int r = 0; r < h; ++r)
    std::copy(src + static_cast<size_t>(r) * w, src + static_cast<size_t>(r + 1) * w,
              buf + static_cast<size_t>(r + s.ph) * s.wp + s.pw);
}

// dst[x] += sum of 9 taps, stride 1
inline void corr3_row(const double* r0, const double* r1, const double* r2, const double* w,
                      double* dst, int n) {
  const double w00 = w[0], w01 = w[1], w02 = w[2];
  const double w10 = w[3], w11 = w[4], w12 = w[5];
  const double w20 = w[6], w21 = w[7], w22 = w[8];
  for (int x = 0; x < n; ++x) {
    dst[x] += w00 * r0[x] + w01 * r0[x + 1] + w02 * r0[x + 2] + w10 * r1[x] + w11 * r1[x + 1] +
              w12 * r1[x + 2] + w20 * r2[x] + w21 * r2[x + 1] + w22 * r2[x + 2];
  }
}

inline void corr3_row_s2(const double* r0, const double* r1, const double* r2, const double* w,
                         double* dst, int n) {
  const double w00 = w[0], w01 = w[1], w02 = w[2];
  const double w10 = w[3], w11 = w[4], w12 = w[5];
  const double w20 = w[6], w21 = w[7], w22 = w[8];
  for (int x = 0; x < n; ++x) {
    const int s = 2 * x;
    dst[x] += w00 * r0[s] + w01 * r0[s + 1] + w02 * r0[s + 2] + w10 * r1[s] + w11 * r1[s + 1] +
              w12 * r1[s + 2] + w20 * r2[s] + w21 * r2[s + 1] + w22 * r2[s + 2];
  }
}

// nine dot products in one pass: acc[t] += sum_x g[x] * row_t[x + off_t]
inline void corr3_row_gw(const double* r0, const double* r1, const double* r2, const double* g,
                         double* acc, int n, int stride) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0;
  if (stride == 1) {
    for (int x = 0; x < n; ++x) {
      const double gv = g[x];
      a0 += gv * r0[x];
      a1 += gv * r0[x + 1];
      a2 += gv * r0[x + 2];
      a3 += gv * r1[x];
      a4 += gv * r1[x + 1];
      a5 += gv * r1[x + 2];
      a6 += gv * r2[x];
      a7 += gv * r2[x + 1];
      a8 += gv * r2[x + 2];
    }
  } else {
    for (int x = 0; x < n; ++x) {
      const double gv = g[x];
      const int s = 2 * x;
      a0 += gv * r0[s];
      a1 += gv * r0[s + 1];
      a2 += gv * r0[s + 2];
      a3 += gv * r1[s];
      a4 += gv * r1[s + 1];
      a5 += gv * r1[s + 2];
      a6 += gv * r2[s];
      a7 += gv * r2[s + 1];
      a8 += gv * r2[s + 2];
    }
  }
  acc[0] += a0;
  acc[1] += a1;
  acc[2] += a2;
  acc[3] += a3;
  acc[4] += a4;
  acc[5] += a5;
  acc[6] += a6;
  acc[7] += a7;
  acc[8] += a8;
}

}  // namespace

std::pair<int, int> conv2d_out_hw(int h, int w, int kh, int kw, int stride) {
  PadSpec s = pad_spec(h, w, kh, kw, stride);
  return {s.ho, s.wo};
}

void conv2d_forward(const Tensor& x, const Tensor& w, const Tensor* bias, int stride,
                    Tensor& out) {
  const int ci_n = x.dim(0), h = x.dim(1), ww = x.dim(2);
  const int co_n = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const PadSpec s = pad_spec(h, ww, kh, kw, stride);
  const size_t pch = static_cast<size_t>(s.hp) * s.wp;

  std::vector<double> padded(pch * static_cast<size_t>(ci_n));
  for (int ci = 0; ci < ci_n; ++ci) pad_channel(x, ci, s, padded.data() + pch * ci);

  const size_t och = static_cast<size_t>(s.ho) * s.wo;
  const bool k3 = (kh == 3 && kw == 3);

#pragma omp parallel for schedule(static) if (co_n >= 4)
  for (int co = 0; co < co_n; ++co) {
    double* oc = out.data() + och * co;
    const double bv = bias ? (*bias)[static_cast<size_t>(co)] : 0.0;
    std::fill(oc, oc + och, bv);
    for (int ci = 0; ci < ci_n; ++ci) {
      const double* pc = padded.data() + pch * ci;
      const double* wk = w.data() + ((static_cast<size_t>(co) * ci_n + ci) * kh) * kw;
      if (k3) {
        for (int oy = 0; oy < s.ho; ++oy) {
          const double* r0 = pc + static_cast<size_t>(oy * stride) * s.wp;
          const double* r1 = r0 + s.wp;
          const double* r2 = r1 + s.wp;
          double* dst = oc + static_cast<size_t>(oy) * s.wo;
          if (stride == 1)
            corr3_row(r0, r1, r2, wk, dst, s.wo);
          else
            corr3_row_s2(r0, r1, r2, wk, dst, s.wo);
        }
      } else {
        for (int oy = 0; oy < s.ho; ++oy) {
          double* dst = oc + static_cast<size_t>(oy) * s.wo;
          for (int ky = 0; ky < kh; ++ky) {
            const double* row = pc + static_cast<size_t>(oy * stride + ky) * s.wp;
            for (int kx = 0; kx < kw; ++kx) {
              const double wv = wk[static_cast<size_t>(ky) * kw + kx];
              for (int ox = 0; ox < s.wo; ++ox) dst[ox] += wv * row[ox * stride + kx];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& gout, Tensor* gx,
                     Tensor* gw, Tensor* gb) {
  const int ci_n = x.dim(0), h = x.dim(1), ww = x.dim(2);
  const int co_n = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const PadSpec s = pad_spec(h, ww, kh, kw, stride);
  const size_t pch = static_cast<size_t>(s.hp) * s.wp;
  const size_t och = static_cast<size_t>(s.ho) * s.wo;

  if (gb) {
#pragma omp parallel for schedule(static) if (co_n >= 4)
    for (int co = 0; co < co_n; ++co) {
      const double* gc = gout.data() + och * co;
      double acc = 0.0;
      for (size_t i = 0; i < och; ++i) acc += gc[i];
      (*gb)[static_cast<size_t>(co)] += acc;
    }
  }

  if (gw) {
    std::vector<double> padded(pch * static_cast<size_t>(ci_n));
    for (int ci = 0; ci < ci_n; ++ci) pad_channel(x, ci, s, padded.data() + pch * ci);
    const bool k3 = (kh == 3 && kw == 3);
#pragma omp parallel for schedule(static) if (co_n >= 4)
    for (int co = 0; co < co_n; ++co) {
      const double* gc = gout.data() + och * co;
      for (int ci = 0; ci < ci_n; ++ci) {
        const double* pc = padded.data() + pch * ci;
        double* wk = gw->data() + ((static_cast<size_t>(co) * ci_n + ci) * kh) * kw;
        if (k3) {
          for (int oy = 0; oy < s.ho; ++oy) {
            const double* r0 = pc + static_cast<size_t>(oy * stride) * s.wp;
            corr3_row_gw(r0, r0 + s.wp, r0 + 2 * s.wp, gc + static_cast<size_t>(oy) * s.wo, wk,
                         s.wo, stride);
          }
        } else {
          for (int oy = 0; oy < s.ho; ++oy) {
            const double* grow = gc + static_cast<size_t>(oy) * s.wo;
            for (int ky = 0; ky < kh; ++ky) {
              const double* row = pc + static_cast<size_t>(oy * stride + ky) * s.wp;
              for (int kx = 0; kx < kw; ++kx) {
                double acc = 0.0;
                for (int ox = 0; ox < s.wo; ++ox) acc += grow[ox] * row[ox * stride + kx];
                wk[static_cast<size_t>(ky) * kw + kx] += acc;
              }
            }
          }
        }
      }
    }
  }

  if (gx) {
    // scatter into a padded buffer per input channel, then unpad
#pragma omp parallel for schedule(static) if (ci_n >= 4)
    for (int ci = 0; ci < ci_n; ++ci) {
      std::vector<double> gpad(pch, 0.0);
      for (int co = 0; co < co_n; ++co) {
        const double* gc = gout.data() + och * co;
        const double* wk = w.data() + ((static_cast<size_t>(co) * ci_n + ci) * kh) * kw;
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const double wv = wk[static_cast<size_t>(ky) * kw + kx];
            if (wv == 0.0) continue;
            for (int oy = 0; oy < s.ho; ++oy) {
              double* prow = gpad.data() + static_cast<size_t>(oy * stride + ky) * s.wp + kx;
              const double* grow = gc + static_cast<size_t>(oy) * s.wo;
              if (stride == 1)
                for (int ox = 0; ox < s.wo; ++ox) prow[ox] += wv * grow[ox];
              else
                for (int ox = 0; ox < s.wo; ++ox) prow[2 * ox] += wv * grow[ox];
            }
          }
        }
      }
      double* gxc = gx->data() + static_cast<size_t>(ci) * h * ww;
      for (int r = 0; r < h; ++r) {
        const double* src = gpad.data() + static_cast<size_t>(r + s.ph) * s.wp + s.pw;
        double* dst = gxc + static_cast<size_t>(r) * ww;
        for (int c = 0; c < ww; ++c) dst[c] += src[c];
      }
    }
  }
}

}  // namespace pwc::detail
