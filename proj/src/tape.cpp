#include "pwc/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "pwc/conv_kernels.hpp"
#include "pwc/rng.hpp"

namespace pwc {

namespace {
constexpr double kLn10 = 2.302585092994045684;

void check_rank3(const Tensor& t, const char* what) {
  if (t.rank() != 3) throw std::invalid_argument(std::string(what) + ": (C,H,W) tensor required");
}
}  // namespace

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor v, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

int Tape::leaf_image(const Image& img, bool requires_grad) {
  Tensor t({1, img.height, img.width});
  for (size_t i = 0; i < img.size(); ++i) t[i] = img.data[i];
  return leaf(std::move(t), requires_grad);
}

Image Tape::value_image(int id) const {
  const Tensor& t = value(id);
  if (t.rank() == 3 && t.dim(0) == 1) {
    Image img(t.dim(1), t.dim(2));
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = t[i];
    return img;
  }
  if (t.rank() == 2) {
    Image img(t.dim(0), t.dim(1));
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = t[i];
    return img;
  }
  throw std::invalid_argument("value_image: node is not a single-channel image");
}

int Tape::conv2d(int x, int w, int bias, int stride) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  check_rank3(xv, "conv2d input");
  if (wv.rank() != 4) throw std::invalid_argument("conv2d: weights must be (Co,Ci,kh,kw)");
  if (wv.dim(1) != xv.dim(0))
    throw std::invalid_argument("conv2d: input channels do not match weights");
  if (wv.dim(2) % 2 == 0 || wv.dim(3) % 2 == 0)
    throw std::invalid_argument("conv2d: kernel dims must be odd");
  if (stride != 1 && stride != 2) throw std::invalid_argument("conv2d: stride must be 1 or 2");
  const Tensor* bv = nullptr;
  if (bias >= 0) {
    bv = &value(bias);
    if (bv->rank() != 1 || bv->dim(0) != wv.dim(0))
      throw std::invalid_argument("conv2d: bias must be (Co)");
  }
  auto [ho, wo] = detail::conv2d_out_hw(xv.dim(1), xv.dim(2), wv.dim(2), wv.dim(3), stride);
  Node n;
  n.op = Op::Conv2d;
  n.a = x;
  n.b = w;
  n.c = bias;
  n.stride = stride;
  n.needs_grad = needs_grad(x) || needs_grad(w) || (bias >= 0 && needs_grad(bias));
  n.value = Tensor({wv.dim(0), ho, wo});
  detail::conv2d_forward(xv, wv, bv, stride, n.value);
  return push(std::move(n));
}

int Tape::leaky_relu(int x, double slope) {
  const Tensor& xv = value(x);
  Node n;
  n.op = Op::LeakyRelu;
  n.a = x;
  n.p0 = slope;
  n.needs_grad = needs_grad(x);
  n.value = xv;
  for (size_t i = 0; i < n.value.size(); ++i)
    if (n.value[i] < 0.0) n.value[i] *= slope;
  return push(std::move(n));
}

int Tape::dropout(int x, double rate, bool train, uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  const Tensor& xv = value(x);
  Node n;
  n.op = Op::Dropout;
  n.a = x;
  n.p0 = rate;
  n.seed = seed;
  n.train_mode = train;
  n.needs_grad = needs_grad(x);
  if (!train || rate == 0.0) {
    n.value = xv;  // eval mode is the identity
  } else {
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    n.aux = Tensor(xv.dims());
    n.value = Tensor(xv.dims());
    for (size_t i = 0; i < xv.size(); ++i) {
      const double m = rng.uniform() >= rate ? keep_scale : 0.0;
      n.aux[i] = m;
      n.value[i] = xv[i] * m;
    }
  }
  return push(std::move(n));
}

int Tape::upsample2x(int x) {
  const Tensor& xv = value(x);
  check_rank3(xv, "upsample2x");
  const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  Node n;
  n.op = Op::Upsample2x;
  n.a = x;
  n.needs_grad = needs_grad(x);
  n.value = Tensor({c, 2 * h, 2 * w});
  for (int ch = 0; ch < c; ++ch)
    for (int r = 0; r < 2 * h; ++r)
      for (int col = 0; col < 2 * w; ++col)
        n.value.at(ch, r, col) = xv.at(ch, r / 2, col / 2);
  return push(std::move(n));
}

int Tape::concat_ch(int x, int y) {
  const Tensor& a = value(x);
  const Tensor& b = value(y);
  check_rank3(a, "concat_ch");
  check_rank3(b, "concat_ch");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
    throw std::invalid_argument("concat_ch: spatial dims differ");
  Node n;
  n.op = Op::ConcatCh;
  n.a = x;
  n.b = y;
  n.needs_grad = needs_grad(x) || needs_grad(y);
  n.value = Tensor({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data(), a.data() + a.size(), n.value.data());
  std::copy(b.data(), b.data() + b.size(), n.value.data() + a.size());
  return push(std::move(n));
}

int Tape::add(int x, int y) {
  const Tensor& a = value(x);
  const Tensor& b = value(y);
  if (!a.same_dims(b)) throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = x;
  n.b = y;
  n.needs_grad = needs_grad(x) || needs_grad(y);
  n.value = a;
  for (size_t i = 0; i < b.size(); ++i) n.value[i] += b[i];
  return push(std::move(n));
}

int Tape::sub(int x, int y) {
  const Tensor& a = value(x);
  const Tensor& b = value(y);
  if (!a.same_dims(b)) throw std::invalid_argument("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = x;
  n.b = y;
  n.needs_grad = needs_grad(x) || needs_grad(y);
  n.value = a;
  for (size_t i = 0; i < b.size(); ++i) n.value[i] -= b[i];
  return push(std::move(n));
}

int Tape::scalar_mul(int x, double s) {
  Node n;
  n.op = Op::ScalarMul;
  n.a = x;
  n.p0 = s;
  n.needs_grad = needs_grad(x);
  n.value = value(x);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] *= s;
  return push(std::move(n));
}

int Tape::abs_envelope(int x) {
  const Tensor& xv = value(x);
  check_rank3(xv, "abs_envelope");
  const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  Node n;
  n.op = Op::AbsEnvelope;
  n.a = x;
  n.needs_grad = needs_grad(x);
  n.value = Tensor({c, h, w});
  n.aux = Tensor({c, h, w});  // quadrature component per column
  std::vector<double> col(static_cast<size_t>(h));
  for (int ch = 0; ch < c; ++ch) {
    for (int cc = 0; cc < w; ++cc) {
      for (int r = 0; r < h; ++r) col[static_cast<size_t>(r)] = xv.at(ch, r, cc);
      auto q = hilbert_quadrature(col);
      for (int r = 0; r < h; ++r) {
        const double xr = col[static_cast<size_t>(r)];
        const double hr = q[static_cast<size_t>(r)];
        n.aux.at(ch, r, cc) = hr;
        n.value.at(ch, r, cc) = std::sqrt(xr * xr + hr * hr);
      }
    }
  }
  return push(std::move(n));
}

int Tape::log10_eps(int x, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("log10_eps: eps must be positive");
  Node n;
  n.op = Op::Log10Eps;
  n.a = x;
  n.p0 = eps;
  n.needs_grad = needs_grad(x);
  n.value = value(x);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::log10(eps + n.value[i]);
  return push(std::move(n));
}

int Tape::div_by_max(int x) {
  const Tensor& xv = value(x);
  Node n;
  n.op = Op::DivByMax;
  n.a = x;
  n.needs_grad = needs_grad(x);
  n.value = xv;
  const int channels = xv.rank() == 3 ? xv.dim(0) : 1;
  const size_t per = xv.size() / static_cast<size_t>(channels);
  n.aux = Tensor({channels});
  for (int ch = 0; ch < channels; ++ch) {
    double m = 0.0;
    for (size_t i = 0; i < per; ++i) m = std::max(m, xv[per * ch + i]);
    const double inv = m > 0.0 ? 1.0 / m : 1.0;
    n.aux[static_cast<size_t>(ch)] = inv;
    for (size_t i = 0; i < per; ++i) n.value[per * ch + i] *= inv;
  }
  return push(std::move(n));
}

int Tape::clip(int x, double lo, double hi) {
  if (lo >= hi) throw std::invalid_argument("clip: lo must be < hi");
  Node n;
  n.op = Op::Clip;
  n.a = x;
  n.p0 = lo;
  n.p1 = hi;
  n.needs_grad = needs_grad(x);
  n.value = value(x);
  for (size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = n.value[i] < lo ? lo : (n.value[i] > hi ? hi : n.value[i]);
  return push(std::move(n));
}

int Tape::sigmoid(int x) {
  Node n;
  n.op = Op::Sigmoid;
  n.a = x;
  n.needs_grad = needs_grad(x);
  n.value = value(x);
  for (size_t i = 0; i < n.value.size(); ++i) n.value[i] = 1.0 / (1.0 + std::exp(-n.value[i]));
  return push(std::move(n));
}

int Tape::bce(int p, Tensor target) {
  const Tensor& pv = value(p);
  if (!pv.same_dims(target)) throw std::invalid_argument("bce: target shape mismatch");
  Node n;
  n.op = Op::Bce;
  n.a = p;
  n.needs_grad = needs_grad(p);
  n.aux = std::move(target);
  n.value = Tensor(pv.dims());
  for (size_t i = 0; i < pv.size(); ++i) {
    const double q = clamp_prob(pv[i]);
    const double t = n.aux[i];
    n.value[i] = -(t * std::log(q) + (1.0 - t) * std::log(1.0 - q));
  }
  return push(std::move(n));
}

int Tape::mean(int x) {
  const Tensor& xv = value(x);
  Node n;
  n.op = Op::Mean;
  n.a = x;
  n.needs_grad = needs_grad(x);
  double s = 0.0;
  for (size_t i = 0; i < xv.size(); ++i) s += xv[i];
  n.value = Tensor({1}, s / static_cast<double>(xv.size()));
  return push(std::move(n));
}

int Tape::l1_mean(int x, int y) {
  const Tensor& a = value(x);
  const Tensor& b = value(y);
  if (!a.same_dims(b)) throw std::invalid_argument("l1_mean: shape mismatch");
  Node n;
  n.op = Op::L1Mean;
  n.a = x;
  n.b = y;
  n.needs_grad = needs_grad(x) || needs_grad(y);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  n.value = Tensor({1}, s / static_cast<double>(a.size()));
  return push(std::move(n));
}

int Tape::l2_mean(int x, int y) {
  const Tensor& a = value(x);
  const Tensor& b = value(y);
  if (!a.same_dims(b)) throw std::invalid_argument("l2_mean: shape mismatch");
  Node n;
  n.op = Op::L2Mean;
  n.a = x;
  n.b = y;
  n.needs_grad = needs_grad(x) || needs_grad(y);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  n.value = Tensor({1}, s / static_cast<double>(a.size()));
  return push(std::move(n));
}

const Tensor& Tape::grad(int id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.empty()) throw std::logic_error("grad: node has no gradient (run backward first)");
  return n.grad;
}

void Tape::backward(int out) {
  Node& on = nodes_[static_cast<size_t>(out)];
  if (on.value.size() != 1) throw std::invalid_argument("backward: output must be scalar");
  if (!on.needs_grad) throw std::invalid_argument("backward: output does not depend on any trainable leaf");

  for (int id = 0; id <= out; ++id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.needs_grad)
      n.grad = Tensor::zeros_like(n.value);
    else
      n.grad = Tensor();
  }
  on.grad[0] = 1.0;

  auto gref = [&](int id) -> Tensor& { return nodes_[static_cast<size_t>(id)].grad; };
  auto wants = [&](int id) { return id >= 0 && nodes_[static_cast<size_t>(id)].needs_grad; };

  for (int id = out; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad || n.op == Op::Leaf) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Conv2d: {
        const Tensor& xv = value(n.a);
        const Tensor& wv = value(n.b);
        detail::conv2d_backward(xv, wv, n.stride, g, wants(n.a) ? &gref(n.a) : nullptr,
                                wants(n.b) ? &gref(n.b) : nullptr,
                                (n.c >= 0 && wants(n.c)) ? &gref(n.c) : nullptr);
        break;
      }
      case Op::LeakyRelu: {
        if (!wants(n.a)) break;
        const Tensor& xv = value(n.a);
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (xv[i] >= 0.0 ? 1.0 : n.p0);
        break;
      }
      case Op::Dropout: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        if (!n.train_mode || n.p0 == 0.0) {
          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        } else {
          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux[i];
        }
        break;
      }
      case Op::Upsample2x: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        const int c = gx.dim(0), h = gx.dim(1), w = gx.dim(2);
        for (int ch = 0; ch < c; ++ch)
          for (int r = 0; r < 2 * h; ++r)
            for (int col = 0; col < 2 * w; ++col)
              gx.at(ch, r / 2, col / 2) += g.at(ch, r, col);
        break;
      }
      case Op::ConcatCh: {
        const Tensor& a = value(n.a);
        if (wants(n.a)) {
          Tensor& gx = gref(n.a);
          for (size_t i = 0; i < a.size(); ++i) gx[i] += g[i];
        }
        if (wants(n.b)) {
          Tensor& gy = gref(n.b);
          for (size_t i = 0; i < gy.size(); ++i) gy[i] += g[a.size() + i];
        }
        break;
      }
      case Op::Add: {
        if (wants(n.a)) {
          Tensor& gx = gref(n.a);
          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (wants(n.b)) {
          Tensor& gy = gref(n.b);
          for (size_t i = 0; i < g.size(); ++i) gy[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        if (wants(n.a)) {
          Tensor& gx = gref(n.a);
          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (wants(n.b)) {
          Tensor& gy = gref(n.b);
          for (size_t i = 0; i < g.size(); ++i) gy[i] -= g[i];
        }
        break;
      }
      case Op::ScalarMul: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.p0;
        break;
      }
      case Op::AbsEnvelope: {
        if (!wants(n.a)) break;
        const Tensor& xv = value(n.a);
        Tensor& gx = gref(n.a);
        const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
        std::vector<double> u(static_cast<size_t>(h));
        for (int ch = 0; ch < c; ++ch) {
          for (int cc = 0; cc < w; ++cc) {
            // g*x/e direct part; -H(g*h/e) through the Hilbert adjoint
            for (int r = 0; r < h; ++r) {
              const double e = n.value.at(ch, r, cc);
              u[static_cast<size_t>(r)] =
                  e > 0.0 ? g.at(ch, r, cc) * n.aux.at(ch, r, cc) / e : 0.0;
            }
            auto hu = hilbert_quadrature(u);
            for (int r = 0; r < h; ++r) {
              const double e = n.value.at(ch, r, cc);
              const double direct = e > 0.0 ? g.at(ch, r, cc) * xv.at(ch, r, cc) / e : 0.0;
              gx.at(ch, r, cc) += direct - hu[static_cast<size_t>(r)];
            }
          }
        }
        break;
      }
      case Op::Log10Eps: {
        if (!wants(n.a)) break;
        const Tensor& xv = value(n.a);
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / ((n.p0 + xv[i]) * kLn10);
        break;
      }
      case Op::DivByMax: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        const int channels = n.aux.dim(0);
        const size_t per = g.size() / static_cast<size_t>(channels);
        for (int ch = 0; ch < channels; ++ch) {
          const double inv = n.aux[static_cast<size_t>(ch)];
          for (size_t i = 0; i < per; ++i) gx[per * ch + i] += g[per * ch + i] * inv;
        }
        break;
      }
      case Op::Clip: {
        if (!wants(n.a)) break;
        const Tensor& xv = value(n.a);
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          if (xv[i] >= n.p0 && xv[i] <= n.p1) gx[i] += g[i];
        break;
      }
      case Op::Sigmoid: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::Bce: {
        if (!wants(n.a)) break;
        const Tensor& pv = value(n.a);
        Tensor& gx = gref(n.a);
        for (size_t i = 0; i < g.size(); ++i) {
          if (pv[i] <= 1e-7 || pv[i] >= 1.0 - 1e-7) continue;  // clamped region
          const double t = n.aux[i];
          gx[i] += g[i] * (-t / pv[i] + (1.0 - t) / (1.0 - pv[i]));
        }
        break;
      }
      case Op::Mean: {
        if (!wants(n.a)) break;
        Tensor& gx = gref(n.a);
        const double gv = g[0] / static_cast<double>(gx.size());
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += gv;
        break;
      }
      case Op::L1Mean: {
        const Tensor& a = value(n.a);
        const Tensor& b = value(n.b);
        const double gv = g[0] / static_cast<double>(a.size());
        if (wants(n.a)) {
          Tensor& gx = gref(n.a);
          for (size_t i = 0; i < a.size(); ++i)
            gx[i] += gv * (a[i] > b[i] ? 1.0 : (a[i] < b[i] ? -1.0 : 0.0));
        }
        if (wants(n.b)) {
          Tensor& gy = gref(n.b);
          for (size_t i = 0; i < a.size(); ++i)
            gy[i] -= gv * (a[i] > b[i] ? 1.0 : (a[i] < b[i] ? -1.0 : 0.0));
        }
        break;
      }
      case Op::L2Mean: {
        const Tensor& a = value(n.a);
        const Tensor& b = value(n.b);
        const double gv = 2.0 * g[0] / static_cast<double>(a.size());
        if (wants(n.a)) {
          Tensor& gx = gref(n.a);
          for (size_t i = 0; i < a.size(); ++i) gx[i] += gv * (a[i] - b[i]);
        }
        if (wants(n.b)) {
          Tensor& gy = gref(n.b);
          for (size_t i = 0; i < a.size(); ++i) gy[i] -= gv * (a[i] - b[i]);
        }
        break;
      }
      case Op::Leaf:
        break;
    }
  }
}

int build_q(Tape& t, int x, const QConfig& cfg, bool detach) {
  cfg.validate();
  if (detach) {
    // same computation, entering the graph as a constant
    Tape scratch;
    int q = build_q(scratch, scratch.leaf(t.value(x)), cfg, false);
    return t.leaf(scratch.value(q));
  }
  int env = t.abs_envelope(x);
  int nrm = t.div_by_max(env);
  int db = t.scalar_mul(t.log10_eps(nrm, cfg.epsilon), 20.0);
  return t.clip(db, cfg.floor_db, cfg.ceil_db);
}

}  // namespace pwc
