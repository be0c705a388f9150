#include "pwc/adversary.hpp"

#include <cmath>
#include <stdexcept>

#include "pwc/rng.hpp"

namespace pwc {

namespace {

ConvLayer random_conv(int co, int ci, int stride, double slope, Rng& rng) {
  ConvLayer l;
  l.w = Tensor({co, ci, 3, 3});
  l.b = Tensor({co});
  l.stride = stride;
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  const double limit = std::sqrt(6.0 / (static_cast<double>(ci) * 9.0)) * gain;
  for (size_t i = 0; i < l.w.size(); ++i) l.w[i] = rng.uniform(-limit, limit);
  return l;
}

}  // namespace

Discriminator init_discriminator(uint64_t seed) {
  Discriminator d;
  Rng rng(substream(seed, "init", 0xd15c));
  const int plan[4][3] = {{4, 32, 2}, {32, 64, 2}, {64, 128, 2}, {128, 1, 1}};
  for (auto& l : plan) d.layers.push_back(random_conv(l[1], l[0], l[2], d.slope, rng));
  return d;
}

std::vector<std::pair<std::string, Tensor*>> named_params(Discriminator& d) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (size_t l = 0; l < d.layers.size(); ++l) {
    out.emplace_back("disc.c" + std::to_string(l) + ".w", &d.layers[l].w);
    out.emplace_back("disc.c" + std::to_string(l) + ".b", &d.layers[l].b);
  }
  return out;
}

size_t param_count(const Discriminator& d) {
  size_t n = 0;
  for (const auto& l : d.layers) n += l.w.size() + l.b.size();
  return n;
}

int disc_forward(Tape& t, const Discriminator& d, int cond, int candidate, bool trainable,
                 TapeBindings* bindings) {
  const Tensor& cv = t.value(cond);
  const Tensor& xv = t.value(candidate);
  if (cv.rank() != 3 || cv.dim(0) != 3)
    throw std::invalid_argument("disc_forward: condition must be (3,H,W)");
  if (xv.rank() != 3 || xv.dim(0) != 1)
    throw std::invalid_argument("disc_forward: candidate must be (1,H,W)");
  if (cv.dim(1) % 8 != 0 || cv.dim(2) % 8 != 0)
    throw std::invalid_argument("disc_forward: dims must be divisible by 8");

  int x = t.concat_ch(cond, candidate);
  for (size_t l = 0; l < d.layers.size(); ++l) {
    int w = t.leaf(d.layers[l].w, trainable);
    int b = t.leaf(d.layers[l].b, trainable);
    if (bindings) {
      bindings->leaves.emplace_back("disc.c" + std::to_string(l) + ".w", w);
      bindings->leaves.emplace_back("disc.c" + std::to_string(l) + ".b", b);
    }
    x = t.conv2d(x, w, b, d.layers[l].stride);
    x = (l + 1 < d.layers.size()) ? t.leaky_relu(x, d.slope) : t.sigmoid(x);
  }
  return x;
}

int disc_loss(Tape& t, int d_real, int d_fake) {
  int real_term = t.mean(t.bce(d_real, Tensor(t.value(d_real).dims(), 1.0)));
  int fake_term = t.mean(t.bce(d_fake, Tensor(t.value(d_fake).dims(), 0.0)));
  return t.scalar_mul(t.add(real_term, fake_term), 0.5);
}

int generator_adv_loss(Tape& t, int d_fake, bool saturating) {
  if (saturating) {
    // +log(1 - D(fake)) == -BCE(D(fake), 0)
    return t.scalar_mul(t.mean(t.bce(d_fake, Tensor(t.value(d_fake).dims(), 0.0))), -1.0);
  }
  // -log D(fake) == BCE(D(fake), 1)
  return t.mean(t.bce(d_fake, Tensor(t.value(d_fake).dims(), 1.0)));
}

}  // namespace pwc
