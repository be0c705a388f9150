#include "pwc/unfolded.hpp"

#include <cmath>
#include <stdexcept>

#include "pwc/rng.hpp"

namespace pwc {

namespace {

Tensor delta_kernel(double center) {
  Tensor k({1, 1, 3, 3});
  k.at(0, 0, 1, 1) = center;
  return k;
}

ConvLayer random_conv(int co, int ci, int stride, double slope, Rng& rng) {
  ConvLayer l;
  l.w = Tensor({co, ci, 3, 3});
  l.b = Tensor({co});
  l.stride = stride;
  const double fan_in = static_cast<double>(ci) * 9.0;
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  const double limit = std::sqrt(6.0 / fan_in) * gain;
  for (size_t i = 0; i < l.w.size(); ++i) l.w[i] = rng.uniform(-limit, limit);
  return l;
}

int bind_param(Tape& t, const Tensor& p, bool trainable, const std::string& name,
               TapeBindings* bindings) {
  int id = t.leaf(p, trainable);
  if (bindings) bindings->leaves.emplace_back(name, id);
  return id;
}

int conv_block(Tape& t, int x, const ConvLayer& l, double slope, bool trainable,
               const std::string& name, TapeBindings* bindings) {
  int w = bind_param(t, l.w, trainable, name + ".w", bindings);
  int b = bind_param(t, l.b, trainable, name + ".b", bindings);
  return t.leaky_relu(t.conv2d(x, w, b, l.stride), slope);
}

int prox_forward(Tape& t, const ProxNet& p, int x, bool trainable, bool train_mode,
                 uint64_t dropout_seed, const std::string& prefix, TapeBindings* bindings) {
  int a0 = conv_block(t, x, p.layers[0], p.slope, trainable, prefix + ".c0", bindings);
  int skip = conv_block(t, a0, p.layers[1], p.slope, trainable, prefix + ".c1", bindings);
  int a2 = conv_block(t, skip, p.layers[2], p.slope, trainable, prefix + ".c2", bindings);
  int a3 = conv_block(t, a2, p.layers[3], p.slope, trainable, prefix + ".c3", bindings);
  int a4 = conv_block(t, a3, p.layers[4], p.slope, trainable, prefix + ".c4", bindings);
  int a5 = t.dropout(a4, p.dropout_rate, train_mode, dropout_seed);
  int a6 = t.concat_ch(skip, t.upsample2x(a5));
  int a7 = conv_block(t, a6, p.layers[5], p.slope, trainable, prefix + ".c5", bindings);
  int a8 = conv_block(t, a7, p.layers[6], p.slope, trainable, prefix + ".c6", bindings);
  return conv_block(t, a8, p.layers[7], p.slope, trainable, prefix + ".c7", bindings);
}

void check_even_dims(const Tensor& v, const char* what) {
  if (v.dim(1) % 2 != 0 || v.dim(2) % 2 != 0)
    throw std::invalid_argument(std::string(what) + ": input dims must be even");
}

}  // namespace

int fold_forward(Tape& t, const Fold& fold, const std::vector<int>& y_nodes, int x_prev,
                 bool identity_prox, bool trainable, bool train_mode, uint64_t dropout_seed,
                 const std::string& prefix, TapeBindings* bindings) {
  if (y_nodes.size() != fold.w_kernels.size())
    throw std::invalid_argument("fold_forward: frame count does not match fold kernels");
  int acc = -1;
  for (size_t m = 0; m < y_nodes.size(); ++m) {
    int w = bind_param(t, fold.w_kernels[m], trainable, prefix + ".w" + std::to_string(m),
                       bindings);
    int term = t.conv2d(y_nodes[m], w, -1, 1);
    acc = (acc < 0) ? term : t.add(acc, term);
  }
  int v = bind_param(t, fold.v_kernel, trainable, prefix + ".v", bindings);
  acc = t.add(acc, t.conv2d(x_prev, v, -1, 1));
  if (identity_prox) return acc;
  return prox_forward(t, fold.prox, acc, trainable, train_mode, dropout_seed, prefix + ".prox",
                      bindings);
}

int model_forward(Tape& t, const UnfoldedModel& m, const std::vector<int>& y_nodes,
                  const ForwardOpts& opts, TapeBindings* bindings) {
  if (m.k_active < 1 || m.k_active > m.fold_count())
    throw std::invalid_argument("model_forward: k_active out of range");
  if (static_cast<int>(y_nodes.size()) != m.frame_count())
    throw std::invalid_argument("model_forward: frame count mismatch");
  if (!m.identity_prox) check_even_dims(t.value(y_nodes[0]), "model_forward");

  int x;
  if (opts.x_init >= 0) {
    x = opts.x_init;  // cached state entering fold start_fold
  } else if (opts.start_fold > 0) {
    throw std::invalid_argument("model_forward: start_fold needs x_init");
  } else {
    int acc = y_nodes[0];
    for (size_t i = 1; i < y_nodes.size(); ++i) acc = t.add(acc, y_nodes[i]);
    x = t.scalar_mul(acc, 1.0 / static_cast<double>(y_nodes.size()));
  }
  for (int k = opts.start_fold; k < m.k_active; ++k) {
    const bool trainable = opts.trainable_fold == kAllFolds || opts.trainable_fold == k;
    x = fold_forward(t, m.folds[static_cast<size_t>(k)], y_nodes, x, m.identity_prox, trainable,
                     opts.train_mode && trainable,
                     substream(opts.dropout_seed, "fold", static_cast<uint64_t>(k)),
                     "fold" + std::to_string(k), bindings);
  }
  int fw = bind_param(t, m.final_w, opts.final_trainable, "final.w", bindings);
  int fb = bind_param(t, m.final_b, opts.final_trainable, "final.b", bindings);
  return t.conv2d(x, fw, fb, 1);
}

int unet_forward(Tape& t, const UNetLite& net, const std::vector<int>& y_nodes,
                 const ForwardOpts& opts, TapeBindings* bindings) {
  if (y_nodes.empty()) throw std::invalid_argument("unet_forward: no frames");
  const bool trainable = opts.trainable_fold != -1;
  int x = y_nodes[0];
  for (size_t i = 1; i < y_nodes.size(); ++i) x = t.concat_ch(x, y_nodes[i]);
  check_even_dims(t.value(x), "unet_forward");
  const auto& L = net.layers;
  int a0 = conv_block(t, x, L[0], net.slope, trainable, "unet.c0", bindings);
  int skip = conv_block(t, a0, L[1], net.slope, trainable, "unet.c1", bindings);
  int a2 = conv_block(t, skip, L[2], net.slope, trainable, "unet.c2", bindings);
  int a3 = conv_block(t, a2, L[3], net.slope, trainable, "unet.c3", bindings);
  int a4 = conv_block(t, t.upsample2x(a3), L[4], net.slope, trainable, "unet.c4", bindings);
  int a5 = t.dropout(a4, net.dropout_rate, opts.train_mode, opts.dropout_seed);
  int a6 = net.with_skip ? t.concat_ch(a5, skip) : a5;
  int a7 = conv_block(t, a6, L[5], net.slope, trainable, "unet.c5", bindings);
  int a8 = conv_block(t, a7, L[6], net.slope, trainable, "unet.c6", bindings);
  return conv_block(t, a8, L[7], net.slope, trainable, "unet.c7", bindings);
}

Image unfolded_infer(const UnfoldedModel& m, const MeasurementSet& y) {
  Tape t;
  std::vector<int> y_nodes;
  for (const auto& f : y.frames) y_nodes.push_back(t.leaf_image(f));
  int out = model_forward(t, m, y_nodes, ForwardOpts{}, nullptr);
  return t.value_image(out);
}

Image unet_infer(const UNetLite& net, const MeasurementSet& y) {
  Tape t;
  std::vector<int> y_nodes;
  for (const auto& f : y.frames) y_nodes.push_back(t.leaf_image(f));
  int out = unet_forward(t, net, y_nodes, ForwardOpts{}, nullptr);
  return t.value_image(out);
}

UnfoldedModel init_unfolded(int k_folds, int m_frames, double mu0, uint64_t seed) {
  if (k_folds < 1 || m_frames < 1) throw std::invalid_argument("init_unfolded: bad counts");
  UnfoldedModel model;
  Rng rng(substream(seed, "init"));
  const int plan[9][3] = {{1, 1, 1},  {1, 8, 1},  {8, 16, 1},  {16, 32, 2}, {32, 32, 1},
                          {40, 16, 1}, {16, 32, 1}, {32, 1, 1}, {0, 0, 0}};
  for (int k = 0; k < k_folds; ++k) {
    Fold f;
    for (int m = 0; m < m_frames; ++m)
      f.w_kernels.push_back(delta_kernel(mu0 / static_cast<double>(m_frames)));
    f.v_kernel = delta_kernel(1.0 - mu0);
    for (int l = 0; plan[l][0] != 0; ++l)
      f.prox.layers.push_back(random_conv(plan[l][1], plan[l][0], plan[l][2], f.prox.slope, rng));
    model.folds.push_back(std::move(f));
  }
  model.final_w = delta_kernel(1.0);
  model.final_b = Tensor({1});
  model.k_active = k_folds;
  return model;
}

UNetLite init_unet_lite(bool with_skip, uint64_t seed) {
  UNetLite net;
  net.with_skip = with_skip;
  Rng rng(substream(seed, "init"));
  const int c5_in = with_skip ? 96 : 64;
  const int plan[8][3] = {{3, 16, 1},  {16, 32, 1}, {32, 64, 2}, {64, 64, 1},
                          {64, 64, 1}, {c5_in, 60, 1}, {60, 16, 1}, {16, 1, 1}};
  for (auto& l : plan) net.layers.push_back(random_conv(l[1], l[0], l[2], net.slope, rng));
  return net;
}

std::vector<std::pair<std::string, Tensor*>> named_params(UnfoldedModel& m) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (size_t k = 0; k < m.folds.size(); ++k) {
    const std::string p = "fold" + std::to_string(k);
    Fold& f = m.folds[k];
    for (size_t i = 0; i < f.w_kernels.size(); ++i)
      out.emplace_back(p + ".w" + std::to_string(i), &f.w_kernels[i]);
    out.emplace_back(p + ".v", &f.v_kernel);
    for (size_t l = 0; l < f.prox.layers.size(); ++l) {
      out.emplace_back(p + ".prox.c" + std::to_string(l) + ".w", &f.prox.layers[l].w);
      out.emplace_back(p + ".prox.c" + std::to_string(l) + ".b", &f.prox.layers[l].b);
    }
  }
  out.emplace_back("final.w", &m.final_w);
  out.emplace_back("final.b", &m.final_b);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> named_params(UNetLite& net) {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    out.emplace_back("unet.c" + std::to_string(l) + ".w", &net.layers[l].w);
    out.emplace_back("unet.c" + std::to_string(l) + ".b", &net.layers[l].b);
  }
  return out;
}

size_t param_count(const UnfoldedModel& m) {
  size_t n = 0;
  auto& mm = const_cast<UnfoldedModel&>(m);
  for (const auto& [name, t] : named_params(mm)) n += t->size();
  return n;
}

size_t param_count(const UNetLite& net) {
  size_t n = 0;
  auto& nn = const_cast<UNetLite&>(net);
  for (const auto& [name, t] : named_params(nn)) n += t->size();
  return n;
}

}  // namespace pwc
