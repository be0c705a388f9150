#include "pwc/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "pwc/io.hpp"
#include "pwc/rng.hpp"

namespace pwc {

namespace {

// 3-channel dB stack of the LR frames, per-channel max normalization
Tensor q_stack(const MeasurementSet& y, const QConfig& q) {
  Tensor out({y.count(), y.frames[0].height, y.frames[0].width});
  size_t off = 0;
  for (const auto& f : y.frames) {
    Image qi = q_transform(f, q);
    std::copy(qi.data.begin(), qi.data.end(), out.data() + off);
    off += qi.size();
  }
  return out;
}

std::vector<int> frame_leaves(Tape& t, const MeasurementSet& y) {
  std::vector<int> nodes;
  nodes.reserve(y.frames.size());
  for (const auto& f : y.frames) nodes.push_back(t.leaf_image(f));
  return nodes;
}

// gradients of duplicate leaf bindings (one parameter bound on two branches)
// summed in first-seen order
struct GradBag {
  std::vector<std::string> names;
  std::vector<Tensor> grads;

  void collect(const Tape& t, const TapeBindings& b) {
    for (const auto& [name, id] : b.leaves) {
      if (!t.needs_grad(id)) continue;
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        names.push_back(name);
        grads.push_back(t.grad(id));
      } else {
        Tensor& g = grads[static_cast<size_t>(it - names.begin())];
        const Tensor& add = t.grad(id);
        for (size_t i = 0; i < g.size(); ++i) g[i] += add[i];
      }
    }
  }
};

struct ParamRegistry {
  std::map<std::string, Tensor*> by_name;

  template <typename Net>
  explicit ParamRegistry(Net& net) {
    for (auto& [name, ptr] : named_params(net)) by_name[name] = ptr;
  }

  void apply(Adam& opt, const GradBag& bag) {
    std::vector<Tensor*> params;
    std::vector<const Tensor*> grads;
    for (size_t i = 0; i < bag.names.size(); ++i) {
      auto it = by_name.find(bag.names[i]);
      if (it == by_name.end()) throw std::logic_error("unknown parameter " + bag.names[i]);
      params.push_back(it->second);
      grads.push_back(&bag.grads[i]);
    }
    opt.step(params, grads);
  }
};

int adv_loss_for_generator(Tape& t, const Discriminator& disc, const Tensor& cond,
                           int q_fake_node, bool saturating) {
  int cond_leaf = t.leaf(cond);
  int d_fake = disc_forward(t, disc, cond_leaf, q_fake_node, false, nullptr);
  return generator_adv_loss(t, d_fake, saturating);
}

struct SampleRef {
  const MeasurementSet* inputs;
  const MeasurementSet* prev;
  const Image* target;
};

// Everything one training step needs besides the generator builder.
struct StepContext {
  const LossWeights* w;
  const QConfig* q;
  bool q_detach;
  bool saturating;
  Discriminator* disc;
  Adam* adam_d;
  ParamRegistry* disc_params;
  Adam* adam_g;
  ParamRegistry* gen_params;
};

// builds the generator output for one branch (0 = frame t, 1 = frame t-1)
using GenBuilder = std::function<int(Tape&, int branch, uint64_t dropout_seed, TapeBindings*)>;

LossParts train_step(const SampleRef& s, const GenBuilder& gen, const StepContext& ctx,
                     uint64_t dropout_seed) {
  const bool use_adv = ctx.w->lambda1 > 0.0;
  const bool use_l1 = ctx.w->lambda2 > 0.0;
  const bool use_ftf = ctx.w->lambda3 > 0.0;
  if (use_ftf && s.prev == nullptr)
    throw std::invalid_argument("train_step: frame-to-frame loss needs a previous frame");

  Tape g;
  TapeBindings gb;
  int xhat_t = gen(g, 0, substream(dropout_seed, "branch", 0), &gb);
  int q_t = ctx.q_detach ? -1 : build_q(g, xhat_t, *ctx.q, false);
  int xhat_p = -1, q_p = -1;
  if (use_ftf) {
    xhat_p = gen(g, 1, substream(dropout_seed, "branch", 1), &gb);
    if (!ctx.q_detach) q_p = build_q(g, xhat_p, *ctx.q, false);
  }

  Tensor cond;
  if (use_adv) {
    cond = q_stack(*s.inputs, *ctx.q);
    // discriminator step on the detached candidate, before the generator step
    Image fake_rf = g.value_image(xhat_t);
    Image q_fake = q_transform(fake_rf, *ctx.q);
    Image q_real = q_transform(*s.target, *ctx.q);
    Tape d;
    TapeBindings db;
    int cond_leaf = d.leaf(cond);
    int d_real = disc_forward(d, *ctx.disc, cond_leaf, d.leaf_image(q_real), true, &db);
    int d_fake = disc_forward(d, *ctx.disc, cond_leaf, d.leaf_image(q_fake), true, &db);
    int ld = disc_loss(d, d_real, d_fake);
    d.backward(ld);
    GradBag bag;
    bag.collect(d, db);
    ctx.disc_params->apply(*ctx.adam_d, bag);
  }

  // generator losses against the updated discriminator
  LossParts parts;
  std::vector<int> terms;
  std::vector<double> weights;
  if (use_adv) {
    int q_fake_node = ctx.q_detach ? g.leaf_image(q_transform(g.value_image(xhat_t), *ctx.q))
                                   : q_t;
    int adv = adv_loss_for_generator(g, *ctx.disc, cond, q_fake_node, ctx.saturating);
    parts.adv = g.value(adv)[0];
    terms.push_back(adv);
    weights.push_back(ctx.w->lambda1);
  }
  if (use_l1) {
    int l1;
    if (ctx.q_detach) {
      l1 = g.l1_mean(g.leaf_image(*s.target), xhat_t);
    } else {
      Tape scratch;
      Image q_target = q_transform(*s.target, *ctx.q);
      l1 = g.l1_mean(g.leaf_image(q_target), q_t);
      (void)scratch;
    }
    parts.l1 = g.value(l1)[0];
    terms.push_back(l1);
    weights.push_back(ctx.w->lambda2);
  }
  if (use_ftf) {
    int ftf = ctx.q_detach ? g.l2_mean(xhat_p, xhat_t) : g.l2_mean(q_p, q_t);
    parts.ftf = g.value(ftf)[0];
    terms.push_back(ftf);
    weights.push_back(ctx.w->lambda3);
  }
  if (terms.empty()) throw std::invalid_argument("train_step: every loss weight is zero");

  int total = g.scalar_mul(terms[0], weights[0]);
  for (size_t i = 1; i < terms.size(); ++i)
    total = g.add(total, g.scalar_mul(terms[i], weights[i]));
  parts.total = g.value(total)[0];

  if (std::isfinite(parts.total)) {
    g.backward(total);
    GradBag bag;
    bag.collect(g, gb);
    ctx.gen_params->apply(*ctx.adam_g, bag);
  }
  return parts;
}

Image eval_prefix(const UnfoldedModel& model, const MeasurementSet& y, int folds_to_apply) {
  Tape t;
  auto y_nodes = frame_leaves(t, y);
  int acc = y_nodes[0];
  for (size_t i = 1; i < y_nodes.size(); ++i) acc = t.add(acc, y_nodes[i]);
  int x = t.scalar_mul(acc, 1.0 / static_cast<double>(y_nodes.size()));
  for (int k = 0; k < folds_to_apply; ++k)
    x = fold_forward(t, model.folds[static_cast<size_t>(k)], y_nodes, x, model.identity_prox,
                     false, false, 0, "fold" + std::to_string(k), nullptr);
  return t.value_image(x);
}

Image predict_from_prefix(const UnfoldedModel& model, const MeasurementSet& y,
                          const Image& prefix, int fold_index) {
  Tape t;
  auto y_nodes = frame_leaves(t, y);
  ForwardOpts opts;
  opts.start_fold = fold_index;
  opts.x_init = t.leaf_image(prefix);
  int out = model_forward(t, model, y_nodes, opts, nullptr);
  return t.value_image(out);
}

double mae_db(const Image& qa, const Image& qb, const QConfig& q) {
  check_same_shape(qa, qb, "mae");
  double s = 0.0;
  for (size_t i = 0; i < qa.size(); ++i) s += std::fabs(qa.data[i] - qb.data[i]);
  return s / static_cast<double>(qa.size()) / (q.ceil_db - q.floor_db);
}

std::string prox_arch_echo() { return "1,1;1,8;8,16;16,32s2;32,32;40,16;16,32;32,1"; }
std::string disc_arch_echo() { return "4,32s2;32,64s2;64,128s2;128,1"; }

void add_params_to_bundle(Bundle& b, std::vector<std::pair<std::string, Tensor*>> params) {
  for (auto& [name, t] : params) b.tensors.emplace_back(name, *t);
}

void load_params_from_bundle(const Bundle& b,
                             std::vector<std::pair<std::string, Tensor*>> params) {
  for (auto& [name, t] : params) {
    const Tensor& stored = b.tensor(name);
    if (!(stored.dims() == t->dims()))
      throw FormatError("checkpoint: shape mismatch for " + name);
    *t = stored;
  }
}

}  // namespace

LossNodes build_total_loss(Tape& t, const UnfoldedModel& model, const Discriminator& disc,
                           const SamplePair& sample, const LossWeights& w, const QConfig& q,
                           bool q_detach, bool saturating, uint64_t dropout_seed, bool train_mode,
                           int trainable_fold, bool final_trainable, TapeBindings* bindings) {
  if (w.lambda3 > 0.0 && !sample.prev_inputs)
    throw std::invalid_argument("total_loss: frame-to-frame weight set but no previous frame");

  LossNodes out;
  ForwardOpts fo;
  fo.train_mode = train_mode;
  fo.trainable_fold = trainable_fold;
  fo.final_trainable = final_trainable;

  fo.dropout_seed = substream(dropout_seed, "branch", 0);
  out.xhat_t = model_forward(t, model, frame_leaves(t, sample.inputs), fo, bindings);
  int q_t = q_detach ? -1 : build_q(t, out.xhat_t, q, false);

  std::vector<int> terms;
  std::vector<double> weights;
  if (w.lambda1 > 0.0) {
    int q_fake = q_detach ? t.leaf_image(q_transform(t.value_image(out.xhat_t), q)) : q_t;
    int cond_leaf = t.leaf(q_stack(sample.inputs, q));
    int d_fake = disc_forward(t, disc, cond_leaf, q_fake, false, nullptr);
    out.adv = generator_adv_loss(t, d_fake, saturating);
    terms.push_back(out.adv);
    weights.push_back(w.lambda1);
  }
  if (w.lambda2 > 0.0) {
    out.l1 = q_detach ? t.l1_mean(t.leaf_image(sample.target), out.xhat_t)
                      : t.l1_mean(t.leaf_image(q_transform(sample.target, q)), q_t);
    terms.push_back(out.l1);
    weights.push_back(w.lambda2);
  }
  if (w.lambda3 > 0.0) {
    fo.dropout_seed = substream(dropout_seed, "branch", 1);
    int xhat_p = model_forward(t, model, frame_leaves(t, *sample.prev_inputs), fo, bindings);
    out.ftf = q_detach ? t.l2_mean(xhat_p, out.xhat_t)
                       : t.l2_mean(build_q(t, xhat_p, q, false), q_t);
    terms.push_back(out.ftf);
    weights.push_back(w.lambda3);
  }
  if (terms.empty()) throw std::invalid_argument("total_loss: every loss weight is zero");
  out.total = t.scalar_mul(terms[0], weights[0]);
  for (size_t i = 1; i < terms.size(); ++i)
    out.total = t.add(out.total, t.scalar_mul(terms[i], weights[i]));
  return out;
}

LossParts total_loss(const UnfoldedModel& model, const Discriminator& disc,
                     const SamplePair& sample, const LossWeights& w, const QConfig& q,
                     bool q_detach) {
  Tape t;
  LossNodes n = build_total_loss(t, model, disc, sample, w, q, q_detach, false, 0, false, -1,
                                 false, nullptr);
  LossParts p;
  p.total = t.value(n.total)[0];
  if (n.adv >= 0) p.adv = t.value(n.adv)[0];
  if (n.l1 >= 0) p.l1 = t.value(n.l1)[0];
  if (n.ftf >= 0) p.ftf = t.value(n.ftf)[0];
  return p;
}

double validation_mae(const UnfoldedModel& model, const Dataset& ds, Split split,
                      const QConfig& q) {
  const int n = ds.split_size(split);
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const SamplePair& s = ds.sample(split, i);
    Image pred = unfolded_infer(model, s.inputs);
    acc += mae_db(q_transform(pred, q), q_transform(s.target, q), q);
  }
  return acc / n;
}

TrainResult greedy_train(const Dataset& ds, const TrainConfig& cfg) {
  if (ds.split_size(Split::Train) == 0) throw std::invalid_argument("greedy_train: empty dataset");
  const Image& f0 = ds.samples[0].inputs.frames[0];
  const int n_train = ds.split_size(Split::Train);
  const int n_val = ds.split_size(Split::Val);

  TrainResult res;
  const double lmax = gram_lmax(ds.op, f0.height, f0.width);
  const double mu0 = lmax > 0.0 ? 0.9 / lmax : 0.5;
  res.model = init_unfolded(cfg.folds, ds.op.count(), mu0, cfg.seed);
  res.disc = init_discriminator(substream(cfg.seed, "init", 1));

  res.model.k_active = cfg.folds;
  res.untrained_val_mae = validation_mae(res.model, ds, Split::Val, cfg.q);

  AdamConfig ac{cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
  Adam adam_d(ac);
  ParamRegistry disc_reg(res.disc);
  ParamRegistry gen_reg(res.model);

  const int total_stages = cfg.folds + (cfg.fine_tune ? 1 : 0);
  for (int stage = 0; stage < total_stages; ++stage) {
    const bool fine_tune_stage = stage >= cfg.folds;
    const int fold_idx = fine_tune_stage ? kAllFolds : stage;
    res.model.k_active = fine_tune_stage ? cfg.folds : stage + 1;
    if (cfg.reinit_disc && stage > 0) {
      res.disc = init_discriminator(substream(cfg.seed, "init", 1 + static_cast<uint64_t>(stage)));
      disc_reg = ParamRegistry(res.disc);
      adam_d = Adam(ac);
    }
    Adam adam_g(ac);

    // frozen folds are fixed this stage: cache their output per sample/branch
    const int prefix_folds = fine_tune_stage ? 0 : stage;
    std::vector<Image> pre_t(static_cast<size_t>(n_train));
    std::vector<Image> pre_p(static_cast<size_t>(n_train));
    const bool use_ftf = cfg.w.lambda3 > 0.0;
#pragma omp parallel for schedule(dynamic) if (n_train > 3)
    for (int i = 0; i < n_train; ++i) {
      const SamplePair& s = ds.sample(Split::Train, i);
      pre_t[static_cast<size_t>(i)] = eval_prefix(res.model, s.inputs, prefix_folds);
      if (use_ftf)
        pre_p[static_cast<size_t>(i)] = eval_prefix(res.model, *s.prev_inputs, prefix_folds);
    }
    std::vector<Image> val_pre(static_cast<size_t>(n_val));
#pragma omp parallel for schedule(dynamic) if (n_val > 3)
    for (int i = 0; i < n_val; ++i)
      val_pre[static_cast<size_t>(i)] =
          eval_prefix(res.model, ds.sample(Split::Val, i).inputs, prefix_folds);

    StepContext ctx;
    ctx.w = &cfg.w;
    ctx.q = &cfg.q;
    ctx.q_detach = cfg.q_detach;
    ctx.saturating = cfg.saturating_adv;
    ctx.disc = &res.disc;
    ctx.adam_d = &adam_d;
    ctx.disc_params = &disc_reg;
    ctx.adam_g = &adam_g;
    ctx.gen_params = &gen_reg;

    // epoch-end snapshot for the non-finite abort path
    UnfoldedModel snap_model = res.model;
    Discriminator snap_disc = res.disc;

    std::vector<int> order(static_cast<size_t>(n_train));
    for (int i = 0; i < n_train; ++i) order[static_cast<size_t>(i)] = i;

    for (int epoch = 0; epoch < cfg.epochs_per_stage; ++epoch) {
      Rng shuffle_rng(substream(cfg.seed, "shuffle", static_cast<uint64_t>(stage),
                                static_cast<uint64_t>(epoch)));
      shuffle_rng.shuffle(order);

      double sum_total = 0, sum_adv = 0, sum_l1 = 0, sum_ftf = 0;
      bool bad = false;
      for (int pos = 0; pos < n_train && !bad; ++pos) {
        const int i = order[static_cast<size_t>(pos)];
        const SamplePair& s = ds.sample(Split::Train, i);
        SampleRef ref{&s.inputs, s.prev_inputs ? &*s.prev_inputs : nullptr, &s.target};

        GenBuilder gen = [&](Tape& t, int branch, uint64_t dropout_seed,
                             TapeBindings* bindings) {
          const MeasurementSet& y = branch == 0 ? s.inputs : *s.prev_inputs;
          const Image& prefix = branch == 0 ? pre_t[static_cast<size_t>(i)]
                                            : pre_p[static_cast<size_t>(i)];
          ForwardOpts fo;
          fo.train_mode = true;
          fo.dropout_seed = dropout_seed;
          fo.trainable_fold = fold_idx;
          fo.final_trainable = true;
          fo.start_fold = prefix_folds;
          fo.x_init = t.leaf_image(prefix);
          return model_forward(t, res.model, frame_leaves(t, y), fo, bindings);
        };

        LossParts parts =
            train_step(ref, gen, ctx,
                       substream(cfg.seed, "dropout", static_cast<uint64_t>(stage),
                                 static_cast<uint64_t>(epoch), static_cast<uint64_t>(i)));
        if (!std::isfinite(parts.total)) {
          res.model = snap_model;
          res.disc = snap_disc;
          res.aborted = true;
          res.abort_reason = "non-finite loss at stage " + std::to_string(stage) + " epoch " +
                             std::to_string(epoch);
          bad = true;
          break;
        }
        sum_total += parts.total;
        sum_adv += parts.adv;
        sum_l1 += parts.l1;
        sum_ftf += parts.ftf;
      }
      if (res.aborted) break;

      double val_acc = 0.0;
      for (int i = 0; i < n_val; ++i) {
        const SamplePair& s = ds.sample(Split::Val, i);
        Image pred = fine_tune_stage
                         ? unfolded_infer(res.model, s.inputs)
                         : predict_from_prefix(res.model, s.inputs,
                                               val_pre[static_cast<size_t>(i)], prefix_folds);
        val_acc += mae_db(q_transform(pred, cfg.q), q_transform(s.target, cfg.q), cfg.q);
      }
      EpochStats es;
      es.stage = stage;
      es.epoch = epoch;
      es.loss_total = sum_total / n_train;
      es.loss_adv = sum_adv / n_train;
      es.loss_l1 = sum_l1 / n_train;
      es.loss_ftf = sum_ftf / n_train;
      es.val_mae = n_val > 0 ? val_acc / n_val : 0.0;
      res.history.push_back(es);
      if (cfg.verbose)
        std::fprintf(stderr, "stage %d epoch %3d  loss %.6f  l1 %.6f adv %.6f ftf %.6g  val %.5f\n",
                     stage, epoch, es.loss_total, es.loss_l1, es.loss_adv, es.loss_ftf, es.val_mae);
      snap_model = res.model;
      snap_disc = res.disc;
    }
    if (res.aborted) break;
    if (!cfg.checkpoint_dir.empty())
      save_checkpoint(cfg.checkpoint_dir + "/stage" + std::to_string(stage) + ".pwcb", res.model,
                      &res.disc);
  }

  res.final_val_mae = res.history.empty() ? res.untrained_val_mae : res.history.back().val_mae;
  if (!cfg.checkpoint_dir.empty()) save_checkpoint(cfg.checkpoint_dir + "/final.pwcb", res.model, &res.disc);
  return res;
}

BaselineResult train_baseline(const Dataset& ds, const TrainConfig& cfg, bool with_skip) {
  if (ds.split_size(Split::Train) == 0)
    throw std::invalid_argument("train_baseline: empty dataset");
  const int n_train = ds.split_size(Split::Train);
  const int n_val = ds.split_size(Split::Val);

  BaselineResult res;
  res.net = init_unet_lite(with_skip, cfg.seed);
  res.disc = init_discriminator(substream(cfg.seed, "init", 1));

  AdamConfig ac{cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
  Adam adam_d(ac), adam_g(ac);
  ParamRegistry disc_reg(res.disc);
  ParamRegistry gen_reg(res.net);

  StepContext ctx;
  ctx.w = &cfg.w;
  ctx.q = &cfg.q;
  ctx.q_detach = cfg.q_detach;
  ctx.saturating = cfg.saturating_adv;
  ctx.disc = &res.disc;
  ctx.adam_d = &adam_d;
  ctx.disc_params = &disc_reg;
  ctx.adam_g = &adam_g;
  ctx.gen_params = &gen_reg;

  UNetLite snap_net = res.net;
  Discriminator snap_disc = res.disc;

  std::vector<int> order(static_cast<size_t>(n_train));
  for (int i = 0; i < n_train; ++i) order[static_cast<size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.epochs_per_stage; ++epoch) {
    Rng shuffle_rng(substream(cfg.seed, "shuffle", 0, static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    double sum_total = 0, sum_adv = 0, sum_l1 = 0, sum_ftf = 0;
    for (int pos = 0; pos < n_train; ++pos) {
      const int i = order[static_cast<size_t>(pos)];
      const SamplePair& s = ds.sample(Split::Train, i);
      SampleRef ref{&s.inputs, s.prev_inputs ? &*s.prev_inputs : nullptr, &s.target};
      GenBuilder gen = [&](Tape& t, int branch, uint64_t dropout_seed, TapeBindings* bindings) {
        const MeasurementSet& y = branch == 0 ? s.inputs : *s.prev_inputs;
        ForwardOpts fo;
        fo.train_mode = true;
        fo.dropout_seed = dropout_seed;
        fo.trainable_fold = 0;
        return unet_forward(t, res.net, frame_leaves(t, y), fo, bindings);
      };
      LossParts parts = train_step(ref, gen, ctx,
                                   substream(cfg.seed, "dropout", 0,
                                             static_cast<uint64_t>(epoch),
                                             static_cast<uint64_t>(i)));
      if (!std::isfinite(parts.total)) {
        res.net = snap_net;
        res.disc = snap_disc;
        res.aborted = true;
        res.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
        break;
      }
      sum_total += parts.total;
      sum_adv += parts.adv;
      sum_l1 += parts.l1;
      sum_ftf += parts.ftf;
    }
    if (res.aborted) break;

    double val_acc = 0.0;
    for (int i = 0; i < n_val; ++i) {
      const SamplePair& s = ds.sample(Split::Val, i);
      Image pred = unet_infer(res.net, s.inputs);
      val_acc += mae_db(q_transform(pred, cfg.q), q_transform(s.target, cfg.q), cfg.q);
    }
    EpochStats es;
    es.stage = 0;
    es.epoch = epoch;
    es.loss_total = sum_total / n_train;
    es.loss_adv = sum_adv / n_train;
    es.loss_l1 = sum_l1 / n_train;
    es.loss_ftf = sum_ftf / n_train;
    es.val_mae = n_val > 0 ? val_acc / n_val : 0.0;
    res.history.push_back(es);
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %3d  loss %.6f  val %.5f\n", epoch, es.loss_total, es.val_mae);
    snap_net = res.net;
    snap_disc = res.disc;
  }
  return res;
}

void save_checkpoint(const std::string& path, UnfoldedModel& model, Discriminator* disc) {
  Bundle b;
  b.meta["kind"] = "unfolded";
  b.meta["folds"] = std::to_string(model.fold_count());
  b.meta["k_active"] = std::to_string(model.k_active);
  b.meta["frames"] = std::to_string(model.frame_count());
  b.meta["prox_arch"] = prox_arch_echo();
  if (disc) b.meta["disc_arch"] = disc_arch_echo();
  add_params_to_bundle(b, named_params(model));
  if (disc) add_params_to_bundle(b, named_params(*disc));
  write_bundle(path, b);
}

void save_checkpoint(const std::string& path, UNetLite& net, Discriminator* disc) {
  Bundle b;
  b.meta["kind"] = "unet_lite";
  b.meta["with_skip"] = net.with_skip ? "1" : "0";
  if (disc) b.meta["disc_arch"] = disc_arch_echo();
  add_params_to_bundle(b, named_params(net));
  if (disc) add_params_to_bundle(b, named_params(*disc));
  write_bundle(path, b);
}

UnfoldedModel load_unfolded(const std::string& path, Discriminator* disc) {
  Bundle b = read_bundle(path);
  if (b.meta_at("kind") != "unfolded") throw FormatError("checkpoint: not an unfolded model");
  if (b.meta_at("prox_arch") != prox_arch_echo())
    throw FormatError("checkpoint: proximal architecture mismatch");
  const int folds = std::stoi(b.meta_at("folds"));
  const int frames = std::stoi(b.meta_at("frames"));
  UnfoldedModel m = init_unfolded(folds, frames, 0.5, 0);
  m.k_active = std::stoi(b.meta_at("k_active"));
  load_params_from_bundle(b, named_params(m));
  if (disc) {
    *disc = init_discriminator(0);
    load_params_from_bundle(b, named_params(*disc));
  }
  return m;
}

UNetLite load_unet(const std::string& path, Discriminator* disc) {
  Bundle b = read_bundle(path);
  if (b.meta_at("kind") != "unet_lite") throw FormatError("checkpoint: not a unet_lite model");
  UNetLite net = init_unet_lite(b.meta_at("with_skip") == "1", 0);
  load_params_from_bundle(b, named_params(net));
  if (disc) {
    *disc = init_discriminator(0);
    load_params_from_bundle(b, named_params(*disc));
  }
  return net;
}

std::string checkpoint_kind(const std::string& path) {
  return read_bundle(path).meta_at("kind");
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : history)
    rows.push_back({std::to_string(e.stage), std::to_string(e.epoch), csv_num(e.loss_total),
                    csv_num(e.loss_l1), csv_num(e.loss_adv), csv_num(e.loss_ftf),
                    csv_num(e.val_mae)});
  write_csv(path, {"stage", "epoch", "loss_total", "loss_l1", "loss_adv", "loss_ftf", "val_mae"},
            rows);
}

}  // namespace pwc
