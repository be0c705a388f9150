#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pwc/adversary.hpp"
#include "pwc/optimizer.hpp"
#include "pwc/phantom.hpp"
#include "pwc/unfolded.hpp"

namespace pwc {

struct LossWeights {
  double lambda1 = 1.0;    // adversarial
  double lambda2 = 1.0;    // pixel l1
  double lambda3 = 0.001;  // frame-to-frame
};

struct TrainConfig {
  int epochs_per_stage = 60;  // desk preset; the fidelity preset uses 1800
  int batch_size = 1;
  double lr = 1e-4;  // desk preset; the fidelity preset uses 1e-5
  double beta1 = 0.5, beta2 = 0.999, adam_eps = 1e-8;
  int folds = 5;
  uint64_t seed = 7;
  LossWeights w;
  QConfig q;
  // Compute the pixel and frame losses on raw RF instead of through the
  // differentiable dB transform (ablation knob). The adversary still sees dB
  // images, entered as constants.
  bool q_detach = false;
  bool saturating_adv = false;
  bool reinit_disc = false;
  bool fine_tune = false;  // joint pass over all folds after the greedy stages
  std::string checkpoint_dir;  // empty: keep checkpoints in memory only
  bool verbose = false;
};

struct EpochStats {
  int stage = 0;
  int epoch = 0;
  double loss_total = 0, loss_l1 = 0, loss_adv = 0, loss_ftf = 0;
  double val_mae = 0;
};

struct TrainResult {
  UnfoldedModel model;
  Discriminator disc;
  std::vector<EpochStats> history;
  double untrained_val_mae = 0.0;
  double final_val_mae = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct LossNodes {
  int total = -1, adv = -1, l1 = -1, ftf = -1;
  int xhat_t = -1;
};

// Full training objective for one sample:
// lambda1 * L_adv + lambda2 * mean|Q(x) - Q(xhat_t)| +
// lambda3 * mean(Q(xhat_prev) - Q(xhat_t))^2.
// Terms with zero weight are skipped; lambda3 > 0 without a previous frame is
// an error.
LossNodes build_total_loss(Tape& t, const UnfoldedModel& model, const Discriminator& disc,
                           const SamplePair& sample, const LossWeights& w, const QConfig& q,
                           bool q_detach, bool saturating, uint64_t dropout_seed, bool train_mode,
                           int trainable_fold, bool final_trainable, TapeBindings* bindings);

struct LossParts {
  double total = 0, adv = 0, l1 = 0, ftf = 0;
};

// Evaluate the objective without training (eval-mode dropout).
LossParts total_loss(const UnfoldedModel& model, const Discriminator& disc,
                     const SamplePair& sample, const LossWeights& w, const QConfig& q = {},
                     bool q_detach = false);

// Validation metric: mean over samples of mean|Q(pred) - Q(target)| rescaled
// from the dB range to [0,1].
double validation_mae(const UnfoldedModel& model, const Dataset& ds, Split split,
                      const QConfig& q = {});

// Greedy fold-by-fold training: stage k trains fold k, the final convolution
// and the discriminator while folds below k stay frozen (bit-identical).
// Frozen folds run in eval mode and their outputs are cached per stage. Each
// sample takes one discriminator step, then one generator step. Non-finite
// losses abort with the last epoch-end state restored.
TrainResult greedy_train(const Dataset& ds, const TrainConfig& cfg);

// The benchmark networks train with the same losses in a single stage.
struct BaselineResult {
  UNetLite net;
  Discriminator disc;
  std::vector<EpochStats> history;
  bool aborted = false;
  std::string abort_reason;
};
BaselineResult train_baseline(const Dataset& ds, const TrainConfig& cfg, bool with_skip);

// Checkpoint bundles: manifest metadata (kind, counts, architecture echo)
// plus every parameter tensor; the discriminator rides along.
void save_checkpoint(const std::string& path, UnfoldedModel& model, Discriminator* disc);
void save_checkpoint(const std::string& path, UNetLite& net, Discriminator* disc);
UnfoldedModel load_unfolded(const std::string& path, Discriminator* disc = nullptr);
UNetLite load_unet(const std::string& path, Discriminator* disc = nullptr);
std::string checkpoint_kind(const std::string& path);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace pwc
