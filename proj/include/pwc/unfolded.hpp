#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwc/acquisition.hpp"
#include "pwc/tape.hpp"

namespace pwc {

struct ConvLayer {
  Tensor w;  // (Co, Ci, 3, 3)
  Tensor b;  // (Co)
  int stride = 1;
};

// Learned proximal operator: a small U-Net with a stride-2 bottleneck, a
// dropout stage and one skip concat, all 3x3 kernels with LeakyReLU. Channel
// plan including the single-channel input adapter:
// 1->1, 1->8, 8->16, 16->32(s2), 32->32, [dropout, upsample, concat 8+32],
// 40->16, 16->32, 32->1.
struct ProxNet {
  std::vector<ConvLayer> layers;  // the 8 convolutions above, in order
  double dropout_rate = 0.3;
  double slope = 0.2;
};

// One unfolded iteration: per-frame data-consistency kernels w_m, the
// state kernel v and the proximal subnetwork.
struct Fold {
  std::vector<Tensor> w_kernels;  // M tensors, each (1,1,3,3)
  Tensor v_kernel;                // (1,1,3,3)
  ProxNet prox;
};

struct UnfoldedModel {
  std::vector<Fold> folds;
  Tensor final_w;  // (1,1,3,3), applied after the last active fold
  Tensor final_b;  // (1)
  int k_active = 1;
  // Bypass the proximal subnetwork (identity); only for equivalence checks
  // against the classical solver.
  bool identity_prox = false;

  int fold_count() const { return static_cast<int>(folds.size()); }
  int frame_count() const {
    return folds.empty() ? 0 : static_cast<int>(folds[0].w_kernels.size());
  }
};

// The lightweight U-Net baseline. Channel plan: stack(3) -> 16 -> 32 ->
// 64(s2) -> 64 -> [upsample] -> 64 -> [dropout, concat 64+32] -> 60 -> 16 -> 1.
// with_skip=false drops the concat (the plain-CNN baseline approximation).
struct UNetLite {
  std::vector<ConvLayer> layers;
  bool with_skip = true;
  double dropout_rate = 0.3;
  double slope = 0.2;
};

// Parameter leaves created while building a network graph, with stable names
// matching named_params(); the trainer pairs them up for optimizer steps.
struct TapeBindings {
  std::vector<std::pair<std::string, int>> leaves;
};

struct ForwardOpts {
  bool train_mode = false;
  uint64_t dropout_seed = 0;
  int trainable_fold = -1;  // index, or kAllFolds for joint fine-tuning
  bool final_trainable = false;
  int start_fold = 0;  // folds below this come precomputed through x_init
  int x_init = -1;     // node id of the cached fold input when start_fold > 0
};
inline constexpr int kAllFolds = -2;

// P(sum_m w_m * y_m + v * x_prev) for one fold. y_nodes are (1,H,W) nodes.
int fold_forward(Tape& t, const Fold& fold, const std::vector<int>& y_nodes, int x_prev,
                 bool identity_prox, bool trainable, bool train_mode, uint64_t dropout_seed,
                 const std::string& name_prefix, TapeBindings* bindings);

// Compound initializer, k_active folds, then the shared final convolution.
// Rejects odd input dims (the stride-2 stage plus 2x upsample needs even).
int model_forward(Tape& t, const UnfoldedModel& m, const std::vector<int>& y_nodes,
                  const ForwardOpts& opts, TapeBindings* bindings);

// Frames stacked as channels through the baseline. Same even-dims contract.
int unet_forward(Tape& t, const UNetLite& net, const std::vector<int>& y_nodes,
                 const ForwardOpts& opts, TapeBindings* bindings);

Image unfolded_infer(const UnfoldedModel& m, const MeasurementSet& y);
Image unet_infer(const UNetLite& net, const MeasurementSet& y);

// Initializers. w_m = (mu0/M) * delta and v = (1 - mu0) * delta make the
// first untrained pass reproduce compounding plus one gradient step; prox
// conv weights are uniform +-sqrt(6/fan_in) scaled for the LeakyReLU gain,
// biases zero; the final conv starts as the identity.
UnfoldedModel init_unfolded(int k_folds, int m_frames, double mu0, uint64_t seed);
UNetLite init_unet_lite(bool with_skip, uint64_t seed);

std::vector<std::pair<std::string, Tensor*>> named_params(UnfoldedModel& m);
std::vector<std::pair<std::string, Tensor*>> named_params(UNetLite& net);

size_t param_count(const UnfoldedModel& m);
size_t param_count(const UNetLite& net);

}  // namespace pwc
