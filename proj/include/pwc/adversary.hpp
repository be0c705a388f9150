#pragma once

#include <cstdint>
#include <vector>

#include "pwc/tape.hpp"
#include "pwc/unfolded.hpp"

namespace pwc {

// Conditional patch discriminator over concatenated dB images:
// concat(3+1 channels) -> 3x3 s2 conv 32 -> s2 64 -> s2 128 -> 3x3 sigmoid 1.
// Every patch probability sees a receptive field smaller than the image; the
// output map is (H/8, W/8).
struct Discriminator {
  std::vector<ConvLayer> layers;
  double slope = 0.2;
};

Discriminator init_discriminator(uint64_t seed);
std::vector<std::pair<std::string, Tensor*>> named_params(Discriminator& d);
size_t param_count(const Discriminator& d);

// cond: (3,H,W) dB stack of the inputs, candidate: (1,H,W) dB image.
// H and W must be divisible by 8. Returns the patch probability map node.
int disc_forward(Tape& t, const Discriminator& d, int cond, int candidate, bool trainable,
                 TapeBindings* bindings);

// Discriminator objective: mean BCE over the combined real/fake patch batch,
// pushing real pairs to 1 and generated pairs to 0.
int disc_loss(Tape& t, int d_real, int d_fake);

// Generator adversarial term. Non-saturating form -log D(fake) by default;
// saturating=true uses the literal min-max term +log(1 - D(fake)).
int generator_adv_loss(Tape& t, int d_fake, bool saturating = false);

}  // namespace pwc
