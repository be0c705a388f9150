#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pwc/image.hpp"
#include "pwc/signal.hpp"

namespace pwc {

// Point spread function of one steered plane-wave acquisition: a rotated
// anisotropic Gaussian with an axial cosine carrier, L1-normalized.
struct PsfKernel {
  double angle_deg = 0.0;
  double sigma_axial = 1.0;       // samples
  double sigma_lateral = 4.0;     // samples
  double carrier_wavelength = 8;  // samples
  Image taps;                     // odd dims
};

PsfKernel make_psf(double angle_deg, double sigma_axial, double sigma_lateral,
                   double carrier_wavelength, int size);

// One beamformed-RF frame per steered transmit.
struct MeasurementSet {
  std::vector<Image> frames;
  std::vector<double> angles_deg;

  int count() const { return static_cast<int>(frames.size()); }
  void validate() const;
};

// The linear measurement model: frame m is the image filtered by psf m, plus
// zero-mean Gaussian noise with diagonal covariance (independent per frame).
struct MeasurementOperator {
  std::vector<PsfKernel> psfs;
  double noise_sigma = 0.0;  // RF amplitude units

  int count() const { return static_cast<int>(psfs.size()); }
  void validate() const;
};

// frames[m] = conv2d_same(x, psfs[m].taps) + noise_sigma * gaussian(seed, m).
// Noise streams are derived from (seed, m) so frames are independent.
MeasurementSet forward(const MeasurementOperator& op, const Image& x,
                       std::optional<uint64_t> rng_seed = std::nullopt);

// Adjoint of the noise-free forward map: sum over frames of correlation with
// the flipped kernel. Satisfies <forward(x), y> == <x, adjoint(y)>.
Image adjoint(const MeasurementOperator& op, const MeasurementSet& y);

// Coherent compounding baseline: plain mean of the frames.
Image compound(const MeasurementSet& y);

// Largest eigenvalue of A^T A estimated by power iteration on images of the
// given size. Rayleigh-quotient estimate; used to pick proximal step sizes.
double gram_lmax(const MeasurementOperator& op, int height, int width, int max_iters = 200,
                 double tol = 1e-12, uint64_t seed = 0x5eed);

// Operator norm ||A|| = sqrt(gram_lmax).
double operator_norm(const MeasurementOperator& op, int height, int width);

}  // namespace pwc
