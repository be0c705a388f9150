#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pwc/acquisition.hpp"
#include "pwc/image.hpp"

namespace pwc {

struct Scatterer {
  double row = 0.0;
  double col = 0.0;
  double amplitude = 0.0;
};

struct Phantom {
  int height = 0;
  int width = 0;
  std::vector<Scatterer> scatterers;

  void validate() const;
};

// In-silico geometry and dataset sizes. Defaults are the desk-scale preset:
// 256 x 64 grid, 93/12/9 train/val/test pairs, 20 point scatterers per
// phantom, speckle on a quarter of the samples.
struct SimConfig {
  int height = 256;
  int width = 64;
  int n_points = 20;
  double amp_lo = 0.5, amp_hi = 1.0;
  double speckle_fraction = 0.25;
  int n_speckle = 600;
  double speckle_amp_hi = 0.05;
  double motion_sigma = 0.5;   // samples, per-scatterer inter-frame drift
  double noise_sigma = 0.005;  // RF units, added per LR frame
  int n_train = 93, n_val = 12, n_test = 9;
  bool frame_pairs = true;

  // LR acquisition PSFs (one per steering angle) and the HR target PSF. The
  // LR/HR frequency gap is modeled as a carrier wavelength ratio.
  std::vector<double> angles_deg{-10.2, 0.0, 10.2};
  double psf_sigma_axial = 1.0;
  double psf_sigma_lateral = 4.0;
  double psf_wavelength = 8.0;
  int psf_size = 17;
  double hr_sigma_axial = 1.0;
  double hr_sigma_lateral = 1.0;
  double hr_wavelength_ratio = 3.0;

  int total() const { return n_train + n_val + n_test; }
  void validate() const;
};

// One training pair: M low-resolution frames, the high-resolution target and,
// in frame-pair mode, the LR frames of the preceding (slightly moved) frame.
struct SamplePair {
  MeasurementSet inputs;
  Image target;
  std::optional<MeasurementSet> prev_inputs;
};

enum class Split { Train, Val, Test };

struct Dataset {
  SimConfig cfg;
  MeasurementOperator op;  // the LR acquisition operator
  std::vector<SamplePair> samples;

  // Samples are ordered train, then val, then test.
  std::pair<int, int> split_range(Split s) const;
  const SamplePair& sample(Split s, int i) const;
  int split_size(Split s) const;
};

// Bilinear splat of the scatterers onto the grid (no PSF).
Image splat(const Phantom& ph);

// HR ground truth: splat convolved with the HR PSF.
Image render_hr(const Phantom& ph, const PsfKernel& hr_psf);

MeasurementOperator lr_operator(const SimConfig& cfg);
PsfKernel hr_psf(const SimConfig& cfg);

// Fresh phantom per sample: n_points uniform scatterers with amplitudes in
// [amp_lo, amp_hi], plus low-reflectivity speckle on a random subset of the
// samples. LR frames are rendered straight from the phantom through the
// angle-steered LR PSFs; the previous frame displaces every scatterer by
// N(0, motion_sigma) and uses an independent noise stream. Per-sample
// substreams make generation order irrelevant.
Dataset make_dataset(const SimConfig& cfg, uint64_t seed);

}  // namespace pwc
