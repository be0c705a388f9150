#include "pwc/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pwc/rng.hpp"

namespace pwc {

void Phantom::validate() const {
  for (const auto& s : scatterers) {
    if (s.row < 0.0 || s.row >= height || s.col < 0.0 || s.col >= width)
      throw std::invalid_argument("Phantom: scatterer out of bounds");
    if (!std::isfinite(s.amplitude)) throw std::invalid_argument("Phantom: non-finite amplitude");
  }
}

void SimConfig::validate() const {
  if (height <= 0 || width <= 0) throw std::invalid_argument("SimConfig: bad grid");
  if (n_points <= 0) throw std::invalid_argument("SimConfig: n_points must be positive");
  if (n_train <= 0 || n_val < 0 || n_test < 0)
    throw std::invalid_argument("SimConfig: bad split sizes");
  if (angles_deg.empty()) throw std::invalid_argument("SimConfig: no steering angles");
  if (motion_sigma < 0.0 || noise_sigma < 0.0)
    throw std::invalid_argument("SimConfig: negative sigma");
}

std::pair<int, int> Dataset::split_range(Split s) const {
  switch (s) {
    case Split::Train: return {0, cfg.n_train};
    case Split::Val: return {cfg.n_train, cfg.n_train + cfg.n_val};
    case Split::Test: return {cfg.n_train + cfg.n_val, cfg.total()};
  }
  return {0, 0};
}

const SamplePair& Dataset::sample(Split s, int i) const {
  auto [lo, hi] = split_range(s);
  if (i < 0 || lo + i >= hi) throw std::out_of_range("Dataset::sample: index out of split");
  return samples[static_cast<size_t>(lo + i)];
}

int Dataset::split_size(Split s) const {
  auto [lo, hi] = split_range(s);
  return hi - lo;
}

Image splat(const Phantom& ph) {
  ph.validate();
  Image out(ph.height, ph.width);
  for (const auto& s : ph.scatterers) {
    const int r0 = static_cast<int>(std::floor(s.row));
    const int c0 = static_cast<int>(std::floor(s.col));
    const double fr = s.row - r0;
    const double fc = s.col - c0;
    const double w[2][2] = {{(1 - fr) * (1 - fc), (1 - fr) * fc}, {fr * (1 - fc), fr * fc}};
    for (int dr = 0; dr < 2; ++dr) {
      for (int dc = 0; dc < 2; ++dc) {
        const int r = r0 + dr, c = c0 + dc;
        if (r < 0 || r >= ph.height || c < 0 || c >= ph.width) continue;
        out.at(r, c) += s.amplitude * w[dr][dc];
      }
    }
  }
  return out;
}

Image render_hr(const Phantom& ph, const PsfKernel& psf) {
  return conv2d_same(splat(ph), psf.taps);
}

MeasurementOperator lr_operator(const SimConfig& cfg) {
  MeasurementOperator op;
  op.noise_sigma = cfg.noise_sigma;
  for (double a : cfg.angles_deg)
    op.psfs.push_back(
        make_psf(a, cfg.psf_sigma_axial, cfg.psf_sigma_lateral, cfg.psf_wavelength, cfg.psf_size));
  return op;
}

PsfKernel hr_psf(const SimConfig& cfg) {
  return make_psf(0.0, cfg.hr_sigma_axial, cfg.hr_sigma_lateral,
                  cfg.psf_wavelength / cfg.hr_wavelength_ratio, cfg.psf_size);
}

namespace {

Phantom random_phantom(const SimConfig& cfg, Rng& rng) {
  Phantom ph;
  ph.height = cfg.height;
  ph.width = cfg.width;
  ph.scatterers.reserve(static_cast<size_t>(cfg.n_points));
  for (int i = 0; i < cfg.n_points; ++i) {
    Scatterer s;
    s.row = rng.uniform(0.0, cfg.height - 1.0);
    s.col = rng.uniform(0.0, cfg.width - 1.0);
    s.amplitude = rng.uniform(cfg.amp_lo, cfg.amp_hi);
    ph.scatterers.push_back(s);
  }
  return ph;
}

void add_speckle(Phantom& ph, const SimConfig& cfg, Rng& rng) {
  ph.scatterers.reserve(ph.scatterers.size() + static_cast<size_t>(cfg.n_speckle));
  for (int i = 0; i < cfg.n_speckle; ++i) {
    Scatterer s;
    s.row = rng.uniform(0.0, cfg.height - 1.0);
    s.col = rng.uniform(0.0, cfg.width - 1.0);
    s.amplitude = rng.uniform(0.0, cfg.speckle_amp_hi);
    ph.scatterers.push_back(s);
  }
}

Phantom displaced(const Phantom& ph, double motion_sigma, Rng& rng) {
  Phantom out = ph;
  for (auto& s : out.scatterers) {
    s.row += motion_sigma * rng.gaussian();
    s.col += motion_sigma * rng.gaussian();
    s.row = std::clamp(s.row, 0.0, ph.height - 1.0);
    s.col = std::clamp(s.col, 0.0, ph.width - 1.0);
  }
  return out;
}

MeasurementSet render_lr(const Phantom& ph, const MeasurementOperator& op, uint64_t noise_seed) {
  return forward(op, splat(ph), noise_seed);
}

}  // namespace

Dataset make_dataset(const SimConfig& cfg, uint64_t seed) {
  cfg.validate();
  Dataset ds;
  ds.cfg = cfg;
  ds.op = lr_operator(cfg);
  const PsfKernel hr = hr_psf(cfg);
  const int n = cfg.total();
  ds.samples.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Rng rng(substream(seed, "sim", static_cast<uint64_t>(i)));
    Phantom ph = random_phantom(cfg, rng);
    if (rng.uniform() < cfg.speckle_fraction) add_speckle(ph, cfg, rng);
    SamplePair sp;
    sp.target = render_hr(ph, hr);
    sp.inputs = render_lr(ph, ds.op, substream(seed, "noise", static_cast<uint64_t>(i), 0));
    if (cfg.frame_pairs) {
      Phantom prev = displaced(ph, cfg.motion_sigma, rng);
      sp.prev_inputs = render_lr(prev, ds.op, substream(seed, "noise", static_cast<uint64_t>(i), 1));
    }
    ds.samples[static_cast<size_t>(i)] = std::move(sp);
  }
  return ds;
}

}  // namespace pwc
