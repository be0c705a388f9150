#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pwc/phantom.hpp"

using namespace pwc;

namespace {

SimConfig tiny_cfg() {
  SimConfig cfg;
  cfg.height = 32;
  cfg.width = 16;
  cfg.n_points = 5;
  cfg.n_speckle = 40;
  cfg.n_train = 4;
  cfg.n_val = 2;
  cfg.n_test = 2;
  cfg.psf_size = 7;
  return cfg;
}

}  // namespace

TEST_CASE("empty phantom renders to zero") {
  Phantom ph;
  ph.height = 16;
  ph.width = 8;
  PsfKernel psf = make_psf(0, 1, 2, 8, 5);
  Image img = render_hr(ph, psf);
  for (double v : img.data) CHECK(v == 0.0);
}

TEST_CASE("integer-position scatterer with identity PSF is a single pixel") {
  Phantom ph;
  ph.height = 16;
  ph.width = 8;
  ph.scatterers = {{5.0, 3.0, 2.0}};
  PsfKernel id;
  id.taps = Image(1, 1);
  id.taps.at(0, 0) = 1.0;
  Image img = render_hr(ph, id);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 8; ++c) CHECK(img.at(r, c) == (r == 5 && c == 3 ? 2.0 : 0.0));
}

TEST_CASE("half-integer column splits bilinearly") {
  Phantom ph;
  ph.height = 8;
  ph.width = 8;
  ph.scatterers = {{2.0, 3.5, 1.0}};
  Image s = splat(ph);
  CHECK(s.at(2, 3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.at(2, 4) == doctest::Approx(0.5).epsilon(1e-15));
  double total = 0.0;
  for (double v : s.data) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("out-of-bounds scatterers are rejected") {
  Phantom ph;
  ph.height = 8;
  ph.width = 8;
  ph.scatterers = {{9.0, 3.0, 1.0}};
  CHECK_THROWS_AS((void)splat(ph), std::invalid_argument);
}

TEST_CASE("datasets honor the configured split sizes and the point count") {
  SimConfig cfg = tiny_cfg();
  Dataset ds = make_dataset(cfg, 5);
  CHECK(ds.split_size(Split::Train) == 4);
  CHECK(ds.split_size(Split::Val) == 2);
  CHECK(ds.split_size(Split::Test) == 2);
  CHECK(static_cast<int>(ds.samples.size()) == cfg.total());
  CHECK(ds.op.count() == 3);
  for (const auto& s : ds.samples) {
    CHECK(s.inputs.count() == 3);
    CHECK(s.target.height == cfg.height);
    REQUIRE(s.prev_inputs.has_value());
    CHECK(s.prev_inputs->count() == 3);
  }
}

TEST_CASE("default split sizes mirror the source protocol at 1/5 scale") {
  SimConfig cfg;
  CHECK(cfg.n_train == 93);
  CHECK(cfg.n_val == 12);
  CHECK(cfg.n_test == 9);
  CHECK(cfg.n_points == 20);
}

TEST_CASE("same seed gives bit-identical datasets") {
  SimConfig cfg = tiny_cfg();
  Dataset a = make_dataset(cfg, 99);
  Dataset b = make_dataset(cfg, 99);
  for (size_t i = 0; i < a.samples.size(); ++i) {
    for (int m = 0; m < 3; ++m)
      for (size_t j = 0; j < a.samples[i].inputs.frames[m].size(); ++j) {
        CHECK(a.samples[i].inputs.frames[m].data[j] == b.samples[i].inputs.frames[m].data[j]);
        CHECK(a.samples[i].prev_inputs->frames[m].data[j] ==
              b.samples[i].prev_inputs->frames[m].data[j]);
      }
    for (size_t j = 0; j < a.samples[i].target.size(); ++j)
      CHECK(a.samples[i].target.data[j] == b.samples[i].target.data[j]);
  }
  Dataset c = make_dataset(cfg, 100);
  bool differs = false;
  for (size_t j = 0; j < a.samples[0].target.size() && !differs; ++j)
    differs = a.samples[0].target.data[j] != c.samples[0].target.data[j];
  CHECK(differs);
}

TEST_CASE("zero motion and zero noise make the previous frame identical") {
  SimConfig cfg = tiny_cfg();
  cfg.motion_sigma = 0.0;
  cfg.noise_sigma = 0.0;
  Dataset ds = make_dataset(cfg, 7);
  for (const auto& s : ds.samples)
    for (int m = 0; m < 3; ++m)
      for (size_t j = 0; j < s.inputs.frames[m].size(); ++j)
        CHECK(s.inputs.frames[m].data[j] == s.prev_inputs->frames[m].data[j]);
}

TEST_CASE("with noise off and identical LR/HR PSFs every frame equals the target") {
  SimConfig cfg = tiny_cfg();
  cfg.noise_sigma = 0.0;
  cfg.angles_deg = {0.0};
  cfg.psf_sigma_axial = cfg.hr_sigma_axial = 1.0;
  cfg.psf_sigma_lateral = cfg.hr_sigma_lateral = 2.0;
  cfg.hr_wavelength_ratio = 1.0;
  Dataset ds = make_dataset(cfg, 3);
  for (const auto& s : ds.samples)
    for (size_t j = 0; j < s.target.size(); ++j)
      CHECK(s.inputs.frames[0].data[j] == s.target.data[j]);
}

TEST_CASE("frame pairs can be disabled") {
  SimConfig cfg = tiny_cfg();
  cfg.frame_pairs = false;
  Dataset ds = make_dataset(cfg, 5);
  for (const auto& s : ds.samples) CHECK_FALSE(s.prev_inputs.has_value());
}
