#include "pwc/acquisition.hpp"

#include <cmath>
#include <stdexcept>

#include "pwc/rng.hpp"

namespace pwc {

PsfKernel make_psf(double angle_deg, double sigma_axial, double sigma_lateral,
                   double carrier_wavelength, int size) {
  if (size % 2 == 0) throw std::invalid_argument("make_psf: size must be odd");
  if (size <= 0) throw std::invalid_argument("make_psf: size must be positive");
  if (sigma_axial <= 0.0 || sigma_lateral <= 0.0)
    throw std::invalid_argument("make_psf: sigmas must be positive");
  if (carrier_wavelength <= 0.0)
    throw std::invalid_argument("make_psf: carrier wavelength must be positive");

  PsfKernel k;
  k.angle_deg = angle_deg;
  k.sigma_axial = sigma_axial;
  k.sigma_lateral = sigma_lateral;
  k.carrier_wavelength = carrier_wavelength;
  k.taps = Image(size, size);

  const double th = angle_deg * M_PI / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  const int r0 = size / 2;
  double l1 = 0.0;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double z = r - r0;  // axial offset
      const double x = c - r0;  // lateral offset
      // sample the unrotated pattern at the back-rotated coordinates
      const double zr = z * ct + x * st;
      const double xr = -z * st + x * ct;
      const double g = std::exp(-(zr * zr / (2.0 * sigma_axial * sigma_axial) +
                                  xr * xr / (2.0 * sigma_lateral * sigma_lateral)));
      const double v = g * std::cos(2.0 * M_PI * zr / carrier_wavelength);
      k.taps.at(r, c) = v;
      l1 += std::fabs(v);
    }
  }
  if (l1 <= 0.0) throw std::invalid_argument("make_psf: degenerate kernel");
  for (double& v : k.taps.data) v /= l1;
  return k;
}

void MeasurementSet::validate() const {
  if (frames.empty()) throw std::invalid_argument("MeasurementSet: no frames");
  if (frames.size() != angles_deg.size())
    throw std::invalid_argument("MeasurementSet: frame/angle count mismatch");
  for (const auto& f : frames)
    if (!f.same_shape(frames[0]))
      throw std::invalid_argument("MeasurementSet: inconsistent frame dims");
}

void MeasurementOperator::validate() const {
  if (psfs.empty()) throw std::invalid_argument("MeasurementOperator: needs at least one PSF");
  if (noise_sigma < 0.0) throw std::invalid_argument("MeasurementOperator: negative noise sigma");
  for (const auto& p : psfs)
    if (!p.taps.same_shape(psfs[0].taps))
      throw std::invalid_argument("MeasurementOperator: PSFs must share tap dimensions");
}

MeasurementSet forward(const MeasurementOperator& op, const Image& x,
                       std::optional<uint64_t> rng_seed) {
  op.validate();
  MeasurementSet y;
  y.frames.reserve(op.psfs.size());
  for (size_t m = 0; m < op.psfs.size(); ++m) {
    Image f = conv2d_same(x, op.psfs[m].taps);
    if (rng_seed && op.noise_sigma > 0.0) {
      Rng rng(substream(*rng_seed, "noise", m));
      for (double& v : f.data) v += op.noise_sigma * rng.gaussian();
    }
    y.frames.push_back(std::move(f));
    y.angles_deg.push_back(op.psfs[m].angle_deg);
  }
  return y;
}

Image adjoint(const MeasurementOperator& op, const MeasurementSet& y) {
  op.validate();
  y.validate();
  if (y.count() != op.count())
    throw std::invalid_argument("adjoint: frame count does not match operator");
  Image out(y.frames[0].height, y.frames[0].width);
  for (int m = 0; m < op.count(); ++m) {
    Image t = conv2d_same(y.frames[m], flip_kernel(op.psfs[m].taps));
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += t.data[i];
  }
  return out;
}

Image compound(const MeasurementSet& y) {
  y.validate();
  Image out(y.frames[0].height, y.frames[0].width);
  for (const auto& f : y.frames)
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += f.data[i];
  const double inv = 1.0 / static_cast<double>(y.count());
  for (double& v : out.data) v *= inv;
  return out;
}

double gram_lmax(const MeasurementOperator& op, int height, int width, int max_iters, double tol,
                 uint64_t seed) {
  op.validate();
  Rng rng(seed);
  Image v(height, width);
  for (double& e : v.data) e = rng.gaussian();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    MeasurementSet av = forward(op, v);
    Image atav = adjoint(op, av);
    double num = dot(v, atav);
    double den = dot(v, v);
    double next = num / den;
    double nrm = std::sqrt(norm2_sq(atav));
    if (nrm == 0.0) return 0.0;
    for (size_t i = 0; i < v.size(); ++i) v.data[i] = atav.data[i] / nrm;
    if (it > 0 && std::fabs(next - lambda) <= tol * std::max(1.0, std::fabs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double operator_norm(const MeasurementOperator& op, int height, int width) {
  return std::sqrt(gram_lmax(op, height, width));
}

}  // namespace pwc
