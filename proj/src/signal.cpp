#include "pwc/signal.hpp"

#include <algorithm>
#include <stdexcept>

namespace pwc {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Per-length twiddle cache; tapes run column transforms in tight loops.
const std::vector<std::complex<double>>& twiddles(size_t n, bool inverse) {
  thread_local std::vector<std::vector<std::complex<double>>> cache[2];
  auto& slot = cache[inverse ? 1 : 0];
  size_t lg = 0;
  while ((size_t(1) << lg) < n) ++lg;
  if (slot.size() <= lg) slot.resize(lg + 1);
  auto& tw = slot[lg];
  if (tw.size() != n / 2) {
    tw.resize(n / 2);
    const double sgn = inverse ? 1.0 : -1.0;
    for (size_t k = 0; k < n / 2; ++k) {
      double ang = sgn * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
      tw[k] = {std::cos(ang), std::sin(ang)};
    }
  }
  return tw;
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = twiddles(n, inverse);
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t step = n / len;
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * tw[k * step];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

// Analytic signal of a real column, zero-padded to a power of two.
std::vector<std::complex<double>> analytic_padded(const std::vector<double>& x) {
  const size_t n = x.size();
  const size_t np = next_pow2(n);
  std::vector<std::complex<double>> a(np, {0.0, 0.0});
  for (size_t i = 0; i < n; ++i) a[i] = {x[i], 0.0};
  fft_inplace(a, false);
  // keep DC and Nyquist, double positive frequencies, zero negative ones
  for (size_t k = 1; k < np / 2; ++k) a[k] *= 2.0;
  for (size_t k = np / 2 + 1; k < np; ++k) a[k] = {0.0, 0.0};
  fft_inplace(a, true);
  return a;
}

}  // namespace

std::vector<std::complex<double>> fft_1d(const std::vector<std::complex<double>>& signal,
                                         bool inverse) {
  if (signal.empty() || !is_pow2(signal.size()))
    throw std::invalid_argument("fft_1d: length must be a power of two");
  std::vector<std::complex<double>> a = signal;
  fft_inplace(a, inverse);
  return a;
}

std::vector<double> hilbert_envelope(const std::vector<double>& column) {
  if (column.empty()) throw std::invalid_argument("hilbert_envelope: empty input");
  auto a = analytic_padded(column);
  std::vector<double> env(column.size());
  for (size_t i = 0; i < env.size(); ++i) env[i] = std::abs(a[i]);
  return env;
}

std::vector<double> hilbert_quadrature(const std::vector<double>& column) {
  if (column.empty()) throw std::invalid_argument("hilbert_quadrature: empty input");
  auto a = analytic_padded(column);
  std::vector<double> h(column.size());
  for (size_t i = 0; i < h.size(); ++i) h[i] = a[i].imag();
  return h;
}

Image conv2d_same(const Image& img, const Image& kernel) {
  if (kernel.height % 2 == 0 || kernel.width % 2 == 0)
    throw std::invalid_argument("conv2d_same: kernel dimensions must be odd");
  const int rr = kernel.height / 2;
  const int rc = kernel.width / 2;
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int dr = -rr; dr <= rr; ++dr) {
        const int sr = r + dr;
        if (sr < 0 || sr >= img.height) continue;
        for (int dc = -rc; dc <= rc; ++dc) {
          const int sc = c + dc;
          if (sc < 0 || sc >= img.width) continue;
          acc += img.at(sr, sc) * kernel.at(rr + dr, rc + dc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

Image flip_kernel(const Image& kernel) {
  Image out(kernel.height, kernel.width);
  for (int r = 0; r < kernel.height; ++r)
    for (int c = 0; c < kernel.width; ++c)
      out.at(r, c) = kernel.at(kernel.height - 1 - r, kernel.width - 1 - c);
  return out;
}

void QConfig::validate() const {
  if (epsilon <= 0.0) throw std::invalid_argument("QConfig: epsilon must be positive");
  if (floor_db >= ceil_db) throw std::invalid_argument("QConfig: floor_db must be < ceil_db");
}

Image q_transform(const Image& img, const QConfig& cfg) {
  cfg.validate();
  Image env(img.height, img.width);
  std::vector<double> col(static_cast<size_t>(img.height));
  for (int c = 0; c < img.width; ++c) {
    for (int r = 0; r < img.height; ++r) col[static_cast<size_t>(r)] = img.at(r, c);
    auto e = hilbert_envelope(col);
    for (int r = 0; r < img.height; ++r) env.at(r, c) = e[static_cast<size_t>(r)];
  }
  double m = 0.0;
  for (double v : env.data) m = std::max(m, v);
  Image out(img.height, img.width);
  const double inv_m = m > 0.0 ? 1.0 / m : 0.0;  // all-zero input: skip normalization
  for (size_t i = 0; i < env.size(); ++i) {
    double v = 20.0 * std::log10(cfg.epsilon + env.data[i] * inv_m);
    out.data[i] = std::clamp(v, cfg.floor_db, cfg.ceil_db);
  }
  return out;
}

}  // namespace pwc
