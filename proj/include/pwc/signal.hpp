#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "pwc/image.hpp"

namespace pwc {

// Radix-2 FFT. Length must be a power of two; the inverse applies 1/n scaling.
std::vector<std::complex<double>> fft_1d(const std::vector<std::complex<double>>& signal,
                                         bool inverse);

// Envelope of the analytic signal of one axial column: |x + i*H(x)| where H is
// the discrete Hilbert transform (zero negative frequencies, double positive,
// keep DC/Nyquist). Non-power-of-two inputs are zero-padded internally and the
// result truncated back.
std::vector<double> hilbert_envelope(const std::vector<double>& column);

// Quadrature component h = H(x) of the analytic signal, same padding rules.
// The envelope equals sqrt(x^2 + h^2) elementwise.
std::vector<double> hilbert_quadrature(const std::vector<double>& column);

// Zero-padded, stride-1, same-size 2-D filtering. Implemented as
// cross-correlation with the stored kernel (the learned-kernel convention):
// out[r][c] = sum_{dr,dc} img[r+dr][c+dc] * k[center+dr][center+dc].
// Kernel dimensions must be odd.
Image conv2d_same(const Image& img, const Image& kernel);

// Kernel flipped along both axes; cross-correlation with the flipped kernel is
// the adjoint of conv2d_same.
Image flip_kernel(const Image& kernel);

struct QConfig {
  double floor_db = -60.0;
  double ceil_db = 0.0;
  // Default 10^(floor_db/20), so an all-zero input maps exactly to floor_db.
  double epsilon = 1e-3;

  static QConfig with_floor(double floor_db, double ceil_db = 0.0) {
    QConfig q;
    q.floor_db = floor_db;
    q.ceil_db = ceil_db;
    q.epsilon = std::pow(10.0, floor_db / 20.0);
    return q;
  }
  void validate() const;
};

// RF-to-image transform: per-column envelope, global max-normalize,
// 20*log10(epsilon + .), clip to [floor_db, ceil_db]. An all-zero input skips
// the normalization and comes out at floor_db everywhere.
Image q_transform(const Image& img, const QConfig& cfg = QConfig{});

}  // namespace pwc
