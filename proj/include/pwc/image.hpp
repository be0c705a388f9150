#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwc {

// Beamformed-RF grid. Row-major; rows are axial (depth) samples, columns lateral.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0) : height(h), width(w) {
    if (h < 0 || w < 0) throw std::invalid_argument("Image: negative dimension");
    data.assign(static_cast<size_t>(h) * static_cast<size_t>(w), fill);
  }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": image shape mismatch");
}

inline Image add(const Image& a, const Image& b) {
  check_same_shape(a, b, "add");
  Image out = a;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
  return out;
}

inline Image sub(const Image& a, const Image& b) {
  check_same_shape(a, b, "sub");
  Image out = a;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

inline Image scale(const Image& a, double s) {
  Image out = a;
  for (double& v : out.data) v *= s;
  return out;
}

inline double dot(const Image& a, const Image& b) {
  check_same_shape(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

inline double norm2_sq(const Image& a) { return dot(a, a); }

inline double l1_norm(const Image& a) {
  double s = 0.0;
  for (double v : a.data) s += std::fabs(v);
  return s;
}

inline double max_abs(const Image& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace pwc
