#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pwc {

// Dense real tensor, row-major, ranks 1..4. Value/gradient carrier for the tape
// and the payload of the binary container format.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims, double fill = 0.0) : dims_(std::move(dims)) {
    size_t n = 1;
    for (int d : dims_) {
      if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dimension");
      n *= static_cast<size_t>(d);
    }
    if (dims_.empty() || dims_.size() > 4)
      throw std::invalid_argument("Tensor: rank must be 1..4");
    data_.assign(n, fill);
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.dims_); }

  const std::vector<int>& dims() const { return dims_; }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(dims_.size()); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at(int a) { return data_[static_cast<size_t>(a)]; }
  double& at(int a, int b) { return data_[static_cast<size_t>(a) * dims_[1] + b]; }
  double& at(int a, int b, int c) {
    return data_[(static_cast<size_t>(a) * dims_[1] + b) * dims_[2] + c];
  }
  double& at(int a, int b, int c, int d) {
    return data_[((static_cast<size_t>(a) * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
  }
  double at(int a) const { return data_[static_cast<size_t>(a)]; }
  double at(int a, int b) const { return data_[static_cast<size_t>(a) * dims_[1] + b]; }
  double at(int a, int b, int c) const {
    return data_[(static_cast<size_t>(a) * dims_[1] + b) * dims_[2] + c];
  }
  double at(int a, int b, int c, int d) const {
    return data_[((static_cast<size_t>(a) * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
  }

  bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::vector<int> dims_;
  std::vector<double> data_;
};

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

}  // namespace pwc
