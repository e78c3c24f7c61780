#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "chemception/errors.hpp"

namespace chemception {

// Dense row-major tensor. Shapes follow NHWC for feature maps.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(count(shape)), T(0));
  }
  Tensor(std::vector<int> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != count(shape))
      throw ShapeMismatch("tensor data does not match its shape");
  }

  static std::int64_t count(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw ShapeMismatch("negative dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  int dim(std::size_t i) const { return shape.at(i); }
  int rank() const { return static_cast<int>(shape.size()); }

  T& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const {
    return data[static_cast<std::size_t>(i)];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (const T& v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

enum class Padding { Same, Valid };

// Closed-form output extent for conv/pool, the formula the shape tests sweep.
inline int conv_out_dim(int n, int k, int stride, Padding pad) {
  if (n <= 0 || k <= 0 || stride <= 0) throw ShapeMismatch("bad conv geometry");
  if (pad == Padding::Valid) {
    if (n < k)
      throw ShapeMismatch("valid conv: input " + std::to_string(n) +
                          " smaller than kernel " + std::to_string(k));
    return (n - k) / stride + 1;
  }
  return (n + stride - 1) / stride;  // ceil(n / stride)
}

// Low-side padding; the odd pixel goes on the high side.
inline int pad_low(int n, int k, int stride, Padding pad) {
  if (pad == Padding::Valid) return 0;
  int out = conv_out_dim(n, k, stride, pad);
  int total = std::max((out - 1) * stride + k - n, 0);
  return total / 2;
}

}  // namespace chemception
