#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ahcr/errors.hpp"

namespace ahcr {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMatrixX =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline std::string shape_to_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ']';
  return os.str();
}

inline Index shape_numel(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

inline void check_shape_valid(const Shape& s) {
  if (s.empty()) throw ShapeError("empty shape");
  for (Index d : s) {
    if (d < 1)
      throw ShapeError("non-positive dimension in shape " + shape_to_string(s));
  }
}

// Dense row-major tensor with an explicit shape. Values are immutable once
// an operation has returned them; mutation happens only while building a
// result (or on model parameters between passes).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) {
    check_shape_valid(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = VectorX<T>::Zero(shape_numel(t.shape_));
    return t;
  }

  /// Allocates without clearing; every element must be written before use.
  static Tensor uninit(Shape shape) {
    check_shape_valid(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.resize(shape_numel(t.shape_));
    return t;
  }

  static Tensor full(Shape shape, T value) {
    Tensor t = uninit(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  static Tensor from_values(Shape shape, std::vector<T> values) {
    check_shape_valid(shape);
    if (static_cast<Index>(values.size()) != shape_numel(shape))
      throw ShapeError("value count does not match shape " +
                       shape_to_string(shape));
    Tensor t = uninit(std::move(shape));
    std::copy(values.begin(), values.end(), t.data());
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_[static_cast<std::size_t>(i)]; }
  Index size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](Index i) { return data_[i]; }
  T operator[](Index i) const { return data_[i]; }

  T& at(Index i, Index j) { return data_[i * dim(1) + j]; }
  T at(Index i, Index j) const { return data_[i * dim(1) + j]; }
  T& at(Index n, Index c, Index h, Index w) {
    return data_[((n * dim(1) + c) * dim(2) + h) * dim(3) + w];
  }
  T at(Index n, Index c, Index h, Index w) const {
    return data_[((n * dim(1) + c) * dim(2) + h) * dim(3) + w];
  }

  Eigen::Map<VectorX<T>> flat() { return {data_.data(), data_.size()}; }
  Eigen::Map<const VectorX<T>> flat() const {
    return {data_.data(), data_.size()};
  }

  /// Rank-2 row-major view.
  Eigen::Map<RowMatrixX<T>> matrix() {
    require_rank(2);
    return {data_.data(), dim(0), dim(1)};
  }
  Eigen::Map<const RowMatrixX<T>> matrix() const {
    require_rank(2);
    return {data_.data(), dim(0), dim(1)};
  }

  Tensor reshaped(Shape shape) const& {
    Tensor t = *this;
    return std::move(t).reshaped(std::move(shape));
  }
  Tensor reshaped(Shape shape) && {
    check_shape_valid(shape);
    if (shape_numel(shape) != size())
      throw ShapeError("reshape " + shape_to_string(shape_) + " -> " +
                       shape_to_string(shape) + " changes element count");
    shape_ = std::move(shape);
    return std::move(*this);
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  void require_rank(Index r) const {
    if (rank() != r)
      throw ShapeError("expected rank " + std::to_string(r) + ", got shape " +
                       shape_to_string(shape_));
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t = Tensor<U>::uninit(shape_);
    for (Index i = 0; i < size(); ++i)
      t[i] = static_cast<U>(data_[i]);
    return t;
  }

 private:
  Shape shape_;
  VectorX<T> data_;
};

template <typename T>
Tensor<T> zeros(Shape shape) {
  return Tensor<T>::zeros(std::move(shape));
}

template <typename T>
T sum(const Tensor<T>& t) {
  return t.flat().sum();
}

template <typename T>
bool all_finite(const Tensor<T>& t) {
  return t.flat().allFinite();
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("max_abs_diff shape mismatch " +
                     shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  return (a.flat() - b.flat()).cwiseAbs().maxCoeff();
}

/// Standard matrix product of two rank-2 tensors.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  a.require_rank(2);
  b.require_rank(2);
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul inner dimension mismatch " +
                     shape_to_string(a.shape()) + " x " +
                     shape_to_string(b.shape()));
  Tensor<T> y = Tensor<T>::uninit({a.dim(0), b.dim(1)});
  y.matrix().noalias() = a.matrix() * b.matrix();
  return y;
}

inline Index conv_out_dim(Index in, Index window, Index stride, Index pad) {
  const Index span = in + 2 * pad - window;
  if (span < 0 || stride < 1)
    throw ShapeError("window " + std::to_string(window) +
                     " exceeds padded extent of dimension " +
                     std::to_string(in) + " (pad " + std::to_string(pad) +
                     ")");
  return span / stride + 1;
}

namespace detail {

// Writes the receptive-field patches of one [C,H,W] image into a row-major
// [C*window^2, *] buffer: entry (r, col0 + oi*out_w + oj) lands at
// dst[r*ld + col0 + ...]. Row order is channel-major, then row-major within
// the window; out-of-image taps are zero. Stride-1 rows copy as contiguous
// runs.
template <typename T>
void unfold_into(const T* x, Index c_count, Index h, Index w, Index window,
                 Index stride, Index pad, T* dst, Index ld, Index col0) {
  const Index out_h = conv_out_dim(h, window, stride, pad);
  const Index out_w = conv_out_dim(w, window, stride, pad);
  Index row = 0;
  for (Index c = 0; c < c_count; ++c) {
    const T* plane = x + c * h * w;
    for (Index u = 0; u < window; ++u) {
      for (Index v = 0; v < window; ++v, ++row) {
        T* out = dst + row * ld + col0;
        for (Index oi = 0; oi < out_h; ++oi) {
          const Index ii = oi * stride + u - pad;
          T* orow = out + oi * out_w;
          if (ii < 0 || ii >= h) {
            std::fill(orow, orow + out_w, T(0));
            continue;
          }
          const T* srow = plane + ii * w;
          if (stride == 1) {
            const Index oj_lo = std::min(out_w, std::max<Index>(0, pad - v));
            const Index oj_hi = std::min<Index>(out_w, w + pad - v);
            std::fill(orow, orow + oj_lo, T(0));
            if (oj_hi > oj_lo)
              std::copy(srow + oj_lo + v - pad, srow + oj_hi + v - pad,
                        orow + oj_lo);
            std::fill(orow + std::max(oj_lo, oj_hi), orow + out_w, T(0));
          } else {
            for (Index oj = 0; oj < out_w; ++oj) {
              const Index jj = oj * stride + v - pad;
              orow[oj] = (jj < 0 || jj >= w) ? T(0) : srow[jj];
            }
          }
        }
      }
    }
  }
}

// Adjoint of unfold_into: scatter-adds patch rows back onto the image.
template <typename T>
void fold_add(const T* src, Index ld, Index col0, T* x, Index c_count,
              Index h, Index w, Index window, Index stride, Index pad) {
  const Index out_h = conv_out_dim(h, window, stride, pad);
  const Index out_w = conv_out_dim(w, window, stride, pad);
  Index row = 0;
  for (Index c = 0; c < c_count; ++c) {
    T* plane = x + c * h * w;
    for (Index u = 0; u < window; ++u) {
      for (Index v = 0; v < window; ++v, ++row) {
        const T* in = src + row * ld + col0;
        for (Index oi = 0; oi < out_h; ++oi) {
          const Index ii = oi * stride + u - pad;
          if (ii < 0 || ii >= h) continue;
          const T* irow = in + oi * out_w;
          T* drow = plane + ii * w;
          if (stride == 1) {
            const Index oj_lo = std::min(out_w, std::max<Index>(0, pad - v));
            const Index oj_hi = std::min<Index>(out_w, w + pad - v);
            T* d = drow + oj_lo + v - pad;
            for (Index oj = oj_lo; oj < oj_hi; ++oj)
              d[oj - oj_lo] += irow[oj];
          } else {
            for (Index oj = 0; oj < out_w; ++oj) {
              const Index jj = oj * stride + v - pad;
              if (jj >= 0 && jj < w) drow[jj] += irow[oj];
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Lowers windowed patches of a [C,H,W] tensor to a
/// [C*window^2, out_h*out_w] patch matrix.
template <typename T>
Tensor<T> unfold(const Tensor<T>& input, Index window, Index stride,
                 Index pad) {
  input.require_rank(3);
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (window < 1) throw ShapeError("window must be >= 1");
  if (pad < 0) throw ShapeError("negative padding");
  const Index out_h = conv_out_dim(h, window, stride, pad);
  const Index out_w = conv_out_dim(w, window, stride, pad);
  Tensor<T> cols = Tensor<T>::uninit({c * window * window, out_h * out_w});
  detail::unfold_into(input.data(), c, h, w, window, stride, pad, cols.data(),
                      out_h * out_w, 0);
  return cols;
}

/// Adjoint of unfold: accumulates a patch matrix back into a [C,H,W] tensor.
template <typename T>
Tensor<T> fold_acc(const Tensor<T>& cols, Index c, Index h, Index w,
                   Index window, Index stride, Index pad) {
  cols.require_rank(2);
  const Index out_h = conv_out_dim(h, window, stride, pad);
  const Index out_w = conv_out_dim(w, window, stride, pad);
  if (cols.dim(0) != c * window * window || cols.dim(1) != out_h * out_w)
    throw ShapeError("patch matrix shape " + shape_to_string(cols.shape()) +
                     " inconsistent with fold geometry");
  Tensor<T> x = Tensor<T>::zeros({c, h, w});
  detail::fold_add(cols.data(), out_h * out_w, 0, x.data(), c, h, w, window,
                   stride, pad);
  return x;
}

}  // namespace ahcr
