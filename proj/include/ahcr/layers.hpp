#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ahcr/rng.hpp"
#include "ahcr/tensor.hpp"

namespace ahcr {

enum class Mode { kTrain, kInference };

// ---------------------------------------------------------------------------
// Convolution. Kernel geometry is fixed at 7x7; stride/pad default to the
// spatial-size-preserving configuration.

template <typename T>
struct ConvLayer {
  static constexpr Index kKernel = 7;

  Tensor<T> weights;  // [F, Cin, 7, 7]
  Tensor<T> bias;     // [F]
  Index stride = 1;
  Index pad = 3;

  Index out_channels() const { return weights.dim(0); }
  Index in_channels() const { return weights.dim(1); }
};

template <typename T>
ConvLayer<T> make_conv_layer(Index filters, Index in_channels,
                             Index stride = 1, Index pad = 3) {
  if (filters < 1 || in_channels < 1)
    throw ShapeError("conv layer needs positive channel counts");
  ConvLayer<T> layer;
  layer.weights = Tensor<T>::zeros(
      {filters, in_channels, ConvLayer<T>::kKernel, ConvLayer<T>::kKernel});
  layer.bias = Tensor<T>::zeros({filters});
  layer.stride = stride;
  layer.pad = pad;
  return layer;
}

template <typename T>
struct ConvCache {
  Tensor<T> input;  // [N, Cin, H, W]
  Index out_h = 0, out_w = 0;
};

namespace detail {

// Patch-matrix buffers are processed in sample chunks so peak memory stays
// bounded at the wide canonical widths.
inline constexpr std::size_t kConvColsBudgetBytes = std::size_t(256) << 20;

inline Index conv_chunk_samples(Index rows, Index cols_per_sample,
                                std::size_t elem_size, Index n) {
  const std::size_t per_sample =
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols_per_sample) * elem_size;
  if (per_sample == 0) return n;
  const Index chunk = static_cast<Index>(
      std::max<std::size_t>(1, kConvColsBudgetBytes / per_sample));
  return std::min(chunk, n);
}

// Reused workspaces; freshly mapped pages every batch would dominate the
// patch-matrix cost.
template <typename T>
T* conv_scratch(int slot, std::size_t size) {
  static thread_local std::array<std::vector<T>, 3> buffers;
  auto& buffer = buffers[static_cast<std::size_t>(slot)];
  if (buffer.size() < size) buffer.resize(size);
  return buffer.data();
}

}  // namespace detail

template <typename T>
std::pair<Tensor<T>, ConvCache<T>> conv_forward(const Tensor<T>& x,
                                                const ConvLayer<T>& layer) {
  x.require_rank(4);
  const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c != layer.in_channels())
    throw ShapeError("conv input has " + std::to_string(c) +
                     " channels, layer expects " +
                     std::to_string(layer.in_channels()));
  const Index k = ConvLayer<T>::kKernel;
  const Index f = layer.out_channels();
  const Index out_h = conv_out_dim(h, k, layer.stride, layer.pad);
  const Index out_w = conv_out_dim(w, k, layer.stride, layer.pad);
  const Index p = out_h * out_w;
  const Index rows = c * k * k;

  Tensor<T> y = Tensor<T>::uninit({n, f, out_h, out_w});
  // The patch buffer is written row-major (contiguous stride-1 runs) and
  // consumed through a column-major transposed view, so the product runs
  // with the long patch axis as the GEMM M dimension.
  Eigen::Map<const MatrixX<T>> w_t(layer.weights.data(), rows, f);
  Eigen::Map<const VectorX<T>> b_vec(layer.bias.data(), f);

  const Index chunk = detail::conv_chunk_samples(rows, p, sizeof(T), n);
  T* cols = detail::conv_scratch<T>(
      0, static_cast<std::size_t>(rows) * static_cast<std::size_t>(chunk * p));
  Eigen::Map<const MatrixX<T>> cols_t(cols, chunk * p, rows);
  Eigen::Map<MatrixX<T>> out_t(
      detail::conv_scratch<T>(1, static_cast<std::size_t>(chunk * p) *
                                     static_cast<std::size_t>(f)),
      chunk * p, f);
  for (Index n0 = 0; n0 < n; n0 += chunk) {
    const Index m = std::min(chunk, n - n0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index i = 0; i < m; ++i)
      detail::unfold_into(x.data() + (n0 + i) * c * h * w, c, h, w, k,
                          layer.stride, layer.pad, cols, chunk * p, i * p);
    out_t.topRows(m * p).noalias() = cols_t.topRows(m * p) * w_t;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index i = 0; i < m; ++i) {
      Eigen::Map<RowMatrixX<T>> y_i(y.data() + (n0 + i) * f * p, f, p);
      y_i = out_t.middleRows(i * p, p).transpose().colwise() + b_vec;
    }
  }
  return {std::move(y), ConvCache<T>{x, out_h, out_w}};
}

template <typename T>
struct ConvGrads {
  Tensor<T> dx;
  Tensor<T> dweights;
  Tensor<T> dbias;
};

template <typename T>
ConvGrads<T> conv_backward(const Tensor<T>& dy, const ConvLayer<T>& layer,
                           const ConvCache<T>& cache) {
  const Tensor<T>& x = cache.input;
  const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const Index k = ConvLayer<T>::kKernel;
  const Index f = layer.out_channels();
  const Index p = cache.out_h * cache.out_w;
  if (dy.rank() != 4 || dy.dim(0) != n || dy.dim(1) != f ||
      dy.dim(2) != cache.out_h || dy.dim(3) != cache.out_w)
    throw ShapeError("conv_backward dy shape " + shape_to_string(dy.shape()) +
                     " does not match forward output");
  const Index rows = c * k * k;

  ConvGrads<T> g;
  g.dx = Tensor<T>::zeros(x.shape());
  g.dweights = Tensor<T>::zeros(layer.weights.shape());
  g.dbias = Tensor<T>::zeros({f});

  Eigen::Map<const MatrixX<T>> w_t(layer.weights.data(), rows, f);
  Eigen::Map<MatrixX<T>> dw_t(g.dweights.data(), rows, f);
  Eigen::Map<VectorX<T>> db_vec(g.dbias.data(), f);

  const Index chunk = detail::conv_chunk_samples(rows, p, sizeof(T), n);
  const auto cols_size =
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(chunk * p);
  T* cols = detail::conv_scratch<T>(0, cols_size);
  Eigen::Map<const MatrixX<T>> cols_t(cols, chunk * p, rows);
  Eigen::Map<MatrixX<T>> dy_t(
      detail::conv_scratch<T>(1, static_cast<std::size_t>(chunk * p) *
                                     static_cast<std::size_t>(f)),
      chunk * p, f);
  T* dcols = detail::conv_scratch<T>(2, cols_size);
  Eigen::Map<MatrixX<T>> dcols_t(dcols, chunk * p, rows);
  for (Index n0 = 0; n0 < n; n0 += chunk) {
    const Index m = std::min(chunk, n - n0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index i = 0; i < m; ++i) {
      detail::unfold_into(x.data() + (n0 + i) * c * h * w, c, h, w, k,
                          layer.stride, layer.pad, cols, chunk * p, i * p);
      Eigen::Map<const RowMatrixX<T>> dy_i(dy.data() + (n0 + i) * f * p, f, p);
      dy_t.middleRows(i * p, p) = dy_i.transpose();
    }
    db_vec += dy_t.topRows(m * p).colwise().sum().transpose();
    dw_t.noalias() += cols_t.topRows(m * p).transpose() * dy_t.topRows(m * p);
    dcols_t.topRows(m * p).noalias() = dy_t.topRows(m * p) * w_t.transpose();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index i = 0; i < m; ++i)
      detail::fold_add(dcols, chunk * p, i * p,
                       g.dx.data() + (n0 + i) * c * h * w, c, h, w, k,
                       layer.stride, layer.pad);
  }
  return g;
}

// ---------------------------------------------------------------------------
// ReLU

template <typename T>
struct ReluCache {
  Tensor<T> input;
};

template <typename T>
std::pair<Tensor<T>, ReluCache<T>> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = Tensor<T>::uninit(x.shape());
  y.flat() = x.flat().cwiseMax(T(0));
  return {std::move(y), ReluCache<T>{x}};
}

// Subgradient at exactly zero is zero.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& dy, const ReluCache<T>& cache) {
  if (!dy.same_shape(cache.input))
    throw ShapeError("relu_backward shape mismatch");
  Tensor<T> dx = Tensor<T>::uninit(dy.shape());
  const T* x = cache.input.data();
  const T* g = dy.data();
  T* out = dx.data();
  for (Index i = 0; i < dx.size(); ++i) out[i] = x[i] > T(0) ? g[i] : T(0);
  return dx;
}

// ---------------------------------------------------------------------------
// Max pooling. Padding participates as -inf so padded taps never win; ties
// go to the first window position in row-major order.

struct PoolSpec {
  Index window = 4;
  Index stride = 2;
  Index pad = 1;
};

template <typename T>
struct PoolCache {
  Shape in_shape;
  std::vector<Index> argmax;  // flat input index per output element
  Index out_h = 0, out_w = 0;
};

template <typename T>
std::pair<Tensor<T>, PoolCache<T>> maxpool_forward(const Tensor<T>& x,
                                                   const PoolSpec& spec = {}) {
  x.require_rank(4);
  const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h < 2 || w < 2)
    throw ShapeError("maxpool input spatial dims must be >= 2, got " +
                     shape_to_string(x.shape()));
  const Index out_h = conv_out_dim(h, spec.window, spec.stride, spec.pad);
  const Index out_w = conv_out_dim(w, spec.window, spec.stride, spec.pad);

  Tensor<T> y = Tensor<T>::uninit({n, c, out_h, out_w});
  PoolCache<T> cache{x.shape(), {}, out_h, out_w};
  cache.argmax.resize(static_cast<std::size_t>(n * c * out_h * out_w));

  const T* src = x.data();
  T* dst = y.data();
  Index out_idx = 0;
  for (Index ni = 0; ni < n; ++ni) {
    for (Index ci = 0; ci < c; ++ci) {
      const Index plane = (ni * c + ci) * h * w;
      for (Index oi = 0; oi < out_h; ++oi) {
        for (Index oj = 0; oj < out_w; ++oj) {
          T best = -std::numeric_limits<T>::infinity();
          Index best_idx = -1;
          for (Index u = 0; u < spec.window; ++u) {
            const Index ii = oi * spec.stride + u - spec.pad;
            if (ii < 0 || ii >= h) continue;
            for (Index v = 0; v < spec.window; ++v) {
              const Index jj = oj * spec.stride + v - spec.pad;
              if (jj < 0 || jj >= w) continue;
              const T val = src[plane + ii * w + jj];
              if (val > best) {
                best = val;
                best_idx = plane + ii * w + jj;
              }
            }
          }
          dst[out_idx] = best;
          cache.argmax[static_cast<std::size_t>(out_idx)] = best_idx;
          ++out_idx;
        }
      }
    }
  }
  return {std::move(y), std::move(cache)};
}

template <typename T>
Tensor<T> maxpool_backward(const Tensor<T>& dy, const PoolCache<T>& cache) {
  if (dy.size() != static_cast<Index>(cache.argmax.size()))
    throw ShapeError("maxpool_backward dy size mismatch");
  Tensor<T> dx = Tensor<T>::zeros(cache.in_shape);
  const T* g = dy.data();
  T* out = dx.data();
  for (Index i = 0; i < dy.size(); ++i)
    out[cache.argmax[static_cast<std::size_t>(i)]] += g[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Dense (affine) layer: y = x W^T + b

template <typename T>
struct DenseLayer {
  Tensor<T> weights;  // [out, in]
  Tensor<T> bias;     // [out]
};

template <typename T>
DenseLayer<T> make_dense_layer(Index out, Index in) {
  if (out < 1 || in < 1) throw ShapeError("dense layer needs positive dims");
  return {Tensor<T>::zeros({out, in}), Tensor<T>::zeros({out})};
}

template <typename T>
struct DenseCache {
  Tensor<T> input;
};

template <typename T>
std::pair<Tensor<T>, DenseCache<T>> dense_forward(const Tensor<T>& x,
                                                  const DenseLayer<T>& layer) {
  x.require_rank(2);
  if (x.dim(1) != layer.weights.dim(1))
    throw ShapeError("dense input width " + std::to_string(x.dim(1)) +
                     " != layer in width " +
                     std::to_string(layer.weights.dim(1)));
  Tensor<T> y = Tensor<T>::uninit({x.dim(0), layer.weights.dim(0)});
  Eigen::Map<const VectorX<T>> b(layer.bias.data(), layer.bias.size());
  y.matrix().noalias() = x.matrix() * layer.weights.matrix().transpose();
  y.matrix().rowwise() += b.transpose();
  return {std::move(y), DenseCache<T>{x}};
}

template <typename T>
struct DenseGrads {
  Tensor<T> dx;
  Tensor<T> dweights;
  Tensor<T> dbias;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& dy, const DenseLayer<T>& layer,
                             const DenseCache<T>& cache) {
  dy.require_rank(2);
  if (dy.dim(0) != cache.input.dim(0) || dy.dim(1) != layer.weights.dim(0))
    throw ShapeError("dense_backward dy shape mismatch");
  DenseGrads<T> g;
  g.dx = Tensor<T>::uninit(cache.input.shape());
  g.dweights = Tensor<T>::uninit(layer.weights.shape());
  g.dbias = Tensor<T>::uninit({layer.bias.size()});
  g.dx.matrix().noalias() = dy.matrix() * layer.weights.matrix();
  g.dweights.matrix().noalias() = dy.matrix().transpose() * cache.input.matrix();
  Eigen::Map<VectorX<T>> db(g.dbias.data(), g.dbias.size());
  db = dy.matrix().colwise().sum().transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Dropout. Train mode zeroes each element independently with probability
// `rate` and scales survivors by 1/(1-rate); inference is the identity.
// Mask draws come from the supplied stream in flat element order.

template <typename T>
struct DropoutCache {
  Tensor<T> mask;  // scaled keep mask; empty when the pass was an identity
  bool identity = true;
};

template <typename T>
std::pair<Tensor<T>, DropoutCache<T>> dropout_forward(const Tensor<T>& x,
                                                      double rate, Mode mode,
                                                      Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw InputError("dropout rate must be in [0,1), got " +
                     std::to_string(rate));
  if (mode == Mode::kInference || rate == 0.0) {
    return {x, DropoutCache<T>{{}, true}};
  }
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  Tensor<T> mask = Tensor<T>::uninit(x.shape());
  for (Index i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform() < rate ? T(0) : scale;
  Tensor<T> y = Tensor<T>::uninit(x.shape());
  y.flat() = x.flat().cwiseProduct(mask.flat());
  return {std::move(y), DropoutCache<T>{std::move(mask), false}};
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& dy, const DropoutCache<T>& cache) {
  if (cache.identity) return dy;
  if (!dy.same_shape(cache.mask))
    throw ShapeError("dropout_backward shape mismatch");
  Tensor<T> dx = Tensor<T>::uninit(dy.shape());
  dx.flat() = dy.flat().cwiseProduct(cache.mask.flat());
  return dx;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy over 1-based class labels. Log-sum-exp runs with
// max subtraction so saturated logits cannot overflow.

template <typename T>
std::pair<T, Tensor<T>> softmax_cross_entropy(const Tensor<T>& logits,
                                              const std::vector<int>& labels) {
  logits.require_rank(2);
  const Index n = logits.dim(0), classes = logits.dim(1);
  if (static_cast<Index>(labels.size()) != n)
    throw InputError("label count " + std::to_string(labels.size()) +
                     " != batch size " + std::to_string(n));
  Tensor<T> dlogits = Tensor<T>::uninit(logits.shape());
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 1 || label > classes)
      throw InputError("label " + std::to_string(label) + " outside 1.." +
                       std::to_string(classes));
    const T* row = logits.data() + i * classes;
    T* drow = dlogits.data() + i * classes;
    T max_logit = row[0];
    for (Index j = 1; j < classes; ++j) max_logit = std::max(max_logit, row[j]);
    double denom = 0.0;
    for (Index j = 0; j < classes; ++j)
      denom += std::exp(static_cast<double>(row[j] - max_logit));
    const double log_denom = std::log(denom);
    loss += log_denom - static_cast<double>(row[label - 1] - max_logit);
    for (Index j = 0; j < classes; ++j) {
      double p = std::exp(static_cast<double>(row[j] - max_logit)) / denom;
      if (j == label - 1) p -= 1.0;
      drow[j] = static_cast<T>(p / static_cast<double>(n));
    }
  }
  return {static_cast<T>(loss / static_cast<double>(n)), std::move(dlogits)};
}

}  // namespace ahcr
