#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wge/core/conv.hpp"
#include "wge/core/tensor.hpp"

namespace wge {

// ---------------------------------------------------------------------------
// Activations

// Parametric ReLU with one slope per channel; slope has shape (1, 1, c).
template <typename T>
BasicTensor<T> prelu(const BasicTensor<T>& input, const BasicTensor<T>& slope) {
  const std::size_t c = input.channels();
  if (slope.shape() != Shape{1, 1, c}) {
    throw ShapeError("prelu: slope " + slope.shape().str() + " for input " + input.shape().str());
  }
  BasicTensor<T> out(input.shape());
  for (std::size_t k = 0; k < input.size(); ++k) {
    const T x = input[k];
    out[k] = x > T{0} ? x : slope[k % c] * x;
  }
  return out;
}

template <typename T>
struct PreluGrads {
  BasicTensor<T> input;
  BasicTensor<T> slope;
};

template <typename T>
PreluGrads<T> prelu_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                             const BasicTensor<T>& slope) {
  grad_out.require_same_shape(input, "prelu_backward");
  const std::size_t c = input.channels();
  PreluGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(slope.shape())};
  std::vector<double> acc(c, 0.0);
  for (std::size_t k = 0; k < input.size(); ++k) {
    const T x = input[k];
    if (x > T{0}) {
      g.input[k] = grad_out[k];
    } else {
      g.input[k] = slope[k % c] * grad_out[k];
      acc[k % c] += static_cast<double>(x) * grad_out[k];
    }
  }
  for (std::size_t ch = 0; ch < c; ++ch) g.slope[ch] = static_cast<T>(acc[ch]);
  return g;
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, T slope) {
  BasicTensor<T> out(input.shape());
  for (std::size_t k = 0; k < input.size(); ++k) {
    const T x = input[k];
    out[k] = x > T{0} ? x : slope * x;
  }
  return out;
}

template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                   T slope) {
  grad_out.require_same_shape(input, "leaky_relu_backward");
  BasicTensor<T> g(input.shape());
  for (std::size_t k = 0; k < input.size(); ++k) {
    g[k] = input[k] > T{0} ? grad_out[k] : slope * grad_out[k];
  }
  return g;
}

// ---------------------------------------------------------------------------
// Instance normalization: per (item, channel) over the length axis, no affine.

template <typename T>
struct ChannelStats {
  std::vector<double> mean;     // batch * channels
  std::vector<double> inv_std;  // 1 / sqrt(var + eps)
};

template <typename T>
ChannelStats<T> instance_stats(const BasicTensor<T>& input, double eps) {
  const std::size_t n = input.length();
  const std::size_t c = input.channels();
  if (n == 0) throw ShapeError("instance_norm: empty length axis in " + input.shape().str());
  ChannelStats<T> s{std::vector<double>(input.batch() * c, 0.0),
                    std::vector<double>(input.batch() * c, 0.0)};
  std::vector<double> sq(c);
  for (std::size_t b = 0; b < input.batch(); ++b) {
    const T* x = input.item(b);
    double* mean = s.mean.data() + b * c;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) mean[ch] += x[i * c + ch];
    for (std::size_t ch = 0; ch < c; ++ch) mean[ch] /= static_cast<double>(n);
    std::fill(sq.begin(), sq.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double d = x[i * c + ch] - mean[ch];
        sq[ch] += d * d;
      }
    for (std::size_t ch = 0; ch < c; ++ch)
      s.inv_std[b * c + ch] = 1.0 / std::sqrt(sq[ch] / static_cast<double>(n) + eps);
  }
  return s;
}

template <typename T>
BasicTensor<T> instance_norm(const BasicTensor<T>& input, double eps = 1e-5) {
  const auto s = instance_stats(input, eps);
  const std::size_t n = input.length();
  const std::size_t c = input.channels();
  BasicTensor<T> out(input.shape());
  for (std::size_t b = 0; b < input.batch(); ++b) {
    const T* x = input.item(b);
    T* y = out.item(b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t sc = b * c + ch;
        y[i * c + ch] = static_cast<T>((x[i * c + ch] - s.mean[sc]) * s.inv_std[sc]);
      }
  }
  return out;
}

template <typename T>
BasicTensor<T> instance_norm_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                      double eps = 1e-5) {
  grad_out.require_same_shape(input, "instance_norm_backward");
  const auto s = instance_stats(input, eps);
  const std::size_t n = input.length();
  const std::size_t c = input.channels();
  BasicTensor<T> grad(input.shape());
  std::vector<double> g_mean(c), gx_mean(c);
  for (std::size_t b = 0; b < input.batch(); ++b) {
    const T* x = input.item(b);
    const T* g = grad_out.item(b);
    T* gi = grad.item(b);
    std::fill(g_mean.begin(), g_mean.end(), 0.0);
    std::fill(gx_mean.begin(), gx_mean.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t sc = b * c + ch;
        const double xhat = (x[i * c + ch] - s.mean[sc]) * s.inv_std[sc];
        g_mean[ch] += g[i * c + ch];
        gx_mean[ch] += g[i * c + ch] * xhat;
      }
    for (std::size_t ch = 0; ch < c; ++ch) {
      g_mean[ch] /= static_cast<double>(n);
      gx_mean[ch] /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t sc = b * c + ch;
        const double xhat = (x[i * c + ch] - s.mean[sc]) * s.inv_std[sc];
        gi[i * c + ch] =
            static_cast<T>(s.inv_std[sc] * (g[i * c + ch] - g_mean[ch] - xhat * gx_mean[ch]));
      }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Fully connected layer over the flattened (length * channels) features.
//   input (batch, L, c), weight (1, L*c, m), bias (1, 1, m) -> (batch, 1, m)

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                     const BasicTensor<T>& bias) {
  const std::size_t n = input.length() * input.channels();
  const std::size_t m = weight.channels();
  if (weight.batch() != 1 || weight.length() != n) {
    throw ShapeError("dense: input " + input.shape().str() + " flattens to " + std::to_string(n) +
                     " features but weight is " + weight.shape().str());
  }
  detail::check_bias(bias, m, "dense");
  BasicTensor<T> out(Shape{input.batch(), 1, m});
  for (std::size_t b = 0; b < input.batch(); ++b) {
    const T* x = input.item(b);
    for (std::size_t j = 0; j < m; ++j) {
      double acc = bias.empty() ? 0.0 : static_cast<double>(bias[j]);
      for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]) * weight[i * m + j];
      out(b, 0, j) = static_cast<T>(acc);
    }
  }
  return out;
}

template <typename T>
struct DenseGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                             const BasicTensor<T>& weight, bool has_bias) {
  const std::size_t n = input.length() * input.channels();
  const std::size_t m = weight.channels();
  if (weight.length() != n || grad_out.shape() != Shape{input.batch(), 1, m}) {
    throw ShapeError("dense_backward: grad_out " + grad_out.shape().str() + ", input " +
                     input.shape().str() + ", weight " + weight.shape().str() + " are inconsistent");
  }
  DenseGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(weight.shape()), {}};
  std::vector<double> gw(n * m, 0.0), gb(m, 0.0);
  for (std::size_t b = 0; b < input.batch(); ++b) {
    const T* x = input.item(b);
    T* gx = g.input.item(b);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double go = grad_out(b, 0, j);
        acc += go * weight[i * m + j];
        gw[i * m + j] += static_cast<double>(x[i]) * go;
      }
      gx[i] = static_cast<T>(acc);
    }
    for (std::size_t j = 0; j < m; ++j) gb[j] += grad_out(b, 0, j);
  }
  g.weight = BasicTensor<T>(weight.shape(), std::vector<T>(gw.begin(), gw.end()));
  if (has_bias) g.bias = BasicTensor<T>(Shape{1, 1, m}, std::vector<T>(gb.begin(), gb.end()));
  return g;
}

// ---------------------------------------------------------------------------
// Channel concatenation and its inverse.

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (b.empty() && b.channels() == 0) return a;
  if (a.empty() && a.channels() == 0) return b;
  if (a.batch() != b.batch() || a.length() != b.length()) {
    throw ShapeError("concat_channels: " + a.shape().str() + " and " + b.shape().str() +
                     " differ in batch or length");
  }
  const std::size_t ca = a.channels(), cb = b.channels(), c = ca + cb;
  BasicTensor<T> out(Shape{a.batch(), a.length(), c});
  const std::size_t rows = a.batch() * a.length();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.data() + r * ca, ca, out.data() + r * c);
    std::copy_n(b.data() + r * cb, cb, out.data() + r * c + ca);
  }
  return out;
}

// Splits channels [0, first) and [first, c).
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> split_channels(const BasicTensor<T>& x, std::size_t first) {
  if (first > x.channels()) {
    throw ShapeError("split_channels: cannot take " + std::to_string(first) + " channels from " +
                     x.shape().str());
  }
  const std::size_t c = x.channels(), cb = c - first;
  BasicTensor<T> a(Shape{x.batch(), x.length(), first});
  BasicTensor<T> b(Shape{x.batch(), x.length(), cb});
  const std::size_t rows = x.batch() * x.length();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.data() + r * c, first, a.data() + r * first);
    std::copy_n(x.data() + r * c + first, cb, b.data() + r * cb);
  }
  return {std::move(a), std::move(b)};
}

// Stacks two tensors along the batch axis.
template <typename T>
BasicTensor<T> concat_batch(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.length() != b.length() || a.channels() != b.channels()) {
    throw ShapeError("concat_batch: " + a.shape().str() + " and " + b.shape().str() +
                     " differ in length or channels");
  }
  std::vector<T> data(a.storage());
  data.insert(data.end(), b.storage().begin(), b.storage().end());
  return BasicTensor<T>(Shape{a.batch() + b.batch(), a.length(), a.channels()}, std::move(data));
}

// Items [first, first + count) of the batch axis.
template <typename T>
BasicTensor<T> slice_batch(const BasicTensor<T>& x, std::size_t first, std::size_t count) {
  if (first + count > x.batch()) {
    throw ShapeError("slice_batch: items [" + std::to_string(first) + ", " + std::to_string(first + count) +
                     ") out of range for " + x.shape().str());
  }
  const std::size_t item = x.length() * x.channels();
  std::vector<T> data(x.data() + first * item, x.data() + (first + count) * item);
  return BasicTensor<T>(Shape{count, x.length(), x.channels()}, std::move(data));
}

// ---------------------------------------------------------------------------
// Reductions used as training objectives. Both average over every element.

template <typename T>
double l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  a.require_same_shape(b, "l1_loss");
  if (a.empty()) throw ShapeError("l1_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(static_cast<double>(a[k]) - b[k]);
  return acc / static_cast<double>(a.size());
}

// d l1_loss / d a; the subgradient at a == b is 0.
template <typename T>
BasicTensor<T> l1_loss_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, double scale = 1.0) {
  a.require_same_shape(b, "l1_loss_backward");
  BasicTensor<T> g(a.shape());
  const double w = scale / static_cast<double>(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    g[k] = static_cast<T>(d > 0 ? w : (d < 0 ? -w : 0.0));
  }
  return g;
}

template <typename T>
double mse_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  a.require_same_shape(b, "mse_loss");
  if (a.empty()) throw ShapeError("mse_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - b[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

template <typename T>
BasicTensor<T> mse_loss_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, double scale = 1.0) {
  a.require_same_shape(b, "mse_loss_backward");
  BasicTensor<T> g(a.shape());
  const double w = 2.0 * scale / static_cast<double>(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) g[k] = static_cast<T>(w * (static_cast<double>(a[k]) - b[k]));
  return g;
}

}  // namespace wge
