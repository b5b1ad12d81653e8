#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <string>
#include <vector>

#include "wge/core/tensor.hpp"

namespace wge {

enum class Padding {
  // Symmetric zero-padding giving ceil(L / stride) outputs; an odd total
  // puts the extra sample on the right.
  Same,
  // width - 1 zeros on the left only, so out[i] sees in[i*stride - width + 1 .. i*stride].
  Causal,
};

struct ConvGeometry {
  std::size_t in_length = 0;
  std::size_t out_length = 0;
  std::size_t width = 0;
  std::size_t stride = 1;
  std::size_t pad_left = 0;
};

inline ConvGeometry conv_geometry(std::size_t in_length, std::size_t width, std::size_t stride,
                                  Padding padding) {
  if (in_length == 0 || width == 0 || stride == 0) {
    throw ShapeError("conv1d: length, width and stride must be positive (L=" +
                     std::to_string(in_length) + ", width=" + std::to_string(width) +
                     ", stride=" + std::to_string(stride) + ")");
  }
  ConvGeometry g;
  g.in_length = in_length;
  g.width = width;
  g.stride = stride;
  g.out_length = (in_length + stride - 1) / stride;
  if (padding == Padding::Same) {
    const std::size_t span = (g.out_length - 1) * stride + width;
    const std::size_t total = span > in_length ? span - in_length : 0;
    g.pad_left = total / 2;
  } else {
    g.pad_left = width - 1;
  }
  return g;
}

namespace detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Unfolds rows [r0, r1) of the receptive-field matrix, row b * out_len + i
// holding the (width * c) input samples under output i of item b.
template <typename T>
void im2col(const BasicTensor<T>& in, const ConvGeometry& g, std::size_t r0, std::size_t r1, T* cols) {
  const std::size_t c = in.channels();
  const std::size_t row = g.width * c;
  std::fill(cols, cols + (r1 - r0) * row, T{0});
  for (std::size_t r = r0; r < r1; ++r) {
    const std::size_t b = r / g.out_length, i = r % g.out_length;
    const T* src = in.item(b);
    T* dst = cols + (r - r0) * row;
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(i * g.stride) - static_cast<std::ptrdiff_t>(g.pad_left);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(g.width), static_cast<std::ptrdiff_t>(g.in_length) - start);
    if (hi > lo) {
      std::memcpy(dst + lo * c, src + (start + lo) * static_cast<std::ptrdiff_t>(c),
                  static_cast<std::size_t>(hi - lo) * c * sizeof(T));
    }
  }
}

// Adjoint of im2col: scatter-adds rows [r0, r1) back into out (batch, L, c).
template <typename T>
void col2im(const T* cols, const ConvGeometry& g, std::size_t r0, std::size_t r1, BasicTensor<T>& out) {
  const std::size_t channels = out.channels();
  const std::size_t row = g.width * channels;
  for (std::size_t r = r0; r < r1; ++r) {
    const std::size_t b = r / g.out_length, i = r % g.out_length;
    T* dst = out.item(b);
    const T* src = cols + (r - r0) * row;
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(i * g.stride) - static_cast<std::ptrdiff_t>(g.pad_left);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(g.width), static_cast<std::ptrdiff_t>(g.in_length) - start);
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      T* d = dst + (start + k) * static_cast<std::ptrdiff_t>(channels);
      const T* s = src + k * static_cast<std::ptrdiff_t>(channels);
      for (std::size_t ch = 0; ch < channels; ++ch) d[ch] += s[ch];
    }
  }
}

// Rows per block so an unfolded block stays around 1 MiB; keeps memory
// flat at paper scale and the GEMM operands in cache.
template <typename T>
std::size_t block_rows(std::size_t total_rows, std::size_t row_len) {
  const std::size_t target = (std::size_t{1} << 20) / sizeof(T);
  return std::clamp<std::size_t>(target / std::max<std::size_t>(row_len, 1), 64, std::max<std::size_t>(total_rows, 1));
}

template <typename T>
void check_bias(const BasicTensor<T>& bias, std::size_t c_out, const char* op) {
  if (!bias.empty() && bias.shape() != Shape{1, 1, c_out}) {
    throw ShapeError(std::string(op) + ": bias shape " + bias.shape().str() + " does not match " +
                     Shape{1, 1, c_out}.str());
  }
}

template <typename T>
void add_bias(BasicTensor<T>& out, const BasicTensor<T>& bias) {
  if (bias.empty()) return;
  const std::size_t c = out.channels();
  const std::size_t rows = out.batch() * out.length();
  for (std::size_t r = 0; r < rows; ++r) {
    T* o = out.data() + r * c;
    for (std::size_t ch = 0; ch < c; ++ch) o[ch] += bias[ch];
  }
}

template <typename T>
BasicTensor<T> sum_rows(const BasicTensor<T>& grad_out) {
  const std::size_t c = grad_out.channels();
  std::vector<double> acc(c, 0.0);
  const std::size_t rows = grad_out.batch() * grad_out.length();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* g = grad_out.data() + r * c;
    for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += g[ch];
  }
  return BasicTensor<T>(Shape{1, 1, c}, std::vector<T>(acc.begin(), acc.end()));
}

}  // namespace detail

template <typename T>
struct ConvGrads {
  BasicTensor<T> input;  // empty when not requested
  BasicTensor<T> kernel;
  BasicTensor<T> bias;  // empty when the layer has no bias
};

// Strided 1-D cross-correlation.
//   input  (batch, L, c_in)
//   kernel (width, c_in, c_out)
//   bias   (1, 1, c_out) or empty
// returns (batch, ceil(L / stride), c_out)
template <typename T>
BasicTensor<T> conv1d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias, std::size_t stride,
                      Padding padding = Padding::Same) {
  if (kernel.length() != input.channels()) {
    throw ShapeError("conv1d: input " + input.shape().str() + " has " +
                     std::to_string(input.channels()) + " channels but kernel " +
                     kernel.shape().str() + " expects " + std::to_string(kernel.length()));
  }
  const std::size_t c_out = kernel.channels();
  detail::check_bias(bias, c_out, "conv1d");
  const ConvGeometry g = conv_geometry(input.length(), kernel.batch(), stride, padding);
  const std::size_t rows = input.batch() * g.out_length;
  const std::size_t k = g.width * input.channels();
  const std::size_t step = detail::block_rows<T>(rows, k);
  std::vector<T> cols(step * k);
  const detail::ConstMatrixMap<T> K(kernel.data(), k, c_out);

  BasicTensor<T> out(Shape{input.batch(), g.out_length, c_out});
  for (std::size_t r0 = 0; r0 < rows; r0 += step) {
    const std::size_t n = std::min(step, rows - r0);
    detail::im2col(input, g, r0, r0 + n, cols.data());
    detail::MatrixMap<T>(out.data() + r0 * c_out, n, c_out).noalias() =
        detail::ConstMatrixMap<T>(cols.data(), n, k) * K;
  }
  detail::add_bias(out, bias);
  return out;
}

// Gradients of conv1d given the forward input and the output gradient.
template <typename T>
ConvGrads<T> conv1d_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                             const BasicTensor<T>& kernel, bool has_bias, std::size_t stride,
                             Padding padding = Padding::Same, bool need_input_grad = true,
                             bool need_kernel_grad = true) {
  if (kernel.length() != input.channels()) {
    throw ShapeError("conv1d_backward: cached input " + input.shape().str() +
                     " does not match kernel " + kernel.shape().str());
  }
  const ConvGeometry g = conv_geometry(input.length(), kernel.batch(), stride, padding);
  const std::size_t c_out = kernel.channels();
  if (grad_out.shape() != Shape{input.batch(), g.out_length, c_out}) {
    throw ShapeError("conv1d_backward: grad_out " + grad_out.shape().str() + " but forward produced " +
                     Shape{input.batch(), g.out_length, c_out}.str());
  }
  const std::size_t rows = input.batch() * g.out_length;
  const std::size_t k = g.width * input.channels();

  const std::size_t step = detail::block_rows<T>(rows, k);
  std::vector<T> cols(step * k);
  const detail::ConstMatrixMap<T> K(kernel.data(), k, c_out);

  ConvGrads<T> grads;
  if (need_kernel_grad) {
    grads.kernel = BasicTensor<T>(kernel.shape());
    detail::MatrixMap<T> dK(grads.kernel.data(), k, c_out);
    for (std::size_t r0 = 0; r0 < rows; r0 += step) {
      const std::size_t n = std::min(step, rows - r0);
      detail::im2col(input, g, r0, r0 + n, cols.data());
      dK.noalias() += detail::ConstMatrixMap<T>(cols.data(), n, k).transpose() *
                      detail::ConstMatrixMap<T>(grad_out.data() + r0 * c_out, n, c_out);
    }
    if (has_bias) grads.bias = detail::sum_rows(grad_out);
  }
  if (need_input_grad) {
    grads.input = BasicTensor<T>(input.shape());
    for (std::size_t r0 = 0; r0 < rows; r0 += step) {
      const std::size_t n = std::min(step, rows - r0);
      detail::MatrixMap<T>(cols.data(), n, k).noalias() =
          detail::ConstMatrixMap<T>(grad_out.data() + r0 * c_out, n, c_out) * K.transpose();
      detail::col2im(cols.data(), g, r0, r0 + n, grads.input);
    }
  }
  return grads;
}

// Fractionally strided convolution: the adjoint of conv1d (plus bias).
//   input  (batch, L, c_in)
//   kernel (width, c_out, c_in), laid out like the conv1d it transposes
//   bias   (1, 1, c_out) or empty
// returns (batch, L * stride, c_out)
template <typename T>
BasicTensor<T> conv1d_transpose(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                                const BasicTensor<T>& bias, std::size_t stride,
                                Padding padding = Padding::Same) {
  if (kernel.channels() != input.channels()) {
    throw ShapeError("conv1d_transpose: input " + input.shape().str() + " has " +
                     std::to_string(input.channels()) + " channels but kernel " +
                     kernel.shape().str() + " expects " + std::to_string(kernel.channels()));
  }
  const std::size_t c_out = kernel.length();
  detail::check_bias(bias, c_out, "conv1d_transpose");
  const ConvGeometry g = conv_geometry(input.length() * stride, kernel.batch(), stride, padding);
  const std::size_t rows = input.batch() * input.length();
  const std::size_t k = g.width * c_out;

  const std::size_t c_in = input.channels();
  const std::size_t step = detail::block_rows<T>(rows, k);
  std::vector<T> cols(step * k);
  const detail::ConstMatrixMap<T> K(kernel.data(), k, c_in);

  BasicTensor<T> out(Shape{input.batch(), g.in_length, c_out});
  for (std::size_t r0 = 0; r0 < rows; r0 += step) {
    const std::size_t n = std::min(step, rows - r0);
    detail::MatrixMap<T>(cols.data(), n, k).noalias() =
        detail::ConstMatrixMap<T>(input.data() + r0 * c_in, n, c_in) * K.transpose();
    detail::col2im(cols.data(), g, r0, r0 + n, out);
  }
  detail::add_bias(out, bias);
  return out;
}

template <typename T>
ConvGrads<T> conv1d_transpose_backward(const BasicTensor<T>& grad_out, const BasicTensor<T>& input,
                                       const BasicTensor<T>& kernel, bool has_bias,
                                       std::size_t stride, Padding padding = Padding::Same,
                                       bool need_input_grad = true, bool need_kernel_grad = true) {
  const std::size_t c_out = kernel.length();
  if (kernel.channels() != input.channels() ||
      grad_out.shape() != Shape{input.batch(), input.length() * stride, c_out}) {
    throw ShapeError("conv1d_transpose_backward: grad_out " + grad_out.shape().str() +
                     ", cached input " + input.shape().str() + ", kernel " +
                     kernel.shape().str() + " are inconsistent");
  }
  const ConvGeometry g = conv_geometry(grad_out.length(), kernel.batch(), stride, padding);
  const std::size_t rows = input.batch() * input.length();
  const std::size_t k = g.width * c_out;
  const std::size_t c_in = input.channels();
  const std::size_t step = detail::block_rows<T>(rows, k);
  std::vector<T> cols(step * k);
  const detail::ConstMatrixMap<T> K(kernel.data(), k, c_in);

  ConvGrads<T> grads;
  if (need_kernel_grad) grads.kernel = BasicTensor<T>(kernel.shape());
  if (need_input_grad) grads.input = BasicTensor<T>(input.shape());
  if (!need_kernel_grad && !need_input_grad) return grads;
  for (std::size_t r0 = 0; r0 < rows; r0 += step) {
    const std::size_t n = std::min(step, rows - r0);
    detail::im2col(grad_out, g, r0, r0 + n, cols.data());
    const detail::ConstMatrixMap<T> C(cols.data(), n, k);
    if (need_kernel_grad) {
      detail::MatrixMap<T>(grads.kernel.data(), k, c_in).noalias() +=
          C.transpose() * detail::ConstMatrixMap<T>(input.data() + r0 * c_in, n, c_in);
    }
    if (need_input_grad) detail::MatrixMap<T>(grads.input.data() + r0 * c_in, n, c_in).noalias() = C * K;
  }
  if (need_kernel_grad && has_bias) grads.bias = detail::sum_rows(grad_out);
  return grads;
}

}  // namespace wge
