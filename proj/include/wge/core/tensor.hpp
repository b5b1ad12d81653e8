#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wge/core/error.hpp"

namespace wge {

// Rank-3 extent. Signal tensors read it as (batch, length, channels);
// kernels reuse the same container as (width, c_in, c_out).
struct Shape {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::size_t channels = 0;

  constexpr std::size_t size() const noexcept { return batch * length * channels; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    std::ostringstream os;
    os << '(' << batch << ", " << length << ", " << channels << ')';
    return os.str();
  }
};

inline std::ostream& operator<<(std::ostream& os, const Shape& s) { return os << s.str(); }

// Dense rank-3 array, row-major with batch outermost and channels innermost.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(shape), data_(shape.size(), fill) {}

  BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("tensor data of size " + std::to_string(data_.size()) +
                       " does not fit shape " + shape_.str());
    }
  }

  // Column vector of samples: shape (1, n, 1).
  static BasicTensor from_signal(std::span<const T> samples) {
    return BasicTensor(Shape{1, samples.size(), 1}, std::vector<T>(samples.begin(), samples.end()));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t batch() const noexcept { return shape_.batch; }
  std::size_t length() const noexcept { return shape_.length; }
  std::size_t channels() const noexcept { return shape_.channels; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  std::size_t index(std::size_t b, std::size_t i, std::size_t c) const noexcept {
    return (b * shape_.length + i) * shape_.channels + c;
  }
  T& operator()(std::size_t b, std::size_t i, std::size_t c) noexcept { return data_[index(b, i, c)]; }
  const T& operator()(std::size_t b, std::size_t i, std::size_t c) const noexcept {
    return data_[index(b, i, c)];
  }
  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  // Pointer to the (length, channels) slab of one batch item.
  T* item(std::size_t b) noexcept { return data_.data() + b * shape_.length * shape_.channels; }
  const T* item(std::size_t b) const noexcept {
    return data_.data() + b * shape_.length * shape_.channels;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  // Same data, new extent with equal element count.
  BasicTensor reshaped(Shape shape) const {
    if (shape.size() != size()) {
      throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    }
    return BasicTensor(shape, data_);
  }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  BasicTensor& operator+=(const BasicTensor& other) {
    require_same_shape(other, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }

  BasicTensor& operator*=(T scale) {
    for (auto& v : data_) v *= scale;
    return *this;
  }

  void require_same_shape(const BasicTensor& other, const char* op) const {
    if (other.shape_ != shape_) {
      throw ShapeError(std::string(op) + ": shape " + shape_.str() + " vs " + other.shape_.str());
    }
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

}  // namespace wge
