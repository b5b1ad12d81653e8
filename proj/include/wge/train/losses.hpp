#pragma once

#include <cmath>
#include <string>

#include "wge/core/error.hpp"
#include "wge/core/tensor.hpp"

namespace wge {

struct DLoss {
  double real = 0.0;  // ½ mean (real - s)²
  double fake = 0.0;  // ½ mean fake²
  double total() const { return real + fake; }
};

struct GLoss {
  double adv = 0.0;  // mean (fake - 1)²
  double l1 = 0.0;   // mean |x̂ - x|
  double total = 0.0;
};

namespace detail {
inline void require_scores(const Tensor& s, const char* what) {
  if (s.empty()) throw ShapeError(std::string(what) + ": empty batch");
  if (s.length() != 1 || s.channels() != 1) throw ShapeError(std::string(what) + ": scores must be (b, 1, 1)");
}
}  // namespace detail

inline double d_loss_real(const Tensor& real, double s) {
  detail::require_scores(real, "d_loss");
  // target rounded like the scores so exact hits give exactly 0
  const double t = static_cast<float>(s);
  double acc = 0.0;
  for (float v : real.values()) acc += (v - t) * (v - t);
  return 0.5 * acc / static_cast<double>(real.size());
}

inline double d_loss_fake(const Tensor& fake) {
  detail::require_scores(fake, "d_loss");
  double acc = 0.0;
  for (float v : fake.values()) acc += double(v) * v;
  return 0.5 * acc / static_cast<double>(fake.size());
}

inline DLoss d_loss(const Tensor& real, const Tensor& fake, double s) {
  return {d_loss_real(real, s), d_loss_fake(fake)};
}

// d/d(real) of d_loss_real and d/d(fake) of d_loss_fake.
inline Tensor d_loss_real_grad(const Tensor& real, double s) {
  Tensor g(real.shape());
  const double inv = 1.0 / static_cast<double>(real.size());
  const double t = static_cast<float>(s);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>((real[i] - t) * inv);
  return g;
}

inline Tensor d_loss_fake_grad(const Tensor& fake) {
  Tensor g(fake.shape());
  const double inv = 1.0 / static_cast<double>(fake.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>(fake[i] * inv);
  return g;
}

inline GLoss g_loss(const Tensor& fake, const Tensor& x_hat, const Tensor& x, double lambda_l1) {
  detail::require_scores(fake, "g_loss");
  x_hat.require_same_shape(x, "g_loss");
  if (x_hat.batch() != fake.batch()) throw ShapeError("g_loss: score and waveform batches differ");
  GLoss l;
  double acc = 0.0;
  for (float v : fake.values()) acc += (v - 1.0) * (v - 1.0);
  l.adv = acc / static_cast<double>(fake.size());
  acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(double(x_hat[i]) - x[i]);
  l.l1 = acc / static_cast<double>(x.size());
  l.total = l.adv + lambda_l1 * l.l1;
  return l;
}

inline Tensor g_loss_adv_grad(const Tensor& fake) {
  Tensor g(fake.shape());
  const double inv = 2.0 / static_cast<double>(fake.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<float>((fake[i] - 1.0) * inv);
  return g;
}

}  // namespace wge
