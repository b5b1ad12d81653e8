#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wge/core/error.hpp"

namespace wge {

struct LpcResult {
  std::vector<double> a;  // a[0] = 1; A(z) = sum a_k z^-k
  double error = 0.0;     // final prediction error power (unnormalized, r[0] scale)
  std::vector<double> errors;  // error after each order 0..p
};

inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < x.size(); ++k) {
    double acc = 0.0;
    for (std::size_t n = k; n < x.size(); ++n) acc += x[n] * x[n - k];
    r[k] = acc;
  }
  return r;
}

// Levinson-Durbin on r[0..p]. Stops early (higher coefficients 0) if the
// error collapses, which only happens for (numerically) perfectly predictable input.
inline LpcResult levinson_durbin(std::span<const double> r, std::size_t order) {
  if (r.size() < order + 1) throw ShapeError("levinson_durbin: need " + std::to_string(order + 1) + " lags");
  if (!(r[0] > 0.0)) throw DataError("lpc: zero-energy frame");
  LpcResult res;
  res.a.assign(order + 1, 0.0);
  res.a[0] = 1.0;
  double err = r[0];
  res.errors.push_back(err);
  std::vector<double> prev(order + 1);
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += res.a[j] * r[i - j];
    const double k = -acc / err;
    const double next_err = err * (1.0 - k * k);
    if (!(next_err > 0.0) || std::abs(k) >= 1.0) {
      res.errors.resize(order + 1, err);
      break;
    }
    prev = res.a;
    for (std::size_t j = 1; j < i; ++j) res.a[j] = prev[j] + k * prev[i - j];
    res.a[i] = k;
    err = next_err;
    res.errors.push_back(err);
  }
  res.error = err;
  return res;
}

inline LpcResult lpc(std::span<const double> frame, std::size_t order) {
  if (frame.size() <= order) {
    throw ShapeError("lpc: frame of " + std::to_string(frame.size()) + " samples is too short for order " +
                     std::to_string(order));
  }
  const auto r = autocorrelation(frame, order);
  return levinson_durbin(r, order);
}

// c_m = -a_m - sum_{k=1}^{m-1} (k/m) c_k a_{m-k}, with a_m = 0 for m > p.
inline std::vector<double> lpc_to_cepstrum(std::span<const double> a, std::size_t n_ceps) {
  if (a.empty() || a[0] != 1.0) throw ConfigError("lpc_to_cepstrum: a[0] must be 1");
  const std::size_t p = a.size() - 1;
  std::vector<double> c(n_ceps + 1, 0.0);  // c[0] unused
  for (std::size_t m = 1; m <= n_ceps; ++m) {
    double acc = m <= p ? -a[m] : 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      if (m - k <= p) acc -= (static_cast<double>(k) / static_cast<double>(m)) * c[k] * a[m - k];
    }
    c[m] = acc;
  }
  return {c.begin() + 1, c.end()};
}

// a R aᵀ with R the Toeplitz matrix of r.
inline double toeplitz_quadratic(std::span<const double> a, std::span<const double> r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[i] * r[i > j ? i - j : j - i] * a[j];
  return acc;
}

}  // namespace wge
