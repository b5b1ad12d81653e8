#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wge/core/conv.hpp"
#include "wge/core/layers.hpp"
#include "wge/core/random.hpp"
#include "wge/core/tensor.hpp"

namespace wge {

// Central differences (f(x + h) - f(x - h)) / 2h, one element at a time.
inline TensorD finite_diff_grad(const std::function<double(const TensorD&)>& f, const TensorD& x,
                                double h = 1e-5) {
  TensorD grad(x.shape());
  TensorD probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = f(probe);
    probe[k] = orig - h;
    const double down = f(probe);
    probe[k] = orig;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||); zero when both vanish.
inline double relative_error(const TensorD& analytic, const TensorD& numeric) {
  analytic.require_same_shape(numeric, "relative_error");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
    na += analytic[k] * analytic[k];
    nn += numeric[k] * numeric[k];
  }
  const double scale = std::sqrt(std::max(na, nn));
  return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

struct GradCheckResult {
  std::string op;
  std::size_t instances = 0;
  double worst_relative_error = 0.0;
  bool passed = false;
};

namespace detail {

inline TensorD random_tensor(Rng& rng, Shape shape, double kink_margin = 0.0) {
  TensorD t(shape);
  for (auto& v : t.values()) {
    double x;
    do x = rng.uniform(-1.0, 1.0);
    while (std::abs(x) < kink_margin);
    v = x;
  }
  return t;
}

inline double dot(const TensorD& a, const TensorD& b) {
  a.require_same_shape(b, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

class GradSuite {
 public:
  GradSuite(std::size_t instances, std::uint64_t seed, double tolerance, double h)
      : instances_(instances), rng_(seed), tolerance_(tolerance), h_(h) {}

  template <typename Case>
  void run(const std::string& name, Case&& one_instance) {
    GradCheckResult r{name, instances_, 0.0, true};
    for (std::size_t i = 0; i < instances_; ++i) {
      r.worst_relative_error = std::max(r.worst_relative_error, one_instance(rng_));
    }
    r.passed = r.worst_relative_error < tolerance_;
    results_.push_back(r);
  }

  double h() const { return h_; }
  std::vector<GradCheckResult> results() const { return results_; }

 private:
  std::size_t instances_;
  Rng rng_;
  double tolerance_;
  double h_;
  std::vector<GradCheckResult> results_;
};

}  // namespace detail

// Checks every differentiable primitive against central differences on
// random small instances.
inline std::vector<GradCheckResult> run_gradient_suite(std::size_t instances = 20,
                                                       std::uint64_t seed = 1234,
                                                       double tolerance = 1e-4, double h = 1e-5) {
  using detail::dot;
  using detail::pick;
  using detail::random_tensor;
  detail::GradSuite suite(instances, seed, tolerance, h);

  suite.run("conv1d", [&](Rng& rng) {
    const std::size_t b = pick(rng, 1, 2), len = pick(rng, 4, 9), cin = pick(rng, 1, 3),
                      cout = pick(rng, 1, 3), width = pick(rng, 1, 5), stride = pick(rng, 1, 3);
    const Padding pad = rng.below(4) == 0 ? Padding::Causal : Padding::Same;
    const TensorD x = random_tensor(rng, {b, len, cin});
    const TensorD k = random_tensor(rng, {width, cin, cout});
    const TensorD bias = random_tensor(rng, {1, 1, cout});
    const TensorD r = random_tensor(rng, conv1d(x, k, bias, stride, pad).shape());
    const auto g = conv1d_backward(r, x, k, true, stride, pad);
    double worst = relative_error(
        g.input, finite_diff_grad([&](const TensorD& v) { return dot(conv1d(v, k, bias, stride, pad), r); },
                                  x, suite.h()));
    worst = std::max(worst, relative_error(g.kernel, finite_diff_grad([&](const TensorD& v) {
                                             return dot(conv1d(x, v, bias, stride, pad), r);
                                           }, k, suite.h())));
    worst = std::max(worst, relative_error(g.bias, finite_diff_grad([&](const TensorD& v) {
                                             return dot(conv1d(x, k, v, stride, pad), r);
                                           }, bias, suite.h())));
    return worst;
  });

  suite.run("conv1d_transpose", [&](Rng& rng) {
    const std::size_t b = pick(rng, 1, 2), len = pick(rng, 2, 6), cin = pick(rng, 1, 3),
                      cout = pick(rng, 1, 3), width = pick(rng, 1, 5), stride = pick(rng, 1, 3);
    const TensorD x = random_tensor(rng, {b, len, cin});
    const TensorD k = random_tensor(rng, {width, cout, cin});
    const TensorD bias = random_tensor(rng, {1, 1, cout});
    const TensorD r = random_tensor(rng, conv1d_transpose(x, k, bias, stride).shape());
    const auto g = conv1d_transpose_backward(r, x, k, true, stride);
    double worst = relative_error(g.input, finite_diff_grad([&](const TensorD& v) {
                                    return dot(conv1d_transpose(v, k, bias, stride), r);
                                  }, x, suite.h()));
    worst = std::max(worst, relative_error(g.kernel, finite_diff_grad([&](const TensorD& v) {
                                             return dot(conv1d_transpose(x, v, bias, stride), r);
                                           }, k, suite.h())));
    worst = std::max(worst, relative_error(g.bias, finite_diff_grad([&](const TensorD& v) {
                                             return dot(conv1d_transpose(x, k, v, stride), r);
                                           }, bias, suite.h())));
    return worst;
  });

  suite.run("prelu", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 2), pick(rng, 2, 8), pick(rng, 1, 4)};
    const TensorD x = random_tensor(rng, s, 0.05);
    const TensorD slope = random_tensor(rng, {1, 1, s.channels});
    const TensorD r = random_tensor(rng, s);
    const auto g = prelu_backward(r, x, slope);
    double worst = relative_error(
        g.input, finite_diff_grad([&](const TensorD& v) { return dot(prelu(v, slope), r); }, x, suite.h()));
    return std::max(worst, relative_error(g.slope, finite_diff_grad([&](const TensorD& v) {
                                            return dot(prelu(x, v), r);
                                          }, slope, suite.h())));
  });

  suite.run("leaky_relu", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 2), pick(rng, 2, 8), pick(rng, 1, 4)};
    const TensorD x = random_tensor(rng, s, 0.05);
    const TensorD r = random_tensor(rng, s);
    return relative_error(leaky_relu_backward(r, x, 0.3),
                          finite_diff_grad([&](const TensorD& v) { return dot(leaky_relu(v, 0.3), r); },
                                           x, suite.h()));
  });

  suite.run("instance_norm", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 2), pick(rng, 2, 8), pick(rng, 1, 3)};
    const TensorD x = random_tensor(rng, s);
    const TensorD r = random_tensor(rng, s);
    return relative_error(
        instance_norm_backward(r, x, 1e-5),
        finite_diff_grad([&](const TensorD& v) { return dot(instance_norm(v, 1e-5), r); }, x, suite.h()));
  });

  suite.run("dense", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 3)};
    const std::size_t m = pick(rng, 1, 3);
    const TensorD x = random_tensor(rng, s);
    const TensorD w = random_tensor(rng, {1, s.length * s.channels, m});
    const TensorD bias = random_tensor(rng, {1, 1, m});
    const TensorD r = random_tensor(rng, {s.batch, 1, m});
    const auto g = dense_backward(r, x, w, true);
    double worst = relative_error(
        g.input, finite_diff_grad([&](const TensorD& v) { return dot(dense(v, w, bias), r); }, x, suite.h()));
    worst = std::max(worst, relative_error(g.weight, finite_diff_grad([&](const TensorD& v) {
                                             return dot(dense(x, v, bias), r);
                                           }, w, suite.h())));
    return std::max(worst, relative_error(g.bias, finite_diff_grad([&](const TensorD& v) {
                                            return dot(dense(x, w, v), r);
                                          }, bias, suite.h())));
  });

  suite.run("concat_channels", [&](Rng& rng) {
    const std::size_t b = pick(rng, 1, 2), len = pick(rng, 1, 5), c1 = pick(rng, 1, 3), c2 = pick(rng, 1, 3);
    const TensorD a = random_tensor(rng, {b, len, c1});
    const TensorD bb = random_tensor(rng, {b, len, c2});
    const TensorD r = random_tensor(rng, {b, len, c1 + c2});
    const auto [ga, gb] = split_channels(r, c1);
    double worst = relative_error(
        ga, finite_diff_grad([&](const TensorD& v) { return dot(concat_channels(v, bb), r); }, a, suite.h()));
    return std::max(worst, relative_error(gb, finite_diff_grad([&](const TensorD& v) {
                                            return dot(concat_channels(a, v), r);
                                          }, bb, suite.h())));
  });

  suite.run("l1_loss", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 2), pick(rng, 1, 6), pick(rng, 1, 2)};
    const TensorD a = random_tensor(rng, s);
    TensorD b = random_tensor(rng, s);
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (std::abs(a[k] - b[k]) < 0.05) b[k] = a[k] + 0.1;
    }
    return relative_error(l1_loss_backward(a, b),
                          finite_diff_grad([&](const TensorD& v) { return l1_loss(v, b); }, a, suite.h()));
  });

  suite.run("mse_loss", [&](Rng& rng) {
    const Shape s{pick(rng, 1, 2), pick(rng, 1, 6), pick(rng, 1, 2)};
    const TensorD a = random_tensor(rng, s);
    const TensorD b = random_tensor(rng, s);
    return relative_error(mse_loss_backward(a, b),
                          finite_diff_grad([&](const TensorD& v) { return mse_loss(v, b); }, a, suite.h()));
  });

  return suite.results();
}

}  // namespace wge
