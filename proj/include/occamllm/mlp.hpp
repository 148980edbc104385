// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace occamllm {

template <typename Scalar>
Scalar silu(Scalar z) {
  return z / (Scalar(1) + std::exp(-z));
}

template <typename Scalar>
Scalar silu_grad(Scalar z) {
  const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-z));
  return s * (Scalar(1) + z * (Scalar(1) - s));
}

/// Two-layer perceptron: out = W2 silu(W1 x + b1) + b2.
template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // width x in
  Vector b1;
  Matrix w2;  // out x width
  Vector b2;

  struct Cache {
    Vector x;
    Vector pre;   // W1 x + b1
    Vector post;  // silu(pre)
  };

  Mlp() = default;

  /// He-style first layer; the output layer starts at zero when
  /// `zero_output` is set.
  Mlp(int in, int width, int out, std::mt19937_64& rng, bool zero_output)
      : w1(width, in), b1(Vector::Zero(width)), w2(Matrix::Zero(out, width)), b2(Vector::Zero(out)) {
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
    for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = Scalar(n(rng));
    if (!zero_output) {
      std::normal_distribution<double> m(0.0, 1.0 / std::sqrt(static_cast<double>(width)));
      for (Eigen::Index i = 0; i < w2.size(); ++i) w2.data()[i] = Scalar(m(rng));
    }
  }

  int in_dim() const { return static_cast<int>(w1.cols()); }
  int width() const { return static_cast<int>(w1.rows()); }
  int out_dim() const { return static_cast<int>(w2.rows()); }
  Eigen::Index param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  Vector forward(const Vector& x, Cache* cache = nullptr) const {
    Vector pre = w1 * x + b1;
    Vector post = pre.unaryExpr([](Scalar z) { return silu(z); });
    Vector out = w2 * post + b2;
    if (cache != nullptr) *cache = Cache{x, std::move(pre), std::move(post)};
    return out;
  }

  /// Accumulates parameter gradients into `grad` (same layout as this) and
  /// returns d loss / d x.
  Vector backward(const Cache& cache, const Vector& d_out, Mlp& grad) const {
    grad.w2.noalias() += d_out * cache.post.transpose();
    grad.b2 += d_out;
    const Vector d_pre =
        (w2.transpose() * d_out).cwiseProduct(cache.pre.unaryExpr([](Scalar z) { return silu_grad(z); }));
    grad.w1.noalias() += d_pre * cache.x.transpose();
    grad.b1 += d_pre;
    return w1.transpose() * d_pre;
  }

  Mlp zeros_like() const {
    Mlp z;
    z.w1 = Matrix::Zero(w1.rows(), w1.cols());
    z.b1 = Vector::Zero(b1.size());
    z.w2 = Matrix::Zero(w2.rows(), w2.cols());
    z.b2 = Vector::Zero(b2.size());
    return z;
  }

  /// Visits the parameter blocks in a fixed order: w1, b1, w2, b2.
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    fn(w1.data(), w1.size());
    fn(b1.data(), b1.size());
    fn(w2.data(), w2.size());
    fn(b2.data(), b2.size());
  }
  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    fn(w1.data(), w1.size());
    fn(b1.data(), b1.size());
    fn(w2.data(), w2.size());
    fn(b2.data(), b2.size());
  }
};

}  // namespace occamllm
