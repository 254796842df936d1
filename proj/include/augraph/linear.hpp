#pragma once

#include "augraph/rng.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// Dense affine map applied to row-vector features: y = x * w + b.
/// `w` is in_dim x out_dim, `b` a 1 x out_dim row broadcast over x's rows.
struct Linear {
  TensorPtr w;
  TensorPtr b;

  TensorPtr apply(const TensorPtr& x) const { return add(matmul(x, w), b); }
};

/// Uniform fan-in initialization: every entry of w and b drawn from
/// [-1/sqrt(in_dim), +1/sqrt(in_dim)].
inline Linear make_linear(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng) {
  const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(in_dim));
  Mat w(in_dim, out_dim);
  for (Eigen::Index i = 0; i < in_dim; ++i)
    for (Eigen::Index j = 0; j < out_dim; ++j) w(i, j) = rng.uniform(-bound, bound);
  Mat b(1, out_dim);
  for (Eigen::Index j = 0; j < out_dim; ++j) b(0, j) = rng.uniform(-bound, bound);
  return {variable(std::move(w)), variable(std::move(b))};
}

/// Bias-free linear map with the same uniform fan-in initialization.
inline TensorPtr make_weight(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng) {
  const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(in_dim));
  Mat w(in_dim, out_dim);
  for (Eigen::Index i = 0; i < in_dim; ++i)
    for (Eigen::Index j = 0; j < out_dim; ++j) w(i, j) = rng.uniform(-bound, bound);
  return variable(std::move(w));
}

/// Classifier anchor block: seeded standard normal entries scaled by 0.1.
inline TensorPtr make_anchors(Eigen::Index n_rows, Eigen::Index channels, Rng& rng) {
  Mat a(n_rows, channels);
  for (Eigen::Index i = 0; i < n_rows; ++i)
    for (Eigen::Index j = 0; j < channels; ++j) a(i, j) = 0.1 * rng.normal();
  return variable(std::move(a));
}

}  // namespace augraph
