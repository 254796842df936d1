#include "augraph/losses.hpp"

#include <cmath>

#include "augraph/errors.hpp"

namespace augraph {

namespace {
constexpr Scalar kProbEps = 1e-7;
}

Mat compute_weights(const Mat& rates) {
  if (rates.rows() != 1 || rates.cols() < 1) {
    throw ConfigError("compute_weights: rates must be a non-empty 1xN row");
  }
  const Eigen::Index n = rates.cols();
  Mat inv(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar r = rates(0, i);
    if (!(r > 0.0) || r > 1.0) {
      throw ConfigError("compute_weights: rate for AU " + std::to_string(i) + " is " +
                        std::to_string(r) + ", must lie in (0, 1]; a label that never " +
                        "occurs in the split cannot be weighted");
    }
    inv(0, i) = 1.0 / r;
  }
  return inv * (static_cast<Scalar>(n) / inv.sum());
}

OccurrenceStats make_occurrence_stats(const Mat& rates) {
  OccurrenceStats stats;
  stats.weights = compute_weights(rates);  // validates first
  stats.rates = rates;
  return stats;
}

TensorPtr weighted_asymmetric_loss(const TensorPtr& p, const Mat& y, const Mat& weights) {
  const Eigen::Index n = p->cols();
  if (p->rows() != 1) throw ShapeError("weighted_asymmetric_loss: p must be 1xN");
  if (y.rows() != 1 || y.cols() != n || weights.rows() != 1 || weights.cols() != n) {
    throw ShapeError("weighted_asymmetric_loss: p, y, weights must all be 1x" +
                     std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar pi = p->value(0, i);
    if (!(pi >= 0.0 && pi <= 1.0)) {
      throw ConfigError("weighted_asymmetric_loss: p[" + std::to_string(i) + "] = " +
                        std::to_string(pi) + " outside [0, 1]");
    }
    if (y(0, i) != 0.0 && y(0, i) != 1.0) {
      throw ConfigError("weighted_asymmetric_loss: y[" + std::to_string(i) + "] not binary");
    }
  }
  auto pc = clamp(p, kProbEps, 1.0 - kProbEps);
  auto y_on = constant(y);
  auto y_off = constant(Mat((1.0 - y.array()).matrix()));
  auto active = mul(y_on, log(pc));
  auto inactive = mul(y_off, mul(pc, log(add_scalar(neg(pc), 1.0))));
  auto weighted = mul(constant(weights), add(active, inactive));
  return mul_scalar(sum(weighted), -1.0 / static_cast<Scalar>(n));
}

int edge_label(int y_i, int y_j) {
  if ((y_i != 0 && y_i != 1) || (y_j != 0 && y_j != 1)) {
    throw ConfigError("edge_label: labels must be 0 or 1");
  }
  return 2 * y_i + y_j;
}

std::vector<int> edge_labels(const Mat& y) {
  if (y.rows() != 1 || y.cols() < 2) throw ConfigError("edge_labels: y must be 1xN, N >= 2");
  const int n = static_cast<int>(y.cols());
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      labels.push_back(edge_label(static_cast<int>(y(0, i)), static_cast<int>(y(0, j))));
    }
  }
  return labels;
}

TensorPtr edge_head(const TensorPtr& e, const Linear& shared_fc) {
  if (shared_fc.w->cols() != 4) {
    throw ConfigError("edge_head: shared map must produce 4 logits, has " +
                      std::to_string(shared_fc.w->cols()));
  }
  return shared_fc.apply(e);
}

std::vector<TensorPtr> edge_logits(const EdgeFeatureSet& edges, const Linear& shared_fc) {
  std::vector<TensorPtr> logits;
  logits.reserve(edges.size());
  for (const auto& e : edges.flat()) logits.push_back(edge_head(e, shared_fc));
  return logits;
}

TensorPtr edge_cooccurrence_loss(const std::vector<TensorPtr>& logits,
                                 const std::vector<int>& labels) {
  if (logits.empty()) throw ConfigError("edge_cooccurrence_loss: no edges");
  if (logits.size() != labels.size()) {
    throw ConfigError("edge_cooccurrence_loss: " + std::to_string(logits.size()) +
                      " logit vectors vs " + std::to_string(labels.size()) + " labels");
  }
  TensorPtr total;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const auto& z = logits[k];
    if (z->rows() != 1 || z->cols() != 4) {
      throw ShapeError("edge_cooccurrence_loss: logits must be 1x4, got " + shape_str(*z));
    }
    const int label = labels[k];
    if (label < 0 || label > 3) {
      throw ConfigError("edge_cooccurrence_loss: label " + std::to_string(label) +
                        " outside {0..3}");
    }
    // Shift by the detached row max: log-sum-exp stays finite and the shift
    // cancels exactly in lse - z[label].
    auto shifted = add_scalar(z, -z->value.maxCoeff());
    auto lse = log(sum(exp(shifted)));
    Mat onehot = Mat::Zero(1, 4);
    onehot(0, label) = 1.0;
    auto picked = sum(mul(shifted, constant(onehot)));
    auto ce = sub(lse, picked);
    total = total ? add(total, ce) : ce;
  }
  return mul_scalar(total, 1.0 / static_cast<Scalar>(logits.size()));
}

TensorPtr combined_loss(const TensorPtr& lwa, const TensorPtr& le, Scalar lambda) {
  if (lambda < 0.0) throw ConfigError("combined_loss: lambda must be non-negative");
  if (!lwa->is_scalar() || !le->is_scalar()) {
    throw ShapeError("combined_loss: both losses must be scalars");
  }
  return add(lwa, mul_scalar(le, lambda));
}

}  // namespace augraph
