#include "augraph/mefl.hpp"

#include <cmath>

#include "augraph/errors.hpp"
#include "augraph/linear.hpp"

namespace augraph {

EdgeFeatureSet::EdgeFeatureSet(int n_nodes) : n_(n_nodes) {
  if (n_nodes < 2) throw ConfigError("EdgeFeatureSet: need at least 2 nodes");
  edges_.resize(static_cast<std::size_t>(n_nodes) * (n_nodes - 1));
}

std::size_t EdgeFeatureSet::index_of(int n, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= n || j >= n) {
    throw ConfigError("EdgeFeatureSet: bad pair (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") for n=" + std::to_string(n));
  }
  return static_cast<std::size_t>(i) * (n - 1) + static_cast<std::size_t>(j > i ? j - 1 : j);
}

void EdgeFeatureSet::set(int i, int j, TensorPtr e) {
  edges_[index_of(n_, i, j)] = std::move(e);
}

const TensorPtr& EdgeFeatureSet::at(int i, int j) const {
  return edges_[index_of(n_, i, j)];
}

std::pair<int, int> EdgeFeatureSet::pair_at(std::size_t idx) const {
  const int i = static_cast<int>(idx / static_cast<std::size_t>(n_ - 1));
  const int r = static_cast<int>(idx % static_cast<std::size_t>(n_ - 1));
  const int j = r >= i ? r + 1 : r;
  return {i, j};
}

CrossAttention cross_attention_detailed(const TensorPtr& query_src, const TensorPtr& kv_src,
                                        const AttentionParams& p) {
  if (query_src->cols() != kv_src->cols()) {
    throw ShapeError("cross_attention: channel widths disagree, " + shape_str(*query_src) +
                     " vs " + shape_str(*kv_src));
  }
  if (p.w_q->rows() != query_src->cols()) {
    throw ShapeError("cross_attention: projections expect " + std::to_string(p.w_q->rows()) +
                     " channels, inputs have " + std::to_string(query_src->cols()));
  }
  const Scalar d_k = static_cast<Scalar>(p.w_k->cols());
  auto q = matmul(query_src, p.w_q);
  auto k = matmul(kv_src, p.w_k);
  auto v = matmul(kv_src, p.w_v);
  auto logits = mul_scalar(matmul(q, transpose(k)), 1.0 / std::sqrt(d_k));
  CrossAttention res;
  res.weights = softmax_rows(logits);
  res.out = matmul(res.weights, v);
  return res;
}

TensorPtr cross_attention(const TensorPtr& query_src, const TensorPtr& kv_src,
                          const AttentionParams& p) {
  return cross_attention_detailed(query_src, kv_src, p).out;
}

std::pair<TensorPtr, TensorPtr> fam(const TensorPtr& u_i, const TensorPtr& u_j,
                                    const TensorPtr& x, const AttentionParams& p_fam) {
  return {cross_attention(u_i, x, p_fam), cross_attention(u_j, x, p_fam)};
}

std::pair<TensorPtr, TensorPtr> arm(const TensorPtr& f_i, const TensorPtr& f_j,
                                    const AttentionParams& p_arm) {
  // The partner's attended feature acts as the query over this AU's feature.
  auto rel_ij = cross_attention(f_j, f_i, p_arm);
  auto rel_ji = cross_attention(f_i, f_j, p_arm);
  return {global_average_pool(rel_ij), global_average_pool(rel_ji)};
}

EdgeFeatureSet mefl_forward(const std::vector<TensorPtr>& u, const TensorPtr& x,
                            const MeflParams& params) {
  const int n = static_cast<int>(u.size());
  if (n < 2) throw ConfigError("mefl_forward: need at least 2 AU maps");
  for (const auto& m : u) {
    if (m->rows() != x->rows() || m->cols() != x->cols()) {
      throw ShapeError("mefl_forward: AU map " + shape_str(*m) + " does not match input " +
                       shape_str(*x));
    }
  }
  // Each AU's attended feature is independent of its partner, so compute it
  // once and share the node across every pair it participates in.
  std::vector<TensorPtr> attended;
  attended.reserve(u.size());
  for (const auto& m : u) attended.push_back(cross_attention(m, x, params.fam));

  EdgeFeatureSet edges(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto [e_ij, e_ji] = arm(attended[static_cast<std::size_t>(i)],
                              attended[static_cast<std::size_t>(j)], params.arm);
      edges.set(i, j, std::move(e_ij));
      edges.set(j, i, std::move(e_ji));
    }
  }
  return edges;
}

AttentionParams make_attention_params(Eigen::Index channels, Rng& rng) {
  return {make_weight(channels, channels, rng), make_weight(channels, channels, rng),
          make_weight(channels, channels, rng)};
}

MeflParams make_mefl_params(Eigen::Index channels, Rng& rng) {
  return {make_attention_params(channels, rng), make_attention_params(channels, rng)};
}

}  // namespace augraph
