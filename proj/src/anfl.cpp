#include "augraph/anfl.hpp"

#include <algorithm>
#include <numeric>

#include "augraph/errors.hpp"

namespace augraph {

AfgResult afg_forward(const TensorPtr& x, const std::vector<Linear>& per_au_fc) {
  if (per_au_fc.empty()) throw ConfigError("afg_forward: no per-AU maps");
  if (!x->value.allFinite()) throw NumericError("afg_forward: non-finite input");
  AfgResult out;
  out.u.reserve(per_au_fc.size());
  std::vector<TensorPtr> pooled;
  pooled.reserve(per_au_fc.size());
  for (const auto& fc : per_au_fc) {
    if (fc.w->rows() != x->cols()) {
      throw ShapeError("afg_forward: input has " + std::to_string(x->cols()) +
                       " channels but map expects " + std::to_string(fc.w->rows()));
    }
    auto u = fc.apply(x);
    pooled.push_back(global_average_pool(u));
    out.u.push_back(std::move(u));
  }
  out.v = concat_rows(pooled);
  return out;
}

Adjacency build_topology(const Mat& v, int k) {
  const Eigen::Index n = v.rows();
  if (n < 2) throw ConfigError("build_topology: need at least 2 nodes");
  if (k < 1 || k > n - 1) {
    throw ConfigError("build_topology: K=" + std::to_string(k) + " outside [1, " +
                      std::to_string(n - 1) + "]");
  }
  Adjacency adj;
  adj.k = k;
  adj.a = Mat::Zero(n, n);
  const Mat sim = v * v.transpose();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    // Descending similarity; equal scores fall back to the smaller index.
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
      return a < b;
    });
    for (int r = 0; r < k; ++r) adj.a(i, order[static_cast<std::size_t>(r)]) = 1.0;
  }
  return adj;
}

TensorPtr fgg_gcn_layer(const TensorPtr& v, const Adjacency& adj, const GcnLayerParams& p) {
  if (adj.a.rows() != v->rows() || adj.a.cols() != v->rows()) {
    throw ShapeError("fgg_gcn_layer: adjacency is " + std::to_string(adj.a.rows()) + "x" +
                     std::to_string(adj.a.cols()) + " for " + std::to_string(v->rows()) + " nodes");
  }
  if (p.w_msg->rows() != v->cols() || p.w_msg->cols() != v->cols() ||
      p.w_upd->rows() != v->cols() || p.w_upd->cols() != v->cols()) {
    throw ShapeError("fgg_gcn_layer: GCN maps must be CxC with C=" + std::to_string(v->cols()));
  }
  auto messages = matmul(constant(adj.a), matmul(v, p.w_msg));
  return relu(add(v, matmul(messages, p.w_upd)));
}

TensorPtr sc_predict(const TensorPtr& v, const TensorPtr& anchors) {
  if (v->rows() != anchors->rows() || v->cols() != anchors->cols()) {
    throw ShapeError("sc_predict: features " + shape_str(*v) + " vs anchors " +
                     shape_str(*anchors));
  }
  auto rv = relu(v);
  auto rs = relu(anchors);
  std::vector<TensorPtr> scores;
  scores.reserve(static_cast<std::size_t>(v->rows()));
  for (Eigen::Index i = 0; i < v->rows(); ++i) {
    auto a = row(rv, i);
    auto b = row(rs, i);
    auto dot = sum(mul(a, b));
    auto na = add_scalar(sqrt(sum(mul(a, a))), 1e-8);
    auto nb = add_scalar(sqrt(sum(mul(b, b))), 1e-8);
    scores.push_back(div(dot, mul(na, nb)));
  }
  return concat_cols(scores);
}

AnflResult anfl_forward(const TensorPtr& x, const AnflParams& params) {
  AnflResult out;
  auto afg = afg_forward(x, params.per_au_fc);
  out.u = std::move(afg.u);
  out.v = afg.v;
  out.adj = build_topology(out.v->value, params.k);
  out.v_fgg = fgg_gcn_layer(out.v, out.adj, params.gcn);
  out.p = sc_predict(out.v_fgg, params.sc_anchors);
  return out;
}

AnflParams make_anfl_params(int n_au, Eigen::Index channels, int k, Rng& rng) {
  if (n_au < 2) throw ConfigError("make_anfl_params: need at least 2 AUs");
  AnflParams params;
  params.k = k;
  params.per_au_fc.reserve(static_cast<std::size_t>(n_au));
  for (int i = 0; i < n_au; ++i) {
    params.per_au_fc.push_back(make_linear(channels, channels, rng));
  }
  params.gcn = {make_weight(channels, channels, rng), make_weight(channels, channels, rng)};
  params.sc_anchors = make_anchors(n_au, channels, rng);
  return params;
}

}  // namespace augraph
