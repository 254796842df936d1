#pragma once

#include <vector>

#include "augraph/linear.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// Directed K-nearest-neighbour graph over the AU nodes. Plain matrix, not a
/// tape tensor: neighbour selection is discrete and acts as a constant in the
/// backward pass.
struct Adjacency {
  Mat a;  // N x N, entries in {0, 1}, zero diagonal, each row sums to k
  int k = 0;
};

/// Message/update maps of the node-feature GCN layer; both C x C so the
/// residual addition is well-typed. No biases.
struct GcnLayerParams {
  TensorPtr w_msg;
  TensorPtr w_upd;
};

/// Everything the stage-1 node-feature branch owns: one affine map per AU,
/// the GCN layer, the per-AU classifier anchors, and the neighbour count.
struct AnflParams {
  std::vector<Linear> per_au_fc;  // N maps, each C -> C
  GcnLayerParams gcn;
  TensorPtr sc_anchors;  // N x C, row i is the anchor for AU i
  int k = 0;
};

struct AfgResult {
  std::vector<TensorPtr> u;  // N feature maps, each D x C
  TensorPtr v;               // N x C node features (row i = GAP(u[i]))
};

struct AnflResult {
  TensorPtr p;               // 1 x N activation probabilities
  std::vector<TensorPtr> u;  // AU-specific feature maps, reused downstream
  TensorPtr v;               // node features before the GCN update
  TensorPtr v_fgg;           // node features after the GCN update
  Adjacency adj;
};

/// Per-AU feature extraction: u_i = x * W_i + b_i, v_i = column means of u_i.
AfgResult afg_forward(const TensorPtr& x, const std::vector<Linear>& per_au_fc);

/// Directed top-K graph under the raw dot-product similarity v_i . v_j.
/// Ties broken toward the smaller node index.
Adjacency build_topology(const Mat& v, int k);

/// v_i <- ReLU(v_i + (sum_j a_ij * v_j W_msg) W_upd); adjacency is constant.
TensorPtr fgg_gcn_layer(const TensorPtr& v, const Adjacency& adj, const GcnLayerParams& p);

/// p_i = cosine(ReLU(v_i), ReLU(s_i)) with 1e-8 added to each norm, so a
/// zero activation vector scores exactly 0. Output lies in [0, 1].
TensorPtr sc_predict(const TensorPtr& v, const TensorPtr& anchors);

/// Full stage-1 branch: AFG -> topology -> GCN -> SC.
AnflResult anfl_forward(const TensorPtr& x, const AnflParams& params);

/// Fresh parameters: uniform fan-in affine maps and 0.1-scaled normal anchors.
AnflParams make_anfl_params(int n_au, Eigen::Index channels, int k, Rng& rng);

}  // namespace augraph
