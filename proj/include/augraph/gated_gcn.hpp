#pragma once

#include <vector>

#include "augraph/mefl.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// The AU relation graph at one layer of the classifier: node features,
/// the dense directed edge features, and how far through the stack it is.
struct RelationGraph {
  TensorPtr nodes;       // N x C
  EdgeFeatureSet edges;  // all N(N-1) directed entries, each 1 x C
  int layer_index = 0;
  int total_layers = 0;
};

/// Five square maps of one gated layer: node self (w1), node neighbour (w2),
/// edge self (w3), edge source node (w4), edge target node (w5).
struct GatedGcnLayerParams {
  TensorPtr w1;
  TensorPtr w2;
  TensorPtr w3;
  TensorPtr w4;
  TensorPtr w5;
};

struct GatedGcnParams {
  std::vector<GatedGcnLayerParams> layers;  // one entry per layer, L >= 1
  TensorPtr sc_anchors;                     // stage-2 classifier, N x C
};

constexpr Scalar kGateEpsilon = 1e-6;

struct GcnForwardResult {
  TensorPtr p;  // 1 x N probabilities
  RelationGraph graph;
};

/// One residual gated update of nodes and edges:
///   e'_ij = e_ij + ReLU(e_ij w3 + v_i w4 + v_j w5)
///   eta_ij = sigmoid(e'_ij) / (sum_{j'!=i} sigmoid(e'_ij') + eps)   (per channel)
///   v'_i  = v_i + ReLU(v_i w1 + sum_{j!=i} eta_ij * (v_j w2))
RelationGraph gated_layer(const RelationGraph& g, const GatedGcnLayerParams& p);

/// SC prediction over the final node features; requires the full stack to
/// have run (layer_index == total_layers).
TensorPtr classify(const RelationGraph& g, const TensorPtr& sc_anchors);

/// Applies every configured layer then classifies; the final graph is
/// returned so its edge features can feed the co-occurrence head.
GcnForwardResult gcn_forward(const TensorPtr& v0, const EdgeFeatureSet& e0,
                             const GatedGcnParams& params);

GatedGcnParams make_gated_gcn_params(int n_au, Eigen::Index channels, int n_layers, Rng& rng);

}  // namespace augraph
