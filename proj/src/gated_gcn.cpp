#include "augraph/gated_gcn.hpp"

#include <cmath>

#include "augraph/anfl.hpp"
#include "augraph/errors.hpp"
#include "augraph/linear.hpp"

namespace augraph {

RelationGraph gated_layer(const RelationGraph& g, const GatedGcnLayerParams& p) {
  if (g.layer_index >= g.total_layers) {
    throw ConfigError("gated_layer: graph already passed through all " +
                      std::to_string(g.total_layers) + " layers");
  }
  const int n = static_cast<int>(g.nodes->rows());
  if (g.edges.nodes() != n) {
    throw ShapeError("gated_layer: " + std::to_string(n) + " nodes but edges built for " +
                     std::to_string(g.edges.nodes()));
  }

  RelationGraph out;
  out.layer_index = g.layer_index + 1;
  out.total_layers = g.total_layers;
  out.edges = EdgeFeatureSet(n);

  // Edge update first; the gates are derived from the updated edges.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      auto mix = add(add(matmul(g.edges.at(i, j), p.w3), matmul(row(g.nodes, i), p.w4)),
                     matmul(row(g.nodes, j), p.w5));
      out.edges.set(i, j, add(g.edges.at(i, j), relu(mix)));
    }
  }

  std::vector<TensorPtr> new_rows;
  new_rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Per-channel softmax-like gate over node i's outgoing edges.
    std::vector<TensorPtr> sig;
    sig.reserve(static_cast<std::size_t>(n - 1));
    TensorPtr denom;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      auto s = sigmoid(out.edges.at(i, j));
      denom = denom ? add(denom, s) : s;
      sig.push_back(std::move(s));
    }
    denom = add_scalar(denom, kGateEpsilon);

    TensorPtr message;
    std::size_t at = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      auto gated = mul(div(sig[at++], denom), matmul(row(g.nodes, j), p.w2));
      message = message ? add(message, gated) : gated;
    }
    auto self = matmul(row(g.nodes, i), p.w1);
    new_rows.push_back(add(row(g.nodes, i), relu(add(self, message))));
  }
  out.nodes = concat_rows(new_rows);
  return out;
}

TensorPtr classify(const RelationGraph& g, const TensorPtr& sc_anchors) {
  if (g.layer_index != g.total_layers) {
    throw ConfigError("classify: graph is at layer " + std::to_string(g.layer_index) + " of " +
                      std::to_string(g.total_layers) + "; run the remaining layers first");
  }
  return sc_predict(g.nodes, sc_anchors);
}

GcnForwardResult gcn_forward(const TensorPtr& v0, const EdgeFeatureSet& e0,
                             const GatedGcnParams& params) {
  if (params.layers.empty()) throw ConfigError("gcn_forward: need at least one layer");
  RelationGraph g;
  g.nodes = v0;
  g.edges = e0;
  g.layer_index = 0;
  g.total_layers = static_cast<int>(params.layers.size());
  for (const auto& layer : params.layers) {
    g = gated_layer(g, layer);
  }
  GcnForwardResult res;
  res.p = classify(g, params.sc_anchors);
  res.graph = std::move(g);
  return res;
}

GatedGcnParams make_gated_gcn_params(int n_au, Eigen::Index channels, int n_layers, Rng& rng) {
  if (n_layers < 1) throw ConfigError("make_gated_gcn_params: need at least one layer");
  auto draw = [&] { return make_weight(channels, channels, rng); };
  GatedGcnParams params;
  for (int l = 0; l < n_layers; ++l) {
    params.layers.push_back({draw(), draw(), draw(), draw(), draw()});
  }
  params.sc_anchors = make_anchors(n_au, channels, rng);
  return params;
}

}  // namespace augraph
