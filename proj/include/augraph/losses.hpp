#pragma once

#include <vector>

#include "augraph/linear.hpp"
#include "augraph/mefl.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// Per-AU training-set occurrence rates and the inverse-rate loss weights
/// derived from them. Plain numbers, not tape tensors: they are dataset
/// statistics, fixed before training.
struct OccurrenceStats {
  Mat rates;    // 1 x N, each in (0, 1]
  Mat weights;  // 1 x N, w_i = N * (1/r_i) / sum_j (1/r_j); sums to N
};

/// w_i = N * (1/r_i) / sum_j (1/r_j). Rare AUs get strictly larger weights.
Mat compute_weights(const Mat& rates);

OccurrenceStats make_occurrence_stats(const Mat& rates);

/// Weighted asymmetric binary loss over the N activation probabilities:
///   -(1/N) * sum_i w_i * [ y_i log p_i + (1 - y_i) * p_i * log(1 - p_i) ]
/// The extra p_i factor mutes easy negatives. Probabilities are clamped to
/// [1e-7, 1 - 1e-7] before the logs; values outside [0, 1] are a contract
/// violation (upstream classifiers produce cosines in [0, 1]).
TensorPtr weighted_asymmetric_loss(const TensorPtr& p, const Mat& y, const Mat& weights);

/// Four-class label of the directed edge (i, j): 2*y_i + y_j, i.e.
/// 0:(0,0), 1:(0,1), 2:(1,0), 3:(1,1).
int edge_label(int y_i, int y_j);

/// Labels for all N(N-1) directed edges in lexicographic pair order.
std::vector<int> edge_labels(const Mat& y);

/// Shared linear head mapping one 1 x C edge feature to 1 x 4 class logits.
TensorPtr edge_head(const TensorPtr& e, const Linear& shared_fc);

/// Applies the shared head to every final-layer edge feature.
std::vector<TensorPtr> edge_logits(const EdgeFeatureSet& edges, const Linear& shared_fc);

/// Mean categorical cross-entropy over the directed edges, computed with a
/// max-shifted log-sum-exp so large logits stay finite.
TensorPtr edge_cooccurrence_loss(const std::vector<TensorPtr>& logits,
                                 const std::vector<int>& labels);

/// L = L_WA + lambda * L_E.
TensorPtr combined_loss(const TensorPtr& lwa, const TensorPtr& le, Scalar lambda);

}  // namespace augraph
