#pragma once

#include <utility>
#include <vector>

#include "augraph/rng.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// Single-head attention projections, all C x C. The softmax logits are
/// scaled by 1/sqrt(d_k) with d_k = C, the key channel count.
struct AttentionParams {
  TensorPtr w_q;
  TensorPtr w_k;
  TensorPtr w_v;
};

/// Directed edge vectors e_ij for every ordered pair (i, j), i != j, stored
/// in lexicographic pair order. e_ij and e_ji are independent entries.
class EdgeFeatureSet {
public:
  EdgeFeatureSet() = default;
  explicit EdgeFeatureSet(int n_nodes);

  int nodes() const { return n_; }
  std::size_t size() const { return edges_.size(); }

  /// Flat position of the ordered pair (i, j) in lexicographic order.
  static std::size_t index_of(int n, int i, int j);

  void set(int i, int j, TensorPtr e);
  const TensorPtr& at(int i, int j) const;

  const std::vector<TensorPtr>& flat() const { return edges_; }

  /// The ordered pair stored at flat position `idx`.
  std::pair<int, int> pair_at(std::size_t idx) const;

private:
  int n_ = 0;
  std::vector<TensorPtr> edges_;
};

struct MeflParams {
  AttentionParams fam;  // shared across every AU / pair
  AttentionParams arm;  // independent weights, same form
};

struct CrossAttention {
  TensorPtr out;      // D x C attended features
  TensorPtr weights;  // D x D softmax rows (query positions x key positions)
};

/// softmax((A Wq)(B Wk)^T / sqrt(C)) * (B Wv), with the weights exposed.
CrossAttention cross_attention_detailed(const TensorPtr& query_src, const TensorPtr& kv_src,
                                        const AttentionParams& p);
TensorPtr cross_attention(const TensorPtr& query_src, const TensorPtr& kv_src,
                          const AttentionParams& p);

/// Attends each AU map against the full-face representation.
std::pair<TensorPtr, TensorPtr> fam(const TensorPtr& u_i, const TensorPtr& u_j,
                                    const TensorPtr& x, const AttentionParams& p_fam);

/// Cross-attends the pair's attended features (the partner acts as query),
/// then pools to the two directed 1 x C edge vectors (e_ij, e_ji).
std::pair<TensorPtr, TensorPtr> arm(const TensorPtr& f_i, const TensorPtr& f_j,
                                    const AttentionParams& p_arm);

/// FAM + ARM over every unordered pair; fills all N(N-1) directed edges.
EdgeFeatureSet mefl_forward(const std::vector<TensorPtr>& u, const TensorPtr& x,
                            const MeflParams& params);

AttentionParams make_attention_params(Eigen::Index channels, Rng& rng);
MeflParams make_mefl_params(Eigen::Index channels, Rng& rng);

}  // namespace augraph
