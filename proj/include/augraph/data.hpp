#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "augraph/losses.hpp"
#include "augraph/tape.hpp"

namespace augraph {

struct SampleRecord {
  std::string id;
  Mat input;               // positions x feature columns, raw backbone input
  std::vector<int> labels;  // one {0,1} entry per AU
};

/// Symmetric pairwise coupling between two AU labels; positive strengths
/// make the pair co-occur more often than independence predicts.
struct PairCoupling {
  int i = 0;
  int j = 0;
  Scalar strength = 0.0;
};

/// Recipe for the synthetic corpus. Labels come from a pairwise-coupled
/// Bernoulli field sampled by Gibbs sweeps; features are class-conditional
/// Gaussian blocks, one disjoint block per AU (active mean = signal) plus one
/// block per coupled pair that only lights up when both AUs are active, plus
/// pure-noise distractor columns. Every AU is linearly detectable from its
/// block, so a small dense model can learn the task.
struct GeneratorSpec {
  int n_aus = 4;
  std::vector<Scalar> base_rates;       // per AU, each strictly inside (0, 1)
  std::vector<PairCoupling> couplings;  // optional planted structure

  Eigen::Index positions = 6;  // rows of each input (spatial positions)
  int block_size = 2;          // feature columns per AU / pair block
  int distractors = 2;         // trailing pure-noise columns
  Scalar signal = 1.0;         // active-class mean shift
  Scalar noise = 0.25;         // within-class feature spread
  Scalar jitter = 0.1;         // per-position perturbation around the base row
  int gibbs_sweeps = 5;

  Eigen::Index feature_dim() const {
    return static_cast<Eigen::Index>(n_aus) * block_size +
           static_cast<Eigen::Index>(couplings.size()) * block_size + distractors;
  }
};

struct Corpus {
  std::vector<SampleRecord> records;
  int n_aus = 0;
  /// Present when every AU occurs at least once in `records`.
  std::optional<OccurrenceStats> occurrence;
  /// Symmetric planted coupling strengths (all zero when none were planted).
  Mat planted;

  std::size_t size() const { return records.size(); }
  /// Stats for training use; explains which AUs never occur if absent.
  const OccurrenceStats& require_occurrence() const;
};

/// Empirical counts of the four joint patterns (y_i, y_j) over a corpus,
/// indexed [i][j][class] with the losses module's class encoding.
class CooccurrenceMatrix {
public:
  explicit CooccurrenceMatrix(int n_aus);
  static CooccurrenceMatrix from_records(const std::vector<SampleRecord>& records, int n_aus);

  int nodes() const { return n_; }
  std::int64_t count(int i, int j, int cls) const;
  std::int64_t total() const { return total_; }

private:
  int n_ = 0;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> counts_;  // n*n*4, [i][j][cls]
};

Corpus generate_synthetic(const GeneratorSpec& spec, int n_samples, std::uint64_t seed);

/// r_i = fraction of records with AU i active; weights via compute_weights.
/// Throws listing every AU that never occurs.
OccurrenceStats compute_occurrence(const std::vector<SampleRecord>& records, int n_aus);

/// Versioned binary container with a trailing FNV-1a checksum; layout is
/// documented in the README. Round-trips are bit-exact.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

/// Deterministic shuffled split. The first portion (train) must contain
/// every label at least once; the eval side may be label-degenerate.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, Scalar train_fraction,
                                       std::uint64_t seed);

}  // namespace augraph
