#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "augraph/data.hpp"
#include "augraph/tape.hpp"

namespace augraph {

/// Classification quality for one label. Threshold-dependent quantities start
/// from the confusion counts; any metric whose denominator vanishes is left
/// empty rather than forced to zero, so small corpora report honestly.
struct AuMetrics {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  std::optional<Scalar> precision;
  std::optional<Scalar> recall;
  std::optional<Scalar> f1;
  std::optional<Scalar> auc;
};

struct EvalReport {
  std::vector<AuMetrics> per_au;
  std::optional<Scalar> macro_f1;   ///< unweighted mean over AUs with defined F1
  std::optional<Scalar> macro_auc;  ///< unweighted mean over AUs with defined AUC
  std::size_t n_samples = 0;
  Scalar threshold = 0.5;
};

/// Precision / recall / F1 for one label from parallel score and label
/// vectors. Scores are binarized at `threshold` (score >= threshold counts as
/// positive). Throws ShapeError on length mismatch, ConfigError on scores
/// outside [0, 1] or non-binary labels.
AuMetrics f1_single(const std::vector<Scalar>& scores, const std::vector<int>& labels,
                    Scalar threshold);

/// Rank-based AUC: the probability that a uniformly chosen positive outranks a
/// uniformly chosen negative, ties counted half. Empty when only one class is
/// present.
std::optional<Scalar> auc_single(const std::vector<Scalar>& scores,
                                 const std::vector<int>& labels);

/// Column-wise wrappers: `preds` and `labels` are n_samples x n_aus, one
/// column per AU. f1_score fills the confusion counts and threshold metrics;
/// auc_score fills only the auc field.
std::vector<AuMetrics> f1_score(const Mat& preds, const Mat& labels, Scalar threshold);
void auc_score(const Mat& preds, const Mat& labels, std::vector<AuMetrics>& out);

/// Anything that maps a sample to a 1 x n_aus row of probabilities.
using Predictor = std::function<Mat(const SampleRecord&)>;

/// Runs `predict` over every record in corpus order and aggregates all
/// metrics. Throws ConfigError on an empty corpus or if the predictor returns
/// a row of the wrong width or values outside [0, 1].
EvalReport evaluate(const Predictor& predict, const Corpus& corpus, Scalar threshold = 0.5);

/// Comma-separated report, one row per AU plus a trailing macro row.
/// Columns: au,precision,recall,f1,auc,tp,fp,fn,tn — undefined metrics are
/// empty fields.
void write_report_csv(const EvalReport& report, std::ostream& out);

/// Aligned human-readable table of the same numbers; undefined metrics are
/// spelled out.
std::string format_report(const EvalReport& report);

}  // namespace augraph
