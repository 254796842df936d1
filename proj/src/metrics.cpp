#include "augraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "augraph/errors.hpp"

namespace augraph {

namespace {

void check_pairs(std::size_t n_scores, std::size_t n_labels) {
  if (n_scores != n_labels) {
    throw ShapeError("metric input mismatch: " + std::to_string(n_scores) + " scores vs " +
                     std::to_string(n_labels) + " labels");
  }
  if (n_scores == 0) throw ConfigError("metric computed over zero samples");
}

void check_score(Scalar s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw ConfigError("score " + std::to_string(s) + " outside [0, 1]");
  }
}

void check_label(int y) {
  if (y != 0 && y != 1) throw ConfigError("label " + std::to_string(y) + " is not binary");
}

std::optional<Scalar> mean_defined(const std::vector<AuMetrics>& per_au,
                                   std::optional<Scalar> AuMetrics::*field) {
  Scalar sum = 0;
  int defined = 0;
  for (const auto& m : per_au) {
    if (m.*field) {
      sum += *(m.*field);
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / defined;
}

std::string cell(const std::optional<Scalar>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(12) << *v;
  return s.str();
}

std::string padded(const std::optional<Scalar>& v) {
  std::ostringstream s;
  if (v) {
    s << std::fixed << std::setprecision(4) << *v;
  } else {
    s << "undefined";
  }
  std::string text = s.str();
  if (text.size() < 9) text.insert(0, 9 - text.size(), ' ');
  return text;
}

}  // namespace

AuMetrics f1_single(const std::vector<Scalar>& scores, const std::vector<int>& labels,
                    Scalar threshold) {
  check_pairs(scores.size(), labels.size());
  AuMetrics m;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    check_score(scores[k]);
    check_label(labels[k]);
    const bool pred = scores[k] >= threshold;
    const bool truth = labels[k] == 1;
    if (pred && truth) ++m.tp;
    else if (pred && !truth) ++m.fp;
    else if (!pred && truth) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fp > 0) m.precision = static_cast<Scalar>(m.tp) / static_cast<Scalar>(m.tp + m.fp);
  if (m.tp + m.fn > 0) m.recall = static_cast<Scalar>(m.tp) / static_cast<Scalar>(m.tp + m.fn);
  if (m.precision && m.recall && (*m.precision + *m.recall > 0)) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

std::optional<Scalar> auc_single(const std::vector<Scalar>& scores,
                                 const std::vector<int>& labels) {
  check_pairs(scores.size(), labels.size());
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    check_label(labels[k]);
    n_pos += labels[k];
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  // Mann-Whitney via average ranks: AUC = (R_pos - n_pos(n_pos+1)/2) / (n_pos n_neg).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  Scalar rank_sum_pos = 0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t run_end = k + 1;
    while (run_end < n && scores[order[run_end]] == scores[order[k]]) ++run_end;
    // 1-based ranks k+1 .. run_end share their average.
    const Scalar avg_rank = static_cast<Scalar>(k + 1 + run_end) / 2.0;
    for (std::size_t r = k; r < run_end; ++r) {
      if (labels[order[r]] == 1) rank_sum_pos += avg_rank;
    }
    k = run_end;
  }
  const Scalar u = rank_sum_pos - static_cast<Scalar>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<Scalar>(n_pos) * static_cast<Scalar>(n_neg));
}

std::vector<AuMetrics> f1_score(const Mat& preds, const Mat& labels, Scalar threshold) {
  if (preds.rows() != labels.rows() || preds.cols() != labels.cols()) {
    throw ShapeError("prediction matrix " + std::to_string(preds.rows()) + "x" +
                     std::to_string(preds.cols()) + " vs label matrix " +
                     std::to_string(labels.rows()) + "x" + std::to_string(labels.cols()));
  }
  std::vector<AuMetrics> out;
  out.reserve(static_cast<std::size_t>(preds.cols()));
  for (Eigen::Index c = 0; c < preds.cols(); ++c) {
    std::vector<Scalar> scores(static_cast<std::size_t>(preds.rows()));
    std::vector<int> y(static_cast<std::size_t>(preds.rows()));
    for (Eigen::Index r = 0; r < preds.rows(); ++r) {
      scores[static_cast<std::size_t>(r)] = preds(r, c);
      y[static_cast<std::size_t>(r)] = static_cast<int>(labels(r, c));
    }
    out.push_back(f1_single(scores, y, threshold));
  }
  return out;
}

void auc_score(const Mat& preds, const Mat& labels, std::vector<AuMetrics>& out) {
  if (static_cast<Eigen::Index>(out.size()) != preds.cols()) {
    throw ShapeError("auc_score output vector does not match prediction width");
  }
  for (Eigen::Index c = 0; c < preds.cols(); ++c) {
    std::vector<Scalar> scores(static_cast<std::size_t>(preds.rows()));
    std::vector<int> y(static_cast<std::size_t>(preds.rows()));
    for (Eigen::Index r = 0; r < preds.rows(); ++r) {
      scores[static_cast<std::size_t>(r)] = preds(r, c);
      y[static_cast<std::size_t>(r)] = static_cast<int>(labels(r, c));
    }
    out[static_cast<std::size_t>(c)].auc = auc_single(scores, y);
  }
}

EvalReport evaluate(const Predictor& predict, const Corpus& corpus, Scalar threshold) {
  if (corpus.records.empty()) throw ConfigError("evaluate called on an empty corpus");
  const Eigen::Index n = static_cast<Eigen::Index>(corpus.size());
  const Eigen::Index n_aus = corpus.n_aus;

  Mat preds(n, n_aus);
  Mat labels(n, n_aus);
  for (Eigen::Index r = 0; r < n; ++r) {
    const SampleRecord& rec = corpus.records[static_cast<std::size_t>(r)];
    Mat p = predict(rec);
    if (p.rows() != 1 || p.cols() != n_aus) {
      throw ConfigError("predictor returned " + std::to_string(p.rows()) + "x" +
                        std::to_string(p.cols()) + " for sample '" + rec.id + "', expected 1x" +
                        std::to_string(n_aus));
    }
    for (Eigen::Index c = 0; c < n_aus; ++c) {
      check_score(p(0, c));
      preds(r, c) = p(0, c);
      labels(r, c) = static_cast<Scalar>(rec.labels[static_cast<std::size_t>(c)]);
    }
  }

  EvalReport report;
  report.per_au = f1_score(preds, labels, threshold);
  auc_score(preds, labels, report.per_au);
  report.macro_f1 = mean_defined(report.per_au, &AuMetrics::f1);
  report.macro_auc = mean_defined(report.per_au, &AuMetrics::auc);
  report.n_samples = corpus.size();
  report.threshold = threshold;
  return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "au,precision,recall,f1,auc,tp,fp,fn,tn\n";
  for (std::size_t i = 0; i < report.per_au.size(); ++i) {
    const AuMetrics& m = report.per_au[i];
    out << i << ',' << cell(m.precision) << ',' << cell(m.recall) << ',' << cell(m.f1) << ','
        << cell(m.auc) << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn << '\n';
  }
  out << "macro,,," << cell(report.macro_f1) << ',' << cell(report.macro_auc) << ",,,,\n";
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << "samples: " << report.n_samples << "  threshold: " << report.threshold << "\n";
  out << "  au  precision     recall         f1        auc    tp    fp    fn    tn\n";
  for (std::size_t i = 0; i < report.per_au.size(); ++i) {
    const AuMetrics& m = report.per_au[i];
    out << std::setw(4) << i << "  " << padded(m.precision) << "  " << padded(m.recall) << "  "
        << padded(m.f1) << "  " << padded(m.auc) << "  " << std::setw(4) << m.tp << "  "
        << std::setw(4) << m.fp << "  " << std::setw(4) << m.fn << "  " << std::setw(4) << m.tn
        << "\n";
  }
  out << "macro F1: " << (report.macro_f1 ? cell(report.macro_f1) : "undefined")
      << "  macro AUC: " << (report.macro_auc ? cell(report.macro_auc) : "undefined") << "\n";
  return out.str();
}

}  // namespace augraph
