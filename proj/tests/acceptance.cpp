// Release gate: one pass/fail line per criterion, exit 0 only when every
// criterion holds. Tolerances are pinned here, not configurable.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "augraph/ablate.hpp"
#include "augraph/anfl.hpp"
#include "augraph/commands.hpp"
#include "augraph/data.hpp"
#include "augraph/gated_gcn.hpp"
#include "augraph/losses.hpp"
#include "augraph/mefl.hpp"
#include "augraph/metrics.hpp"
#include "augraph/trainer.hpp"

using namespace augraph;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_bits(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Scalar) * static_cast<std::size_t>(a.size())) == 0;
}

Mat random_mat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

/// The corpus both learning experiments run on: six AUs, three strongly
/// coupled pairs, single-column blocks against four distractor columns, and
/// enough feature noise that per-AU evidence alone leaves headroom.
GeneratorSpec coupled_spec() {
  GeneratorSpec spec;
  spec.n_aus = 6;
  spec.base_rates = {0.3, 0.3, 0.35, 0.3, 0.25, 0.35};
  spec.couplings = {{0, 1, 2.2}, {2, 3, 2.2}, {4, 5, 2.0}};
  spec.positions = 4;
  spec.block_size = 1;
  spec.distractors = 4;
  spec.signal = 1.0;
  spec.noise = 0.25;
  spec.jitter = 0.2;
  return spec;
}

/// Learning rates sized for the desk-scale corpus; everything else keeps the
/// library defaults (channels 8, hidden 16, two gated layers, 20+20 epochs).
TrainConfig desk_config() {
  TrainConfig cfg;
  cfg.n_aus = 6;
  cfg.stage1_lr = 1e-2;
  cfg.stage2_lr = 5e-3;
  cfg.seed = 1;
  return cfg;
}

// 1. Finite-difference agreement over every composite forward at N=3, D=4,
//    C=5, within 1e-4 and under a minute.
CriterionResult c1_gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<GradCheckLine> lines = run_gradcheck(false);
  const double elapsed = seconds_since(t0);
  Scalar worst = 0;
  bool alive = true;
  for (const GradCheckLine& line : lines) {
    worst = std::max(worst, line.max_rel_err);
    alive = alive && line.max_rel_err > 0.0;  // a flat loss would check nothing
  }
  CriterionResult r;
  r.pass = lines.size() == 3 && alive && worst <= 1e-4 && elapsed < 60.0;
  r.detail = fmt("worst rel err %.2e over %zu components (tol 1e-4), %.1f s (limit 60)",
                 worst, lines.size(), elapsed);
  return r;
}

// 2. w = N * (1/r) / sum(1/r): frozen values on [0.5, 0.25, 0.25] and the
//    sum-to-N identity on 1000 random rate rows.
CriterionResult c2_weight_formula() {
  Mat rates(1, 3);
  rates << 0.5, 0.25, 0.25;
  Mat expected(1, 3);
  expected << 0.6, 1.2, 1.2;
  const Mat w = compute_weights(rates);
  const Scalar frozen_err = (w - expected).cwiseAbs().maxCoeff();

  Rng rng(42);
  Scalar worst_sum_err = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    Mat r(1, n);
    for (int i = 0; i < n; ++i) r(0, i) = rng.uniform(0.05, 0.95);
    worst_sum_err = std::max(worst_sum_err,
                             std::abs(compute_weights(r).sum() - static_cast<Scalar>(n)));
  }
  CriterionResult r;
  r.pass = frozen_err <= 1e-12 && worst_sum_err <= 1e-9;
  r.detail = fmt("[0.5,0.25,0.25] -> [0.6,1.2,1.2] err %.1e (tol 1e-12); "
                 "worst |sum-N| %.1e on 1000 draws (tol 1e-9)",
                 frozen_err, worst_sum_err);
  return r;
}

// 3. The p*log(1-p) term makes the negative-class gradient fade as p -> 0+
//    while the positive-class gradient keeps growing.
CriterionResult c3_loss_asymmetry() {
  const auto grad_at = [](Scalar p, Scalar label) {
    Mat y(1, 1);
    y << label;
    Mat w(1, 1);
    w << 1.0;
    const Scalar h = p * 0.1;
    const auto loss_at = [&](Scalar pv) {
      return weighted_asymmetric_loss(constant(Mat::Constant(1, 1, pv)), y, w)->value(0, 0);
    };
    return (loss_at(p + h) - loss_at(p - h)) / (2 * h);
  };
  const Scalar ps[3] = {1e-3, 1e-4, 1e-5};
  Scalar neg[3], pos[3];
  for (int i = 0; i < 3; ++i) {
    neg[i] = std::abs(grad_at(ps[i], 0.0));
    pos[i] = std::abs(grad_at(ps[i], 1.0));
  }
  CriterionResult r;
  r.pass = neg[0] > neg[1] && neg[1] > neg[2] && pos[0] < pos[1] && pos[1] < pos[2];
  r.detail = fmt("|dL/dp| y=0: %.2e > %.2e > %.2e fading; y=1: %.2e < %.2e < %.2e growing",
                 neg[0], neg[1], neg[2], pos[0], pos[1], pos[2]);
  return r;
}

// 4. Row sums exactly K, zero diagonal, and invariance to common positive
//    feature scaling, over 1000 random draws.
CriterionResult c4_topology_invariants() {
  Rng rng(7);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const Mat v = random_mat(n, 5, rng);
    const Adjacency adj = build_topology(v, k);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      ok = ok && adj.a(i, i) == 0.0;
      ok = ok && static_cast<int>(adj.a.row(i).sum()) == k;
    }
    const Scalar scale = rng.uniform(0.1, 10.0);
    const Adjacency scaled = build_topology((v.array() * scale).matrix(), k);
    ok = ok && same_bits(adj.a, scaled.a);
    bad += !ok;
  }
  CriterionResult r;
  r.pass = bad == 0;
  r.detail = fmt("%d of 1000 draws violated row-sum/diagonal/scale invariance", bad);
  return r;
}

// 5. Every attention row is a probability distribution, in both attention
//    roles, across random shapes.
CriterionResult c5_attention_normalization() {
  Rng rng(11);
  Scalar worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const AttentionParams as_fam = make_attention_params(5, rng);
    const AttentionParams as_arm = make_attention_params(5, rng);
    const Eigen::Index dq = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index dk = 1 + static_cast<Eigen::Index>(rng.below(6));
    const TensorPtr query = variable(random_mat(dq, 5, rng));
    const TensorPtr kv = variable(random_mat(dk, 5, rng));
    for (const AttentionParams* params : {&as_fam, &as_arm}) {
      const CrossAttention ca = cross_attention_detailed(query, kv, *params);
      for (Eigen::Index row = 0; row < ca.weights->value.rows(); ++row) {
        worst = std::max(worst, std::abs(ca.weights->value.row(row).sum() - 1.0));
      }
    }
  }
  CriterionResult r;
  r.pass = worst <= 1e-6;
  r.detail = fmt("worst |row sum - 1| = %.2e over 50 draws x 2 roles (tol 1e-6)", worst);
  return r;
}

// 6. N*(N-1) directed edges, and swapping two input maps swaps the matching
//    edge features bit-exactly.
CriterionResult c6_edge_completeness() {
  Rng rng(13);
  for (int n : {3, 4, 5}) {
    const MeflParams params = make_mefl_params(5, rng);
    std::vector<TensorPtr> u;
    for (int i = 0; i < n; ++i) u.push_back(variable(random_mat(4, 5, rng)));
    const TensorPtr x = variable(random_mat(4, 5, rng));

    const EdgeFeatureSet first = mefl_forward(u, x, params);
    if (static_cast<int>(first.size()) != n * (n - 1)) {
      return {false, fmt("N=%d produced %zu edges, wanted %d", n, first.size(), n * (n - 1))};
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const TensorPtr& e = first.at(i, j);
        if (!e || e->value.rows() != 1 || e->value.cols() != 5) {
          return {false, fmt("edge (%d,%d) missing or mis-shaped at N=%d", i, j, n)};
        }
      }
    }

    std::vector<TensorPtr> swapped = u;
    std::swap(swapped.front(), swapped.back());
    const EdgeFeatureSet second = mefl_forward(swapped, x, params);
    const auto relabel = [n](int a) { return a == 0 ? n - 1 : (a == n - 1 ? 0 : a); };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (!same_bits(second.at(i, j)->value, first.at(relabel(i), relabel(j))->value)) {
          return {false, fmt("swap equivariance broke at edge (%d,%d), N=%d", i, j, n)};
        }
      }
    }
  }
  return {true, "edge counts exact and swap equivariance bit-exact for N=3,4,5"};
}

// 7. Full two-stage training overfits the 512-sample coupled corpus to
//    macro F1 >= 0.95 inside ten minutes.
CriterionResult c7_overfit_experiment() {
  const auto t0 = std::chrono::steady_clock::now();
  const Corpus corpus = generate_synthetic(coupled_spec(), 512, 1);
  const TrainConfig cfg = desk_config();
  const Checkpoint stage1 = train_stage1(corpus, cfg);
  const Checkpoint stage2 = train_stage2(corpus, stage1, cfg);
  const PipelineModel model = model_from_checkpoint(stage2);
  const EvalReport report = evaluate(make_predictor(model, true), corpus, 0.5);
  const double elapsed = seconds_since(t0);
  CriterionResult r;
  if (!report.macro_f1) {
    r.detail = "training-set macro F1 undefined";
    return r;
  }
  r.pass = *report.macro_f1 >= 0.95 && elapsed < 600.0;
  r.detail = fmt("train macro F1 %.4f (need >= 0.95) after 20+20 epochs, %.0f s (limit 600)",
                 *report.macro_f1, elapsed);
  return r;
}

// 8. Held-out value of relation modelling: full system >= per-AU features >=
//    pooled backbone, as means over three seeds. Stage 2 gets 40 epochs here
//    so the relation branch is compared converged, not half-trained.
CriterionResult c8_relation_value() {
  const Corpus corpus = generate_synthetic(coupled_spec(), 512, 1);
  TrainConfig cfg = desk_config();
  cfg.stage2_epochs = 40;
  AblationOptions opts;
  opts.settings = {AblationSetting::backbone, AblationSetting::afg,
                   AblationSetting::afg_fgg_mefl_le};
  opts.n_seeds = 3;
  const std::vector<AblationRow> rows = run_ablation(corpus, cfg, opts);
  CriterionResult r;
  if (rows.size() != 3 || !rows[0].mean_eval_f1 || !rows[1].mean_eval_f1 ||
      !rows[2].mean_eval_f1) {
    r.detail = "a mean held-out F1 came back undefined";
    return r;
  }
  const Scalar backbone = *rows[0].mean_eval_f1;
  const Scalar afg = *rows[1].mean_eval_f1;
  const Scalar full = *rows[2].mean_eval_f1;
  r.pass = full >= afg && afg >= backbone;
  r.detail = fmt("held-out macro F1 over 3 seeds: full %.4f >= afg %.4f >= backbone %.4f",
                 full, afg, backbone);
  return r;
}

// 9. With all layer maps zero the gated stack is the identity and the
//    classifier reduces to the plain anchor similarity.
CriterionResult c9_fixed_point() {
  Rng rng(17);
  GatedGcnParams params = make_gated_gcn_params(4, 6, 3, rng);
  for (GatedGcnLayerParams& layer : params.layers) {
    for (const TensorPtr& w : {layer.w1, layer.w2, layer.w3, layer.w4, layer.w5}) {
      w->value.setZero();
    }
  }
  const Mat v0 = random_mat(4, 6, rng);
  EdgeFeatureSet e0(4);
  std::vector<Mat> edge_values;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      edge_values.push_back(random_mat(1, 6, rng));
      e0.set(i, j, variable(edge_values.back()));
    }
  }
  const GcnForwardResult res = gcn_forward(variable(v0), e0, params);
  bool ok = same_bits(res.graph.nodes->value, v0);
  std::size_t idx = 0;
  for (int i = 0; i < 4 && ok; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      ok = ok && same_bits(res.graph.edges.at(i, j)->value, edge_values[idx]);
      ++idx;
    }
  }
  const TensorPtr direct = sc_predict(variable(v0), params.sc_anchors);
  ok = ok && same_bits(res.p->value, direct->value);
  CriterionResult r;
  r.pass = ok;
  r.detail = ok ? "zero-weight stack left nodes, edges and prediction bit-identical"
                : "zero-weight stack altered the graph or the prediction";
  return r;
}

// 10. Same seed, same bytes: retraining reproduces the metrics log, and a
//     checkpoint survives save -> load -> infer bit-identically.
CriterionResult c10_determinism() {
  GeneratorSpec spec;
  spec.n_aus = 4;
  spec.base_rates = {0.5, 0.4, 0.5, 0.6};
  spec.couplings = {{0, 1, 1.5}};
  spec.positions = 3;
  spec.block_size = 1;
  spec.distractors = 1;
  const Corpus corpus = generate_synthetic(spec, 96, 3);

  TrainConfig cfg;
  cfg.n_aus = 4;
  cfg.channels = 4;
  cfg.backbone_hidden = 8;
  cfg.batch_size = 12;
  cfg.stage1_epochs = 3;
  cfg.stage2_epochs = 2;
  cfg.stage1_lr = 1e-2;
  cfg.stage2_lr = 1e-3;
  cfg.seed = 5;

  const auto run_once = [&](std::string& log_out) {
    const LogSink sink = [&log_out](const EpochRecord& rec) {
      log_out += format_epoch_record(rec);
      log_out += '\n';
    };
    const Checkpoint stage1 = train_stage1(corpus, cfg, sink);
    return train_stage2(corpus, stage1, cfg, sink);
  };
  std::string log_a, log_b;
  const Checkpoint first = run_once(log_a);
  const Checkpoint second = run_once(log_b);
  const bool logs_identical = !log_a.empty() && log_a == log_b;
  (void)second;

  const std::string path = "/tmp/augraph_acceptance_roundtrip.ckpt";
  save_checkpoint(first, path);
  const Checkpoint loaded = load_checkpoint(path);
  std::vector<Mat> batch;
  for (const SampleRecord& rec : corpus.records) batch.push_back(rec.input);
  const InferOutput direct = infer(batch, first);
  const InferOutput via_disk = infer(batch, loaded);
  const bool probs_identical = same_bits(direct.probs, via_disk.probs);

  CriterionResult r;
  r.pass = logs_identical && probs_identical;
  r.detail = fmt("retrain log %s, save->load->infer %s",
                 logs_identical ? "byte-identical" : "DIVERGED",
                 probs_identical ? "bit-identical" : "DIVERGED");
  return r;
}

// 11. The shipped metrics agree with brute-force oracles: all-pairs AUC on
//     200 instances, hand-counted confusion values on 50.
CriterionResult c11_metric_oracles() {
  Rng rng(23);
  int auc_mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(56));
    std::vector<Scalar> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n));
    const bool quantized = rng.bernoulli(0.5);  // force ties half the time
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] =
          quantized ? static_cast<Scalar>(rng.below(11)) / 10.0 : rng.uniform01();
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
    }
    Scalar pairs = 0;
    std::int64_t n_pos = 0, n_neg = 0;
    for (int i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == 0) continue;
      ++n_pos;
      for (int j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)] == 1) continue;
        const Scalar si = scores[static_cast<std::size_t>(i)];
        const Scalar sj = scores[static_cast<std::size_t>(j)];
        pairs += si > sj ? 1.0 : (si == sj ? 0.5 : 0.0);
      }
    }
    n_neg = n - n_pos;
    const std::optional<Scalar> oracle =
        (n_pos == 0 || n_neg == 0)
            ? std::nullopt
            : std::optional<Scalar>(pairs / static_cast<Scalar>(n_pos * n_neg));
    const std::optional<Scalar> ours = auc_single(scores, labels);
    if (ours.has_value() != oracle.has_value() || (ours && *ours != *oracle)) ++auc_mismatches;
  }

  int f1_mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(90));
    std::vector<Scalar> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = static_cast<Scalar>(rng.below(11)) / 10.0;
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      const bool pred = scores[static_cast<std::size_t>(i)] >= 0.5;
      const bool truth = labels[static_cast<std::size_t>(i)] == 1;
      tp += pred && truth;
      fp += pred && !truth;
      fn += !pred && truth;
      tn += !pred && !truth;
    }
    const AuMetrics m = f1_single(scores, labels, 0.5);
    bool ok = m.tp == tp && m.fp == fp && m.fn == fn && m.tn == tn;
    const auto matches = [](const std::optional<Scalar>& got, bool defined, Scalar expect) {
      return defined ? (got.has_value() && std::abs(*got - expect) <= 1e-12) : !got.has_value();
    };
    const Scalar prec = tp + fp ? static_cast<Scalar>(tp) / static_cast<Scalar>(tp + fp) : 0;
    const Scalar rec = tp + fn ? static_cast<Scalar>(tp) / static_cast<Scalar>(tp + fn) : 0;
    ok = ok && matches(m.precision, tp + fp != 0, prec);
    ok = ok && matches(m.recall, tp + fn != 0, rec);
    const bool f1_defined = (tp + fp) != 0 && (tp + fn) != 0 && prec + rec > 0;
    const Scalar f1 = f1_defined ? 2 * prec * rec / (prec + rec) : 0;
    ok = ok && matches(m.f1, f1_defined, f1);
    f1_mismatches += !ok;
  }

  CriterionResult r;
  r.pass = auc_mismatches == 0 && f1_mismatches == 0;
  r.detail = fmt("auc exact on %d/200 instances; f1/confusion within 1e-12 on %d/50",
                 200 - auc_mismatches, 50 - f1_mismatches);
  return r;
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    CriterionResult (*fn)();
  };
  const Row rows[] = {
      {1, "gradient correctness", c1_gradient_correctness},
      {2, "weight formula", c2_weight_formula},
      {3, "loss asymmetry", c3_loss_asymmetry},
      {4, "topology invariants", c4_topology_invariants},
      {5, "attention normalization", c5_attention_normalization},
      {6, "edge completeness", c6_edge_completeness},
      {7, "overfit experiment", c7_overfit_experiment},
      {8, "relation-learning value", c8_relation_value},
      {9, "gated stack fixed point", c9_fixed_point},
      {10, "determinism & persistence", c10_determinism},
      {11, "metric oracles", c11_metric_oracles},
  };
  int failed = 0;
  for (const Row& row : rows) {
    CriterionResult result;
    try {
      result = row.fn();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%2d] %s %s: %s\n", row.id, result.pass ? "PASS" : "FAIL", row.name,
                result.detail.c_str());
    std::fflush(stdout);
    failed += !result.pass;
  }
  if (failed == 0) {
    std::printf("all 11 criteria passed\n");
  } else {
    std::printf("%d of 11 criteria failed\n", failed);
  }
  return failed == 0 ? 0 : 1;
}
