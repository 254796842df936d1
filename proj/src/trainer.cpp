#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "augraph/errors.hpp"
#include "augraph/trainer.hpp"

namespace augraph {

namespace {

void check_input_shape(const TrainConfig& cfg, const Mat& input) {
  if (input.rows() != cfg.spatial || input.cols() != cfg.input_dim) {
    throw ConfigError("input is " + std::to_string(input.rows()) + "x" +
                      std::to_string(input.cols()) + ", model expects " +
                      std::to_string(cfg.spatial) + "x" + std::to_string(cfg.input_dim));
  }
}

/// Fills in spatial/input_dim from the corpus (or verifies a preset value)
/// and checks every record agrees.
void resolve_dims(TrainConfig& cfg, const Corpus& data) {
  if (data.records.empty()) throw ConfigError("training corpus is empty");
  if (data.n_aus != cfg.n_aus) {
    throw ConfigError("config expects " + std::to_string(cfg.n_aus) + " AUs, corpus has " +
                      std::to_string(data.n_aus));
  }
  const Eigen::Index rows = data.records.front().input.rows();
  const Eigen::Index cols = data.records.front().input.cols();
  for (const auto& rec : data.records) {
    if (rec.input.rows() != rows || rec.input.cols() != cols) {
      throw ConfigError("record '" + rec.id + "' input shape differs from the first record");
    }
    if (static_cast<int>(rec.labels.size()) != cfg.n_aus) {
      throw ConfigError("record '" + rec.id + "' has " + std::to_string(rec.labels.size()) +
                        " labels, expected " + std::to_string(cfg.n_aus));
    }
  }
  if (cfg.spatial == 0) {
    cfg.spatial = static_cast<int>(rows);
  } else if (cfg.spatial != rows) {
    throw ConfigError("config spatial=" + std::to_string(cfg.spatial) + " but corpus inputs have " +
                      std::to_string(rows) + " rows");
  }
  if (cfg.input_dim == 0) {
    cfg.input_dim = static_cast<int>(cols);
  } else if (cfg.input_dim != cols) {
    throw ConfigError("config input_dim=" + std::to_string(cfg.input_dim) +
                      " but corpus inputs have " + std::to_string(cols) + " columns");
  }
}

Mat label_row(const SampleRecord& rec) {
  Mat y(1, static_cast<Eigen::Index>(rec.labels.size()));
  for (std::size_t i = 0; i < rec.labels.size(); ++i) {
    y(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(rec.labels[i]);
  }
  return y;
}

TensorPtr mean_of(const std::vector<TensorPtr>& xs) {
  TensorPtr acc = xs.front();
  for (std::size_t k = 1; k < xs.size(); ++k) acc = add(acc, xs[k]);
  return mul_scalar(acc, 1.0 / static_cast<Scalar>(xs.size()));
}

/// Seed-determined batch order: shuffle all indices, then cut into
/// consecutive chunks (the last one may be short).
std::vector<std::vector<std::size_t>> plan_epoch(std::size_t n, int batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::vector<TensorPtr> store_tensors(const ParameterStore& store) {
  std::vector<TensorPtr> out;
  out.reserve(store.size());
  for (const auto& item : store.items()) out.push_back(item.tensor);
  return out;
}

void append_backbone_afg(ParameterStore& s, const PipelineModel& model) {
  s.add("backbone.fc1.w", model.backbone.fc1.w);
  s.add("backbone.fc1.b", model.backbone.fc1.b);
  s.add("backbone.fc2.w", model.backbone.fc2.w);
  s.add("backbone.fc2.b", model.backbone.fc2.b);
  for (std::size_t i = 0; i < model.anfl.per_au_fc.size(); ++i) {
    s.add("afg.fc" + std::to_string(i) + ".w", model.anfl.per_au_fc[i].w);
    s.add("afg.fc" + std::to_string(i) + ".b", model.anfl.per_au_fc[i].b);
  }
}

void append_stage2_only(ParameterStore& s, const PipelineModel& model) {
  s.add("fam.w_q", model.mefl.fam.w_q);
  s.add("fam.w_k", model.mefl.fam.w_k);
  s.add("fam.w_v", model.mefl.fam.w_v);
  s.add("arm.w_q", model.mefl.arm.w_q);
  s.add("arm.w_k", model.mefl.arm.w_k);
  s.add("arm.w_v", model.mefl.arm.w_v);
  for (std::size_t li = 0; li < model.ggcn.layers.size(); ++li) {
    const std::string prefix = "ggcn.l" + std::to_string(li) + ".";
    s.add(prefix + "w1", model.ggcn.layers[li].w1);
    s.add(prefix + "w2", model.ggcn.layers[li].w2);
    s.add(prefix + "w3", model.ggcn.layers[li].w3);
    s.add(prefix + "w4", model.ggcn.layers[li].w4);
    s.add(prefix + "w5", model.ggcn.layers[li].w5);
  }
  s.add("sc2.anchors", model.ggcn.sc_anchors);
  s.add("edge.w", model.edge_fc.w);
  s.add("edge.b", model.edge_fc.b);
}

void require_stage2(const PipelineModel& model, const char* who) {
  if (!model.has_stage2) {
    throw ConfigError(std::string(who) + ": model has no stage-2 parameters");
  }
}

/// Architecture fields that must agree between a stage-1 checkpoint and the
/// stage-2 config continuing from it.
void check_architecture_match(const TrainConfig& a, const TrainConfig& b) {
  auto mismatch = [](const char* what, int x, int y) {
    throw ConfigError(std::string("stage-2 config disagrees with the stage-1 checkpoint on ") +
                      what + ": " + std::to_string(x) + " vs " + std::to_string(y));
  };
  if (a.n_aus != b.n_aus) mismatch("n_aus", a.n_aus, b.n_aus);
  if (a.channels != b.channels) mismatch("channels", a.channels, b.channels);
  if (a.spatial != b.spatial) mismatch("spatial", a.spatial, b.spatial);
  if (a.input_dim != b.input_dim) mismatch("input_dim", a.input_dim, b.input_dim);
  if (a.backbone_hidden != b.backbone_hidden) {
    mismatch("backbone_hidden", a.backbone_hidden, b.backbone_hidden);
  }
  if (a.k_neighbors != b.k_neighbors) mismatch("k_neighbors", a.k_neighbors, b.k_neighbors);
}

}  // namespace

TrainConfig resolve_train_config(const TrainConfig& cfg, const Corpus& data) {
  TrainConfig out = cfg;
  validate_config(out);
  resolve_dims(out, data);
  return out;
}

void validate_config(const TrainConfig& cfg) {
  auto bad = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (cfg.n_aus < 2) bad("n_aus must be >= 2");
  if (cfg.channels < 1) bad("channels must be >= 1");
  if (cfg.spatial < 0 || cfg.input_dim < 0) bad("spatial/input_dim cannot be negative");
  if (cfg.backbone_hidden < 1) bad("backbone_hidden must be >= 1");
  if (cfg.gcn_layers < 1) bad("gcn_layers must be >= 1");
  if (cfg.k_neighbors < 1 || cfg.k_neighbors > cfg.n_aus - 1) {
    bad("k_neighbors must lie in [1, n_aus - 1]");
  }
  if (cfg.lambda < 0.0) bad("lambda cannot be negative");
  if (cfg.stage1_epochs < 1 || cfg.stage2_epochs < 1) bad("epoch counts must be >= 1");
  if (!(cfg.stage1_lr > 0.0) || !(cfg.stage2_lr > 0.0)) bad("learning rates must be positive");
  if (cfg.batch_size < 1) bad("batch_size must be >= 1");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) bad("beta1 must lie in [0, 1)");
  if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) bad("beta2 must lie in [0, 1)");
  if (cfg.weight_decay < 0.0) bad("weight_decay cannot be negative");
}

// --- model ----------------------------------------------------------------

TensorPtr backbone_forward(const Backbone& b, const TensorPtr& x_raw) {
  return b.fc2.apply(relu(b.fc1.apply(x_raw)));
}

PipelineModel make_stage1_model(const TrainConfig& cfg, Rng& rng) {
  validate_config(cfg);
  if (cfg.spatial < 1 || cfg.input_dim < 1) {
    throw ConfigError("config: spatial and input_dim must be resolved before building a model");
  }
  PipelineModel model;
  model.config = cfg;
  model.backbone.fc1 = make_linear(cfg.input_dim, cfg.backbone_hidden, rng);
  model.backbone.fc2 = make_linear(cfg.backbone_hidden, cfg.channels, rng);
  model.anfl = make_anfl_params(cfg.n_aus, cfg.channels, cfg.k_neighbors, rng);
  return model;
}

void add_stage2_params(PipelineModel& model, Rng& rng) {
  if (model.has_stage2) throw ConfigError("add_stage2_params: already present");
  model.mefl = make_mefl_params(model.config.channels, rng);
  model.ggcn = make_gated_gcn_params(model.config.n_aus, model.config.channels,
                                     model.config.gcn_layers, rng);
  model.edge_fc = make_linear(model.config.channels, 4, rng);
  model.has_stage2 = true;
}

ParameterStore stage1_parameters(const PipelineModel& model) {
  ParameterStore s;
  append_backbone_afg(s, model);
  s.add("fgg.w_msg", model.anfl.gcn.w_msg);
  s.add("fgg.w_upd", model.anfl.gcn.w_upd);
  s.add("sc1.anchors", model.anfl.sc_anchors);
  return s;
}

ParameterStore stage2_parameters(const PipelineModel& model) {
  require_stage2(model, "stage2_parameters");
  ParameterStore s;
  append_backbone_afg(s, model);
  append_stage2_only(s, model);
  return s;
}

ParameterStore checkpoint_parameters(const PipelineModel& model, TrainStage stage) {
  ParameterStore s = stage1_parameters(model);
  if (stage == TrainStage::stage2) {
    require_stage2(model, "checkpoint_parameters");
    append_stage2_only(s, model);
  }
  return s;
}

TensorPtr stage1_predict(const PipelineModel& model, const Mat& input) {
  check_input_shape(model.config, input);
  const TensorPtr x = backbone_forward(model.backbone, constant(input));
  return anfl_forward(x, model.anfl).p;
}

Stage2Forward stage2_predict(const PipelineModel& model, const Mat& input) {
  require_stage2(model, "stage2_predict");
  check_input_shape(model.config, input);
  const TensorPtr x = backbone_forward(model.backbone, constant(input));
  const AfgResult afg = afg_forward(x, model.anfl.per_au_fc);
  const EdgeFeatureSet edges = mefl_forward(afg.u, x, model.mefl);
  GcnForwardResult res = gcn_forward(afg.v, edges, model.ggcn);
  return {res.p, std::move(res.graph.edges)};
}

Predictor make_predictor(const PipelineModel& model, bool use_stage2) {
  if (use_stage2) require_stage2(model, "make_predictor");
  // The copy shares the parameter tensors, so later optimizer updates are
  // visible through the predictor.
  return [model, use_stage2](const SampleRecord& rec) {
    return use_stage2 ? stage2_predict(model, rec.input).p->value
                      : stage1_predict(model, rec.input)->value;
  };
}

// --- optimization ---------------------------------------------------------

OptimizerState make_optimizer_state(const ParameterStore& params) {
  OptimizerState state;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const auto& item : params.items()) {
    state.m.push_back(Mat::Zero(item.tensor->rows(), item.tensor->cols()));
    state.v.push_back(Mat::Zero(item.tensor->rows(), item.tensor->cols()));
  }
  return state;
}

void optimizer_step(const ParameterStore& params, OptimizerState& state, Scalar lr,
                    Scalar beta1, Scalar beta2, Scalar weight_decay) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ConfigError("optimizer state does not match the parameter store");
  }
  ++state.step;
  const Scalar bc1 = 1.0 - std::pow(beta1, static_cast<Scalar>(state.step));
  const Scalar bc2 = 1.0 - std::pow(beta2, static_cast<Scalar>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& t = *params.items()[i].tensor;
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    if (m.rows() != t.rows() || m.cols() != t.cols()) {
      throw ShapeError("moment buffer for '" + params.items()[i].name +
                       "' no longer matches the parameter");
    }
    const Mat g = t.grad.size() > 0 ? t.grad : Mat::Zero(t.rows(), t.cols());
    if (!g.allFinite()) {
      throw NumericError("gradient for '" + params.items()[i].name + "' is not finite");
    }
    m = beta1 * m + (1.0 - beta1) * g;
    v = (beta2 * v.array() + (1.0 - beta2) * g.array().square()).matrix();
    const Mat m_hat = m / bc1;
    const Mat v_hat = v / bc2;
    t.value = t.value * (1.0 - lr * weight_decay) -
              (lr * m_hat.array() / (v_hat.array().sqrt() + kAdamEpsilon)).matrix();
  }
}

Scalar cosine_lr(std::int64_t step, std::int64_t total_steps, Scalar lr0) {
  if (total_steps < 1) throw ConfigError("cosine_lr: total_steps must be positive");
  if (step < 0 || step > total_steps) {
    throw ConfigError("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                      std::to_string(total_steps) + "]");
  }
  const Scalar frac = static_cast<Scalar>(step) / static_cast<Scalar>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi_v<Scalar> * frac));
}

// --- training -------------------------------------------------------------

std::string format_epoch_record(const EpochRecord& rec) {
  char buf[192];
  if (rec.mean_f1) {
    std::snprintf(buf, sizeof buf, "epoch=%d stage=%u loss=%.12g lwa=%.12g le=%.12g mean_f1=%.12g",
                  rec.epoch, static_cast<unsigned>(rec.stage), rec.loss, rec.lwa, rec.le,
                  *rec.mean_f1);
  } else {
    std::snprintf(buf, sizeof buf,
                  "epoch=%d stage=%u loss=%.12g lwa=%.12g le=%.12g mean_f1=undefined", rec.epoch,
                  static_cast<unsigned>(rec.stage), rec.loss, rec.lwa, rec.le);
  }
  return buf;
}

Checkpoint train_stage1(const Corpus& data, const TrainConfig& config, const LogSink& log) {
  const TrainConfig cfg = resolve_train_config(config, data);
  const OccurrenceStats occ = data.require_occurrence();

  Rng rng(cfg.seed);
  PipelineModel model = make_stage1_model(cfg, rng);
  const ParameterStore params = stage1_parameters(model);
  const std::vector<TensorPtr> tensors = store_tensors(params);
  OptimizerState state = make_optimizer_state(params);

  const std::int64_t steps_per_epoch =
      static_cast<std::int64_t>((data.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                static_cast<std::size_t>(cfg.batch_size));
  const std::int64_t total_steps = steps_per_epoch * cfg.stage1_epochs;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
    Scalar loss_sum = 0;
    for (const auto& batch : plan_epoch(data.size(), cfg.batch_size, rng)) {
      const Scalar lr = cosine_lr(step, total_steps, cfg.stage1_lr);
      std::vector<TensorPtr> sample_losses;
      sample_losses.reserve(batch.size());
      for (std::size_t idx : batch) {
        const SampleRecord& rec = data.records[idx];
        const TensorPtr p = stage1_predict(model, rec.input);
        sample_losses.push_back(weighted_asymmetric_loss(p, label_row(rec), occ.weights));
      }
      const TensorPtr batch_loss = mean_of(sample_losses);
      if (!std::isfinite(batch_loss->item())) {
        throw NumericError("stage-1 loss is not finite at step " + std::to_string(step));
      }
      zero_grad(tensors);
      backward(batch_loss);
      optimizer_step(params, state, lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
      loss_sum += batch_loss->item() * static_cast<Scalar>(batch.size());
      ++step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = TrainStage::stage1;
    rec.loss = rec.lwa = loss_sum / static_cast<Scalar>(data.size());
    rec.le = 0;
    rec.mean_f1 = evaluate(make_predictor(model, false), data, 0.5).macro_f1;
    if (log) log(rec);
  }

  return make_checkpoint(model, TrainStage::stage1, occ);
}

Checkpoint train_stage2(const Corpus& data, const Checkpoint& stage1, const TrainConfig& config,
                        const LogSink& log) {
  if (stage1.stage != TrainStage::stage1) {
    throw ConfigError("train_stage2: base checkpoint is not a stage-1 checkpoint");
  }
  TrainConfig cfg = resolve_train_config(config, data);
  check_architecture_match(stage1.config, cfg);
  const OccurrenceStats occ = data.require_occurrence();

  PipelineModel model = model_from_checkpoint(stage1);
  model.config = cfg;
  Rng rng(cfg.seed);
  add_stage2_params(model, rng);
  const ParameterStore params = stage2_parameters(model);
  const std::vector<TensorPtr> tensors = store_tensors(params);
  OptimizerState state = make_optimizer_state(params);

  const std::int64_t steps_per_epoch =
      static_cast<std::int64_t>((data.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                static_cast<std::size_t>(cfg.batch_size));
  const std::int64_t total_steps = steps_per_epoch * cfg.stage2_epochs;
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= cfg.stage2_epochs; ++epoch) {
    Scalar lwa_sum = 0;
    Scalar le_sum = 0;
    for (const auto& batch : plan_epoch(data.size(), cfg.batch_size, rng)) {
      const Scalar lr = cosine_lr(step, total_steps, cfg.stage2_lr);
      std::vector<TensorPtr> lwa_parts;
      std::vector<TensorPtr> le_parts;
      lwa_parts.reserve(batch.size());
      le_parts.reserve(batch.size());
      for (std::size_t idx : batch) {
        const SampleRecord& rec = data.records[idx];
        const Stage2Forward fwd = stage2_predict(model, rec.input);
        const Mat y = label_row(rec);
        lwa_parts.push_back(weighted_asymmetric_loss(fwd.p, y, occ.weights));
        le_parts.push_back(
            edge_cooccurrence_loss(edge_logits(fwd.edges, model.edge_fc), edge_labels(y)));
      }
      const TensorPtr lwa = mean_of(lwa_parts);
      const TensorPtr le = mean_of(le_parts);
      const TensorPtr batch_loss = combined_loss(lwa, le, cfg.lambda);
      if (!std::isfinite(batch_loss->item())) {
        throw NumericError("stage-2 loss is not finite at step " + std::to_string(step));
      }
      zero_grad(tensors);
      backward(batch_loss);
      optimizer_step(params, state, lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
      lwa_sum += lwa->item() * static_cast<Scalar>(batch.size());
      le_sum += le->item() * static_cast<Scalar>(batch.size());
      ++step;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = TrainStage::stage2;
    rec.lwa = lwa_sum / static_cast<Scalar>(data.size());
    rec.le = le_sum / static_cast<Scalar>(data.size());
    rec.loss = rec.lwa + cfg.lambda * rec.le;
    rec.mean_f1 = evaluate(make_predictor(model, true), data, 0.5).macro_f1;
    if (log) log(rec);
  }

  return make_checkpoint(model, TrainStage::stage2, occ);
}

InferOutput infer(const std::vector<Mat>& batch, const Checkpoint& ckpt) {
  if (batch.empty()) throw ConfigError("infer: empty batch");
  const PipelineModel model = model_from_checkpoint(ckpt);
  InferOutput out;
  const bool use_stage2 = ckpt.stage == TrainStage::stage2;
  if (!use_stage2) {
    out.used_fallback = true;
    out.warning =
        "stage-1 checkpoint: relation-graph branch unavailable, falling back to the node branch";
  }
  out.probs = Mat(static_cast<Eigen::Index>(batch.size()), model.config.n_aus);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Mat p = use_stage2 ? stage2_predict(model, batch[k]).p->value
                             : stage1_predict(model, batch[k])->value;
    out.probs.row(static_cast<Eigen::Index>(k)) = p.row(0);
  }
  return out;
}

}  // namespace augraph
