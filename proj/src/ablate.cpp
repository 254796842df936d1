#include "augraph/ablate.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "augraph/errors.hpp"

namespace augraph {

namespace {

struct SettingInfo {
  AblationSetting setting;
  const char* name;
};

constexpr SettingInfo kSettings[] = {
    {AblationSetting::backbone, "backbone"},
    {AblationSetting::afg, "afg"},
    {AblationSetting::afg_fgg, "afg_fgg"},
    {AblationSetting::afg_mefl, "afg_mefl"},
    {AblationSetting::afg_mefl_le, "afg_mefl_le"},
    {AblationSetting::afg_fgg_mefl, "afg_fgg_mefl"},
    {AblationSetting::afg_fgg_mefl_le, "afg_fgg_mefl_le"},
};

bool uses_relation_branch(AblationSetting s) {
  return s == AblationSetting::afg_mefl || s == AblationSetting::afg_mefl_le ||
         s == AblationSetting::afg_fgg_mefl || s == AblationSetting::afg_fgg_mefl_le;
}

bool uses_edge_loss(AblationSetting s) {
  return s == AblationSetting::afg_mefl_le || s == AblationSetting::afg_fgg_mefl_le;
}

bool uses_fgg(AblationSetting s) {
  return s == AblationSetting::afg_fgg || s == AblationSetting::afg_fgg_mefl ||
         s == AblationSetting::afg_fgg_mefl_le;
}

/// Generic stage-1-style loop over an arbitrary parameter set and forward
/// pass; mirrors the main trainer (AdamW, cosine schedule, seed-determined
/// shuffling, sample-mean batch loss).
void fit_single_stage(const Corpus& data, const OccurrenceStats& occ, const TrainConfig& cfg,
                      const ParameterStore& params,
                      const std::function<TensorPtr(const Mat&)>& predict, Rng& rng) {
  std::vector<TensorPtr> tensors;
  for (const auto& item : params.items()) tensors.push_back(item.tensor);
  OptimizerState state = make_optimizer_state(params);

  const auto n = data.size();
  const std::int64_t steps_per_epoch =
      static_cast<std::int64_t>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                static_cast<std::size_t>(cfg.batch_size));
  const std::int64_t total_steps = steps_per_epoch * cfg.stage1_epochs;
  std::int64_t step = 0;

  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= cfg.stage1_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const Scalar lr = cosine_lr(step, total_steps, cfg.stage1_lr);
      TensorPtr acc;
      for (std::size_t k = start; k < end; ++k) {
        const SampleRecord& rec = data.records[order[k]];
        Mat y(1, static_cast<Eigen::Index>(rec.labels.size()));
        for (std::size_t i = 0; i < rec.labels.size(); ++i) {
          y(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(rec.labels[i]);
        }
        const TensorPtr part = weighted_asymmetric_loss(predict(rec.input), y, occ.weights);
        acc = acc ? add(acc, part) : part;
      }
      const TensorPtr loss = mul_scalar(acc, 1.0 / static_cast<Scalar>(end - start));
      if (!std::isfinite(loss->item())) {
        throw NumericError("ablation loss is not finite at step " + std::to_string(step));
      }
      zero_grad(tensors);
      backward(loss);
      optimizer_step(params, state, lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
      ++step;
    }
  }
}

/// Backbone-only baseline: pooled backbone features through one shared
/// sigmoid head.
Predictor fit_backbone_only(const Corpus& train, const OccurrenceStats& occ,
                            const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  PipelineModel model = make_stage1_model(cfg, rng);
  const Linear head = make_linear(cfg.channels, cfg.n_aus, rng);

  ParameterStore params;
  params.add("backbone.fc1.w", model.backbone.fc1.w);
  params.add("backbone.fc1.b", model.backbone.fc1.b);
  params.add("backbone.fc2.w", model.backbone.fc2.w);
  params.add("backbone.fc2.b", model.backbone.fc2.b);
  params.add("head.w", head.w);
  params.add("head.b", head.b);

  const Backbone backbone = model.backbone;
  auto predict = [backbone, head](const Mat& input) {
    const TensorPtr x = backbone_forward(backbone, constant(input));
    return sigmoid(head.apply(global_average_pool(x)));
  };
  fit_single_stage(train, occ, cfg, params, predict, rng);
  return [predict](const SampleRecord& rec) { return predict(rec.input)->value; };
}

/// Per-AU extractors and the anchor classifier, but no graph update.
Checkpoint fit_afg_no_fgg(const Corpus& train, const OccurrenceStats& occ,
                          const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  PipelineModel model = make_stage1_model(cfg, rng);

  ParameterStore params;
  params.add("backbone.fc1.w", model.backbone.fc1.w);
  params.add("backbone.fc1.b", model.backbone.fc1.b);
  params.add("backbone.fc2.w", model.backbone.fc2.w);
  params.add("backbone.fc2.b", model.backbone.fc2.b);
  for (std::size_t i = 0; i < model.anfl.per_au_fc.size(); ++i) {
    params.add("afg.fc" + std::to_string(i) + ".w", model.anfl.per_au_fc[i].w);
    params.add("afg.fc" + std::to_string(i) + ".b", model.anfl.per_au_fc[i].b);
  }
  params.add("sc1.anchors", model.anfl.sc_anchors);

  const Backbone backbone = model.backbone;
  const AnflParams anfl = model.anfl;
  auto predict = [backbone, anfl](const Mat& input) {
    const TensorPtr x = backbone_forward(backbone, constant(input));
    const AfgResult afg = afg_forward(x, anfl.per_au_fc);
    return sc_predict(afg.v, anfl.sc_anchors);
  };
  fit_single_stage(train, occ, cfg, params, predict, rng);
  // The untouched FGG maps ride along so the result is a valid stage-1
  // checkpoint for the relation branch to continue from.
  return make_checkpoint(model, TrainStage::stage1, occ);
}

Predictor fit_setting(AblationSetting setting, const Corpus& train, const TrainConfig& cfg,
                      const LogSink& log) {
  const OccurrenceStats& occ = train.require_occurrence();
  switch (setting) {
    case AblationSetting::backbone:
      return fit_backbone_only(train, occ, cfg);
    case AblationSetting::afg: {
      const Checkpoint ckpt = fit_afg_no_fgg(train, occ, cfg);
      const PipelineModel model = model_from_checkpoint(ckpt);
      const Backbone backbone = model.backbone;
      const AnflParams anfl = model.anfl;
      return [backbone, anfl](const SampleRecord& rec) {
        const TensorPtr x = backbone_forward(backbone, constant(rec.input));
        return sc_predict(afg_forward(x, anfl.per_au_fc).v, anfl.sc_anchors)->value;
      };
    }
    case AblationSetting::afg_fgg: {
      const Checkpoint ckpt = train_stage1(train, cfg, log);
      return make_predictor(model_from_checkpoint(ckpt), false);
    }
    default: {
      TrainConfig cfg2 = cfg;
      if (!uses_edge_loss(setting)) cfg2.lambda = 0.0;
      const Checkpoint base = uses_fgg(setting) ? train_stage1(train, cfg2, log)
                                                : fit_afg_no_fgg(train, occ, cfg2);
      const Checkpoint ckpt = train_stage2(train, base, cfg2, log);
      return make_predictor(model_from_checkpoint(ckpt), true);
    }
  }
}

std::optional<Scalar> mean_defined(const std::vector<std::optional<Scalar>>& xs) {
  Scalar sum = 0;
  int n = 0;
  for (const auto& x : xs) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string cell(const std::optional<Scalar>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(12) << *v;
  return s.str();
}

}  // namespace

std::string to_string(AblationSetting s) {
  for (const auto& info : kSettings) {
    if (info.setting == s) return info.name;
  }
  throw ConfigError("unknown ablation setting value");
}

AblationSetting parse_ablation_setting(const std::string& name) {
  for (const auto& info : kSettings) {
    if (name == info.name) return info.setting;
  }
  std::string known;
  for (const auto& info : kSettings) known += std::string(known.empty() ? "" : ", ") + info.name;
  throw ConfigError("unknown ablation setting '" + name + "'; known: " + known);
}

std::vector<AblationSetting> all_ablation_settings() {
  std::vector<AblationSetting> out;
  for (const auto& info : kSettings) out.push_back(info.setting);
  return out;
}

std::vector<AblationRow> run_ablation(const Corpus& corpus, const TrainConfig& base,
                                      const AblationOptions& opts, const LogSink& log) {
  if (opts.settings.empty()) throw ConfigError("ablation: no settings requested");
  if (opts.n_seeds < 1) throw ConfigError("ablation: n_seeds must be >= 1");
  if (!(opts.split_fraction > 0.0 && opts.split_fraction < 1.0)) {
    throw ConfigError("ablation: split_fraction must lie strictly inside (0, 1)");
  }

  const TrainConfig resolved = resolve_train_config(base, corpus);

  std::vector<AblationRow> rows;
  for (AblationSetting setting : opts.settings) {
    AblationRow row;
    row.setting = setting;
    rows.push_back(std::move(row));
  }

  for (int s = 0; s < opts.n_seeds; ++s) {
    TrainConfig cfg = resolved;
    cfg.seed = resolved.seed + static_cast<std::uint64_t>(s);
    auto [train, eval] = split_corpus(corpus, opts.split_fraction, cfg.seed);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Predictor predict = fit_setting(rows[r].setting, train, cfg, log);
      rows[r].train_f1.push_back(evaluate(predict, train, opts.threshold).macro_f1);
      rows[r].eval_f1.push_back(evaluate(predict, eval, opts.threshold).macro_f1);
    }
  }

  for (auto& row : rows) {
    row.mean_train_f1 = mean_defined(row.train_f1);
    row.mean_eval_f1 = mean_defined(row.eval_f1);
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  std::size_t n_seeds = 0;
  for (const auto& row : rows) n_seeds = std::max(n_seeds, row.eval_f1.size());
  out << "setting,mean_train_f1,mean_eval_f1";
  for (std::size_t s = 0; s < n_seeds; ++s) out << ",seed" << s << "_eval";
  out << "\n";
  for (const auto& row : rows) {
    out << to_string(row.setting) << ',' << cell(row.mean_train_f1) << ','
        << cell(row.mean_eval_f1);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      out << ',' << (s < row.eval_f1.size() ? cell(row.eval_f1[s]) : "");
    }
    out << "\n";
  }
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  auto pad = [](const std::optional<Scalar>& v) {
    std::ostringstream s;
    if (v) {
      s << std::fixed << std::setprecision(4) << *v;
    } else {
      s << "undefined";
    }
    std::string text = s.str();
    if (text.size() < 10) text.insert(0, 10 - text.size(), ' ');
    return text;
  };
  std::ostringstream out;
  out << "setting            train F1    eval F1\n";
  for (const auto& row : rows) {
    std::string name = to_string(row.setting);
    if (name.size() < 16) name.append(16 - name.size(), ' ');
    out << name << " " << pad(row.mean_train_f1) << " " << pad(row.mean_eval_f1) << "\n";
  }
  return out.str();
}

}  // namespace augraph
