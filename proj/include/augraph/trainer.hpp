#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "augraph/anfl.hpp"
#include "augraph/data.hpp"
#include "augraph/gated_gcn.hpp"
#include "augraph/losses.hpp"
#include "augraph/mefl.hpp"
#include "augraph/metrics.hpp"
#include "augraph/tape.hpp"

namespace augraph {

enum class TrainStage : std::uint32_t { stage1 = 1, stage2 = 2 };

/// Everything the two training stages need. Architecture fields set to 0 are
/// adopted from the data (spatial = input rows, input_dim = input columns);
/// nonzero values must match the data exactly.
struct TrainConfig {
  int n_aus = 4;
  int channels = 8;        // C, per-AU feature width
  int spatial = 0;         // D, rows of the backbone output
  int input_dim = 0;       // raw feature columns the backbone consumes
  int backbone_hidden = 16;
  int gcn_layers = 2;      // stacked gated layers in the relation classifier
  int k_neighbors = 3;
  Scalar lambda = 0.05;    // edge-loss mixing factor
  int stage1_epochs = 20;
  int stage2_epochs = 20;
  Scalar stage1_lr = 1e-4;
  Scalar stage2_lr = 1e-6;
  int batch_size = 64;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar weight_decay = 5e-4;
  std::uint64_t seed = 1;
};

/// Throws ConfigError on out-of-range fields. Zero spatial/input_dim are
/// permitted (resolved against the data at training time).
void validate_config(const TrainConfig& cfg);

/// Returns a copy with spatial/input_dim filled in from the corpus (preset
/// values must match) after checking n_aus and that every record has
/// consistent shapes and label counts.
TrainConfig resolve_train_config(const TrainConfig& cfg, const Corpus& data);

// --- model ----------------------------------------------------------------

/// Desk-scale stand-in for an image backbone: two position-wise affine maps
/// with a ReLU between, taking each raw input row to a C-channel feature.
struct Backbone {
  Linear fc1;  // input_dim -> hidden
  Linear fc2;  // hidden -> channels
};

TensorPtr backbone_forward(const Backbone& b, const TensorPtr& x_raw);

/// The full parameter set. Stage-1 training populates backbone/anfl; stage 2
/// adds the relation-graph half. The stage-1 graph branch (anfl.gcn and
/// anfl.sc_anchors) is kept for checkpointing but never updated in stage 2.
struct PipelineModel {
  TrainConfig config;
  Backbone backbone;
  AnflParams anfl;
  MeflParams mefl;
  GatedGcnParams ggcn;
  Linear edge_fc;  // shared 4-way head over final edge features
  bool has_stage2 = false;
};

PipelineModel make_stage1_model(const TrainConfig& cfg, Rng& rng);
void add_stage2_params(PipelineModel& model, Rng& rng);

/// Stage-1 trainable set: backbone, AFG maps, FGG maps, stage-1 anchors.
ParameterStore stage1_parameters(const PipelineModel& model);
/// Stage-2 trainable set: backbone and AFG again (fine-tuned at the low
/// stage-2 rate) plus attention, gated-layer, stage-2 anchor and edge-head
/// parameters. FGG and the stage-1 anchors are deliberately absent.
ParameterStore stage2_parameters(const PipelineModel& model);
/// Every parameter a checkpoint of the given stage must carry.
ParameterStore checkpoint_parameters(const PipelineModel& model, TrainStage stage);

/// Node branch: backbone -> AFG -> FGG graph update -> stage-1 classifier.
TensorPtr stage1_predict(const PipelineModel& model, const Mat& input);

struct Stage2Forward {
  TensorPtr p;           // 1 x N from the stage-2 classifier
  EdgeFeatureSet edges;  // final-layer edge features, input to the edge head
};

/// Relation branch: backbone -> AFG -> MEFL edges -> gated layers -> stage-2
/// classifier. The FGG topology and stage-1 anchors take no part.
Stage2Forward stage2_predict(const PipelineModel& model, const Mat& input);

/// Adapter for the metrics module; `use_stage2` selects the branch.
Predictor make_predictor(const PipelineModel& model, bool use_stage2);

// --- checkpoints ----------------------------------------------------------

struct NamedParam {
  std::string name;
  Mat value;
};

/// A trained state frozen to disk: versioned container with the config
/// snapshot, training-set occurrence stats and the ordered parameter list.
/// Byte layout is documented in the README; round-trips are bit-exact.
struct Checkpoint {
  TrainStage stage = TrainStage::stage1;
  TrainConfig config;
  OccurrenceStats occurrence;
  std::vector<NamedParam> params;

  const Mat* find(const std::string& name) const;
};

Checkpoint make_checkpoint(const PipelineModel& model, TrainStage stage,
                           const OccurrenceStats& occurrence);

/// Rebuilds the model a checkpoint describes, bit-exact parameter values
/// included. Throws DataError(format) if a required parameter is missing or
/// the wrong shape.
PipelineModel model_from_checkpoint(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// --- optimization ---------------------------------------------------------

constexpr Scalar kAdamEpsilon = 1e-8;

/// AdamW moment buffers, one pair per parameter, in store order.
struct OptimizerState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::int64_t step = 0;
};

OptimizerState make_optimizer_state(const ParameterStore& params);

/// One decoupled-weight-decay update from the gradients currently held by
/// the parameters: p <- p * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected moments. Throws NumericError, naming the parameter,
/// on a non-finite gradient.
void optimizer_step(const ParameterStore& params, OptimizerState& state, Scalar lr,
                    Scalar beta1, Scalar beta2, Scalar weight_decay);

/// lr0 * 0.5 * (1 + cos(pi * step / total_steps)); step counts from 0 and
/// total_steps must be positive.
Scalar cosine_lr(std::int64_t step, std::int64_t total_steps, Scalar lr0);

// --- training and inference -----------------------------------------------

/// One line of the training log.
struct EpochRecord {
  int epoch = 0;  // 1-based within its stage
  TrainStage stage = TrainStage::stage1;
  Scalar loss = 0;
  Scalar lwa = 0;
  Scalar le = 0;  // always 0 in stage 1
  std::optional<Scalar> mean_f1;  // training-set macro F1, empty if undefined
};

/// Fixed-width textual form, one record per line, stable across runs.
std::string format_epoch_record(const EpochRecord& rec);

using LogSink = std::function<void(const EpochRecord&)>;

/// Optimizes the node-branch loss over the corpus for stage1_epochs and
/// returns a stage-1 checkpoint. Requires occurrence stats (every AU present
/// in the labels).
Checkpoint train_stage1(const Corpus& data, const TrainConfig& config, const LogSink& log = {});

/// Continues from a stage-1 checkpoint: fresh relation-graph parameters,
/// then optimizes the combined loss over all stage-2 parameters. The passed
/// config must agree with the checkpoint on the architecture fields.
Checkpoint train_stage2(const Corpus& data, const Checkpoint& stage1, const TrainConfig& config,
                        const LogSink& log = {});

struct InferOutput {
  Mat probs;  // batch x N, each entry in [0, 1]
  bool used_fallback = false;
  std::string warning;  // set exactly when used_fallback is
};

/// Runs the relation branch of a stage-2 checkpoint over a batch of inputs.
/// A stage-1 checkpoint falls back to the node branch and says so.
InferOutput infer(const std::vector<Mat>& batch, const Checkpoint& ckpt);

}  // namespace augraph
