#include <cstring>

#include "augraph/bytes.hpp"
#include "augraph/errors.hpp"
#include "augraph/trainer.hpp"

namespace augraph {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'G', 'C', 'H', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

// Guards against absurd dimensions in a corrupted-but-checksum-valid file.
constexpr std::uint32_t kMaxDim = 1u << 20;

std::uint32_t checked_u32(int v, const char* what) {
  if (v < 0) throw ConfigError(std::string("checkpoint: negative ") + what);
  return static_cast<std::uint32_t>(v);
}

}  // namespace

const Mat* Checkpoint::find(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p.value;
  }
  return nullptr;
}

Checkpoint make_checkpoint(const PipelineModel& model, TrainStage stage,
                           const OccurrenceStats& occurrence) {
  if (stage == TrainStage::stage2 && !model.has_stage2) {
    throw ConfigError("make_checkpoint: model has no stage-2 parameters");
  }
  if (occurrence.rates.cols() != model.config.n_aus) {
    throw ConfigError("make_checkpoint: occurrence stats cover " +
                      std::to_string(occurrence.rates.cols()) + " AUs, model has " +
                      std::to_string(model.config.n_aus));
  }
  Checkpoint ckpt;
  ckpt.stage = stage;
  ckpt.config = model.config;
  ckpt.occurrence = occurrence;
  const ParameterStore store = checkpoint_parameters(model, stage);
  ckpt.params.reserve(store.size());
  for (const auto& item : store.items()) {
    ckpt.params.push_back({item.name, item.tensor->value});
  }
  return ckpt;
}

PipelineModel model_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.config.spatial < 1 || ckpt.config.input_dim < 1) {
    throw ConfigError("model_from_checkpoint: config has unresolved input dimensions");
  }
  // Structure first (the init draws are immediately overwritten), then values.
  Rng scratch(0);
  PipelineModel model = make_stage1_model(ckpt.config, scratch);
  if (ckpt.stage == TrainStage::stage2) add_stage2_params(model, scratch);

  const ParameterStore store = checkpoint_parameters(model, ckpt.stage);
  if (store.size() != ckpt.params.size()) {
    throw DataError(DataError::Kind::format,
                    "checkpoint carries " + std::to_string(ckpt.params.size()) +
                        " parameters, the described model needs " + std::to_string(store.size()));
  }
  for (const auto& item : store.items()) {
    const Mat* v = ckpt.find(item.name);
    if (v == nullptr) {
      throw DataError(DataError::Kind::format,
                      "checkpoint is missing parameter '" + item.name + "'");
    }
    if (v->rows() != item.tensor->rows() || v->cols() != item.tensor->cols()) {
      throw DataError(DataError::Kind::format,
                      "checkpoint parameter '" + item.name + "' is " + std::to_string(v->rows()) +
                          "x" + std::to_string(v->cols()) + ", expected " +
                          shape_str(*item.tensor));
    }
    item.tensor->value = *v;
  }
  return model;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  if (ckpt.stage != TrainStage::stage1 && ckpt.stage != TrainStage::stage2) {
    throw ConfigError("save_checkpoint: invalid stage marker");
  }
  const TrainConfig& c = ckpt.config;
  std::vector<std::uint8_t> buf;
  bytes::put_bytes(buf, kMagic, sizeof kMagic);
  bytes::put_u32(buf, kVersion);
  bytes::put_u32(buf, static_cast<std::uint32_t>(ckpt.stage));

  bytes::put_u32(buf, checked_u32(c.n_aus, "n_aus"));
  bytes::put_u32(buf, checked_u32(c.channels, "channels"));
  bytes::put_u32(buf, checked_u32(c.spatial, "spatial"));
  bytes::put_u32(buf, checked_u32(c.input_dim, "input_dim"));
  bytes::put_u32(buf, checked_u32(c.backbone_hidden, "backbone_hidden"));
  bytes::put_u32(buf, checked_u32(c.gcn_layers, "gcn_layers"));
  bytes::put_u32(buf, checked_u32(c.k_neighbors, "k_neighbors"));
  bytes::put_u32(buf, checked_u32(c.stage1_epochs, "stage1_epochs"));
  bytes::put_u32(buf, checked_u32(c.stage2_epochs, "stage2_epochs"));
  bytes::put_u32(buf, checked_u32(c.batch_size, "batch_size"));
  bytes::put_f64(buf, c.lambda);
  bytes::put_f64(buf, c.stage1_lr);
  bytes::put_f64(buf, c.stage2_lr);
  bytes::put_f64(buf, c.beta1);
  bytes::put_f64(buf, c.beta2);
  bytes::put_f64(buf, c.weight_decay);
  bytes::put_u64(buf, c.seed);

  if (ckpt.occurrence.rates.rows() != 1 || ckpt.occurrence.rates.cols() != c.n_aus) {
    throw ConfigError("save_checkpoint: occurrence stats do not match n_aus");
  }
  bytes::put_u32(buf, static_cast<std::uint32_t>(ckpt.occurrence.rates.cols()));
  for (Eigen::Index i = 0; i < ckpt.occurrence.rates.cols(); ++i) {
    bytes::put_f64(buf, ckpt.occurrence.rates(0, i));
  }

  bytes::put_u32(buf, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& p : ckpt.params) {
    bytes::put_str(buf, p.name);
    bytes::put_u32(buf, 2);  // rank; every tensor here is a matrix
    bytes::put_u32(buf, static_cast<std::uint32_t>(p.value.rows()));
    bytes::put_u32(buf, static_cast<std::uint32_t>(p.value.cols()));
    bytes::put_bytes(buf, p.value.data(), sizeof(Scalar) * static_cast<std::size_t>(p.value.size()));
  }

  bytes::write_sealed(path, buf, "save_checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::vector<std::uint8_t> buf = bytes::read_sealed(path, kMagic, "checkpoint file");
  bytes::Reader r(buf.data(), buf.size() - 8, "checkpoint file");
  char magic[8];
  r.read(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError(DataError::Kind::version,
                    "checkpoint '" + path + "' is format version " + std::to_string(version) +
                        ", expected " + std::to_string(kVersion));
  }

  Checkpoint ckpt;
  const std::uint32_t stage = r.u32();
  if (stage != 1 && stage != 2) {
    throw DataError(DataError::Kind::format,
                    "checkpoint '" + path + "' has stage marker " + std::to_string(stage));
  }
  ckpt.stage = static_cast<TrainStage>(stage);

  TrainConfig& c = ckpt.config;
  c.n_aus = static_cast<int>(r.u32());
  c.channels = static_cast<int>(r.u32());
  c.spatial = static_cast<int>(r.u32());
  c.input_dim = static_cast<int>(r.u32());
  c.backbone_hidden = static_cast<int>(r.u32());
  c.gcn_layers = static_cast<int>(r.u32());
  c.k_neighbors = static_cast<int>(r.u32());
  c.stage1_epochs = static_cast<int>(r.u32());
  c.stage2_epochs = static_cast<int>(r.u32());
  c.batch_size = static_cast<int>(r.u32());
  c.lambda = r.f64();
  c.stage1_lr = r.f64();
  c.stage2_lr = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.weight_decay = r.f64();
  c.seed = r.u64();
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::format,
                    "checkpoint '" + path + "' holds an invalid config: " + e.what());
  }
  if (c.spatial < 1 || c.input_dim < 1) {
    throw DataError(DataError::Kind::format,
                    "checkpoint '" + path + "' has unresolved input dimensions");
  }

  const std::uint32_t occ_n = r.u32();
  if (occ_n != static_cast<std::uint32_t>(c.n_aus)) {
    throw DataError(DataError::Kind::format,
                    "checkpoint '" + path + "' occurrence stats cover " + std::to_string(occ_n) +
                        " AUs, config says " + std::to_string(c.n_aus));
  }
  Mat rates(1, static_cast<Eigen::Index>(occ_n));
  for (std::uint32_t i = 0; i < occ_n; ++i) rates(0, static_cast<Eigen::Index>(i)) = r.f64();
  try {
    ckpt.occurrence = make_occurrence_stats(rates);
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::format,
                    "checkpoint '" + path + "' holds invalid occurrence rates: " + e.what());
  }

  const std::uint32_t n_params = r.u32();
  ckpt.params.reserve(n_params);
  for (std::uint32_t k = 0; k < n_params; ++k) {
    NamedParam p;
    p.name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank != 2) {
      throw DataError(DataError::Kind::format, "checkpoint parameter '" + p.name + "' has rank " +
                                                   std::to_string(rank) + ", expected 2");
    }
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
      throw DataError(DataError::Kind::format, "checkpoint parameter '" + p.name +
                                                   "' has nonsense shape " + std::to_string(rows) +
                                                   "x" + std::to_string(cols));
    }
    p.value = Mat(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.read(p.value.data(), sizeof(Scalar) * static_cast<std::size_t>(p.value.size()));
    ckpt.params.push_back(std::move(p));
  }
  if (r.remaining() != 0) {
    throw DataError(DataError::Kind::format, "checkpoint '" + path + "' has " +
                                                 std::to_string(r.remaining()) +
                                                 " unexpected trailing bytes");
  }
  return ckpt;
}

}  // namespace augraph
