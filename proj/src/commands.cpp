#include "augraph/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "augraph/ablate.hpp"
#include "augraph/anfl.hpp"
#include "augraph/errors.hpp"
#include "augraph/gated_gcn.hpp"
#include "augraph/losses.hpp"
#include "augraph/mefl.hpp"
#include "augraph/metrics.hpp"

namespace augraph {

namespace {

using Entry = std::array<std::string, 3>;

const std::vector<Entry>& key_registry() {
  static const std::vector<Entry> entries = {
      {"corpus", "", "corpus container path (gen-data writes it, the rest read it)"},
      {"checkpoint", "", "trained checkpoint for eval / infer"},
      {"stage1", "", "stage-1 checkpoint to continue from when train.stage=2"},
      {"gen.samples", "256", "number of synthetic samples"},
      {"gen.seed", "1", "generator seed"},
      {"gen.n_aus", "4", "number of AU labels"},
      {"gen.base_rates", "", "comma-separated per-AU rates; empty means 0.4 each"},
      {"gen.couplings", "", "planted pairs, i:j:strength joined with ';'"},
      {"gen.positions", "6", "spatial positions (input rows)"},
      {"gen.block_size", "2", "feature columns per AU / pair block"},
      {"gen.distractors", "2", "trailing pure-noise columns"},
      {"gen.signal", "1", "active-class mean shift"},
      {"gen.noise", "0.25", "within-class feature spread"},
      {"gen.jitter", "0.1", "per-position perturbation"},
      {"gen.sweeps", "5", "Gibbs sweeps per label sample"},
      {"train.stage", "both", "which stages to run: both, 1 or 2"},
      {"train.channels", "8", "per-AU feature width C"},
      {"train.spatial", "0", "backbone output rows D; 0 adopts the corpus shape"},
      {"train.input_dim", "0", "raw feature columns; 0 adopts the corpus shape"},
      {"train.backbone_hidden", "16", "backbone hidden width"},
      {"train.gcn_layers", "2", "stacked gated layers in the relation classifier"},
      {"train.k", "3", "neighbours per node in the stage-1 graph"},
      {"train.lambda", "0.05", "edge-loss mixing factor"},
      {"train.stage1_epochs", "20", "stage-1 epochs"},
      {"train.stage2_epochs", "20", "stage-2 epochs"},
      {"train.stage1_lr", "1e-4", "stage-1 base learning rate"},
      {"train.stage2_lr", "1e-6", "stage-2 base learning rate"},
      {"train.batch", "64", "minibatch size"},
      {"train.beta1", "0.9", "first-moment decay"},
      {"train.beta2", "0.999", "second-moment decay"},
      {"train.weight_decay", "5e-4", "decoupled weight decay"},
      {"train.seed", "1", "training seed (init + shuffling)"},
      {"eval.threshold", "0.5", "probability cut for the confusion counts"},
      {"ablate.settings", "all", "comma list of ablation settings, or 'all'"},
      {"ablate.seeds", "3", "seeds per ablation setting"},
      {"ablate.split", "0.8", "train fraction of each per-seed split"},
      {"gradcheck.corrupt", "false", "plant a wrong gradient as a negative control"},
  };
  return entries;
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(trim(s.substr(start)));
      return parts;
    }
    parts.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text, const char* kind) {
  throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as " + kind);
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_value(key, text, "an integer");
  return value;
}

Scalar parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) bad_value(key, text, "a number");
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) bad_value(key, text, "a number");
  return value;
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw DataError(DataError::Kind::missing, "cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw DataError(DataError::Kind::truncated, "short write to '" + path + "'");
  }
}

std::string require_path(const RunSettings& s, const std::string& key, const char* what) {
  const std::string& path = s.get(key);
  if (path.empty()) {
    throw ConfigError(std::string("set ") + key + "=PATH to " + what);
  }
  return path;
}

std::string fmt_g(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Scalar checked_threshold(const RunSettings& s) {
  const Scalar t = s.get_scalar("eval.threshold");
  if (!(t > 0.0 && t < 1.0)) {
    throw ConfigError("eval.threshold must lie strictly between 0 and 1, got " + fmt_g(t));
  }
  return t;
}

}  // namespace

RunSettings::RunSettings() {
  for (const Entry& e : key_registry()) values_.emplace_back(e[0], e[1]);
}

const std::vector<Entry>& RunSettings::registry() { return key_registry(); }

void RunSettings::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : values_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunSettings::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunSettings::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file '" + path + "' line " + std::to_string(line_no) +
                        ": expected key=value, got '" + text + "'");
    }
    set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

const std::string& RunSettings::get(const std::string& key) const {
  for (const auto& [k, v] : values_) {
    if (k == key) return v;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

int RunSettings::get_int(const std::string& key) const {
  const long long value = parse_integer(key, get(key));
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
    throw ConfigError("config key '" + key + "': value " + std::to_string(value) +
                      " is out of range");
  }
  return static_cast<int>(value);
}

std::uint64_t RunSettings::get_u64(const std::string& key) const {
  const std::string t = trim(get(key));
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    bad_value(key, get(key), "an unsigned integer");
  }
  return value;
}

Scalar RunSettings::get_scalar(const std::string& key) const {
  return parse_number(key, get(key));
}

bool RunSettings::get_bool(const std::string& key) const {
  const std::string t = trim(get(key));
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad_value(key, get(key), "a boolean (true/false)");
}

std::string RunSettings::render() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

GeneratorSpec RunSettings::generator_spec() const {
  GeneratorSpec spec;
  spec.n_aus = get_int("gen.n_aus");
  const std::string rates_text = trim(get("gen.base_rates"));
  if (rates_text.empty()) {
    spec.base_rates.assign(static_cast<std::size_t>(std::max(spec.n_aus, 0)), 0.4);
  } else {
    for (const std::string& part : split(rates_text, ',')) {
      spec.base_rates.push_back(parse_number("gen.base_rates", part));
    }
    if (static_cast<int>(spec.base_rates.size()) != spec.n_aus) {
      throw ConfigError("gen.base_rates: expected " + std::to_string(spec.n_aus) +
                        " entries, got " + std::to_string(spec.base_rates.size()));
    }
  }
  const std::string couplings_text = trim(get("gen.couplings"));
  if (!couplings_text.empty()) {
    for (const std::string& chunk : split(couplings_text, ';')) {
      if (chunk.empty()) continue;
      const std::vector<std::string> parts = split(chunk, ':');
      if (parts.size() != 3) {
        throw ConfigError("gen.couplings: expected i:j:strength, got '" + chunk + "'");
      }
      PairCoupling c;
      c.i = static_cast<int>(parse_integer("gen.couplings", parts[0]));
      c.j = static_cast<int>(parse_integer("gen.couplings", parts[1]));
      c.strength = parse_number("gen.couplings", parts[2]);
      spec.couplings.push_back(c);
    }
  }
  spec.positions = get_int("gen.positions");
  spec.block_size = get_int("gen.block_size");
  spec.distractors = get_int("gen.distractors");
  spec.signal = get_scalar("gen.signal");
  spec.noise = get_scalar("gen.noise");
  spec.jitter = get_scalar("gen.jitter");
  spec.gibbs_sweeps = get_int("gen.sweeps");
  return spec;
}

TrainConfig RunSettings::train_config(int n_aus) const {
  TrainConfig cfg;
  cfg.n_aus = n_aus;
  cfg.channels = get_int("train.channels");
  cfg.spatial = get_int("train.spatial");
  cfg.input_dim = get_int("train.input_dim");
  cfg.backbone_hidden = get_int("train.backbone_hidden");
  cfg.gcn_layers = get_int("train.gcn_layers");
  cfg.k_neighbors = get_int("train.k");
  cfg.lambda = get_scalar("train.lambda");
  cfg.stage1_epochs = get_int("train.stage1_epochs");
  cfg.stage2_epochs = get_int("train.stage2_epochs");
  cfg.stage1_lr = get_scalar("train.stage1_lr");
  cfg.stage2_lr = get_scalar("train.stage2_lr");
  cfg.batch_size = get_int("train.batch");
  cfg.beta1 = get_scalar("train.beta1");
  cfg.beta2 = get_scalar("train.beta2");
  cfg.weight_decay = get_scalar("train.weight_decay");
  cfg.seed = get_u64("train.seed");
  return cfg;
}

int cmd_gen_data(const RunSettings& s, const std::string& out_dir) {
  const GeneratorSpec spec = s.generator_spec();
  const Corpus corpus = generate_synthetic(spec, s.get_int("gen.samples"), s.get_u64("gen.seed"));
  std::string path = s.get("corpus");
  if (path.empty()) path = path_join(out_dir, "corpus.bin");
  save_corpus(corpus, path);

  std::cout << "wrote " << corpus.size() << " samples, " << corpus.n_aus << " AUs, inputs "
            << corpus.records.front().input.rows() << "x" << corpus.records.front().input.cols()
            << " -> " << path << '\n';
  if (corpus.occurrence) {
    std::cout << "occurrence rates:";
    for (Eigen::Index i = 0; i < corpus.occurrence->rates.cols(); ++i) {
      std::cout << ' ' << fmt_g(corpus.occurrence->rates(0, i));
    }
    std::cout << '\n';
  } else {
    std::cout << "warning: some AUs never occur; this corpus cannot be trained on\n";
  }
  return 0;
}

int cmd_train(const RunSettings& s, const std::string& out_dir) {
  const std::string stage = s.get("train.stage");
  if (stage != "both" && stage != "1" && stage != "2") {
    throw ConfigError("train.stage must be both, 1 or 2, got '" + stage + "'");
  }
  const Corpus corpus = load_corpus(require_path(s, "corpus", "a corpus file"));
  const TrainConfig cfg = s.train_config(corpus.n_aus);
  const Scalar threshold = checked_threshold(s);

  const std::string log_path = path_join(out_dir, "metrics.log");
  std::ofstream log_file(log_path, std::ios::trunc);
  if (!log_file) {
    throw DataError(DataError::Kind::missing, "cannot open '" + log_path + "' for writing");
  }
  const LogSink sink = [&](const EpochRecord& rec) {
    const std::string line = format_epoch_record(rec);
    log_file << line << '\n';
    std::cout << line << '\n';
  };

  Checkpoint first;
  if (stage == "2") {
    first = load_checkpoint(require_path(s, "stage1", "a stage-1 checkpoint"));
  } else {
    first = train_stage1(corpus, cfg, sink);
    save_checkpoint(first, path_join(out_dir, "stage1.ckpt"));
  }
  Checkpoint last = first;
  if (stage != "1") {
    last = train_stage2(corpus, first, cfg, sink);
    save_checkpoint(last, path_join(out_dir, "stage2.ckpt"));
  }
  log_file.close();
  if (!log_file) {
    throw DataError(DataError::Kind::truncated, "short write to '" + log_path + "'");
  }

  const PipelineModel model = model_from_checkpoint(last);
  const Predictor predict = make_predictor(model, last.stage == TrainStage::stage2);
  const EvalReport report = evaluate(predict, corpus, threshold);
  {
    std::ofstream csv(path_join(out_dir, "report.csv"), std::ios::trunc);
    write_report_csv(report, csv);
  }
  write_text(path_join(out_dir, "report.txt"), format_report(report));
  std::cout << format_report(report);
  return 0;
}

int cmd_eval(const RunSettings& s, const std::string& out_dir) {
  const Scalar threshold = checked_threshold(s);
  const Corpus corpus = load_corpus(require_path(s, "corpus", "a corpus file"));
  const Checkpoint ckpt = load_checkpoint(require_path(s, "checkpoint", "a trained checkpoint"));
  const PipelineModel model = model_from_checkpoint(ckpt);
  const Predictor predict = make_predictor(model, ckpt.stage == TrainStage::stage2);
  const EvalReport report = evaluate(predict, corpus, threshold);
  {
    std::ofstream csv(path_join(out_dir, "report.csv"), std::ios::trunc);
    write_report_csv(report, csv);
  }
  write_text(path_join(out_dir, "report.txt"), format_report(report));
  std::cout << format_report(report);
  return 0;
}

int cmd_infer(const RunSettings& s, const std::string& out_dir) {
  const Corpus corpus = load_corpus(require_path(s, "corpus", "a corpus file"));
  const Checkpoint ckpt = load_checkpoint(require_path(s, "checkpoint", "a trained checkpoint"));
  std::vector<Mat> batch;
  batch.reserve(corpus.size());
  for (const SampleRecord& rec : corpus.records) batch.push_back(rec.input);
  const InferOutput out = infer(batch, ckpt);
  if (out.used_fallback) {
    std::cerr << "warning: " << out.warning << '\n';
  }

  std::ostringstream csv;
  csv << "id";
  for (Eigen::Index i = 0; i < out.probs.cols(); ++i) csv << ",au" << i;
  csv << '\n';
  for (Eigen::Index r = 0; r < out.probs.rows(); ++r) {
    csv << corpus.records[static_cast<std::size_t>(r)].id;
    for (Eigen::Index c = 0; c < out.probs.cols(); ++c) csv << ',' << fmt_g(out.probs(r, c));
    csv << '\n';
  }
  const std::string path = path_join(out_dir, "predictions.csv");
  write_text(path, csv.str());
  std::cout << "wrote " << out.probs.rows() << " predictions -> " << path << '\n';
  return 0;
}

int cmd_gradcheck(const RunSettings& s, const std::string& out_dir) {
  const std::vector<GradCheckLine> lines = run_gradcheck(s.get_bool("gradcheck.corrupt"));
  std::ostringstream text;
  std::string offenders;
  for (const GradCheckLine& line : lines) {
    const bool ok = line.max_rel_err <= kGradCheckTolerance;
    if (!ok) {
      if (!offenders.empty()) offenders += ", ";
      offenders += line.component;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", line.max_rel_err);
    text << line.component << ": max_rel_err=" << buf << (ok ? " ok" : " FAIL") << '\n';
  }
  write_text(path_join(out_dir, "gradcheck.txt"), text.str());
  std::cout << text.str();
  if (!offenders.empty()) {
    std::cerr << "gradient check exceeded tolerance " << fmt_g(kGradCheckTolerance) << ": "
              << offenders << '\n';
    return 3;
  }
  return 0;
}

int cmd_ablate(const RunSettings& s, const std::string& out_dir) {
  const Corpus corpus = load_corpus(require_path(s, "corpus", "a corpus file"));
  const TrainConfig cfg = s.train_config(corpus.n_aus);
  AblationOptions opts;
  opts.n_seeds = s.get_int("ablate.seeds");
  opts.split_fraction = s.get_scalar("ablate.split");
  opts.threshold = checked_threshold(s);
  const std::string settings_text = trim(s.get("ablate.settings"));
  if (settings_text != "all") {
    opts.settings.clear();
    for (const std::string& name : split(settings_text, ',')) {
      opts.settings.push_back(parse_ablation_setting(name));
    }
  }
  const std::vector<AblationRow> rows = run_ablation(corpus, cfg, opts);
  {
    std::ofstream csv(path_join(out_dir, "ablation.csv"), std::ios::trunc);
    write_ablation_csv(rows, csv);
  }
  const std::string table = format_ablation_table(rows);
  write_text(path_join(out_dir, "ablation.txt"), table);
  std::cout << table;
  return 0;
}

namespace {

Mat random_mat(Eigen::Index rows, Eigen::Index cols, Rng& rng, Scalar mean = 0.0,
               Scalar scale = 0.5) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = mean + scale * rng.normal();
  }
  return m;
}

/// Identity in the forward pass whose backward pass inflates the adjoint by
/// 5%, so a finite-difference sweep through it must report a mismatch.
TensorPtr wrong_gradient(const TensorPtr& a) {
  auto out = std::make_shared<Tensor>(a->value, a->requires_grad);
  out->parents = {a};
  Tensor* src = a.get();
  out->backprop = [src](const Mat& adjoint, const PushFn& push) {
    push(src, (adjoint.array() * 1.05).matrix());
  };
  return out;
}

}  // namespace

std::vector<GradCheckLine> run_gradcheck(bool corrupt) {
  constexpr Eigen::Index kSpatial = 4;  // D
  constexpr Eigen::Index kChannels = 5;  // C
  constexpr int kNodes = 3;  // N
  constexpr Scalar kStep = 1e-4;

  Mat y(1, kNodes);
  y << 1, 0, 1;
  Mat rates(1, kNodes);
  rates << 0.5, 0.25, 0.25;
  const Mat weights = compute_weights(rates);

  std::vector<GradCheckLine> lines;

  // Fresh factory parameters sit close to the ReLU/cosine dead zones (small
  // anchors, centred inputs), where the loss can go flat and a sweep would
  // pass vacuously. Positive-mean inputs and anchors keep every nonlinearity
  // in a generic position.
  {
    Rng rng(2101);
    const AnflParams params = make_anfl_params(kNodes, kChannels, 2, rng);
    params.sc_anchors->value = random_mat(kNodes, kChannels, rng, 0.3, 0.2);
    const TensorPtr x = variable(random_mat(kSpatial, kChannels, rng, 0.2, 0.5));
    std::vector<TensorPtr> wrt{x, params.gcn.w_msg, params.gcn.w_upd, params.sc_anchors};
    for (const Linear& fc : params.per_au_fc) {
      wrt.push_back(fc.w);
      wrt.push_back(fc.b);
    }
    const auto f = [&]() { return weighted_asymmetric_loss(anfl_forward(x, params).p, y, weights); };
    lines.push_back({"anfl_forward+weighted_loss", grad_check(f, wrt, kStep)});
  }

  {
    Rng rng(2102);
    const MeflParams params = make_mefl_params(kChannels, rng);
    std::vector<TensorPtr> u;
    for (int i = 0; i < kNodes; ++i) u.push_back(variable(random_mat(kSpatial, kChannels, rng)));
    const TensorPtr x = variable(random_mat(kSpatial, kChannels, rng));
    std::vector<TensorPtr> wrt = u;
    wrt.push_back(x);
    for (const AttentionParams* attn : {&params.fam, &params.arm}) {
      wrt.push_back(attn->w_q);
      wrt.push_back(attn->w_k);
      wrt.push_back(attn->w_v);
    }
    const auto f = [&]() {
      const EdgeFeatureSet edges = mefl_forward(u, x, params);
      TensorPtr total;
      for (const TensorPtr& e : edges.flat()) {
        const TensorPtr s = sum(e);
        total = total ? add(total, s) : s;
      }
      return corrupt ? wrong_gradient(total) : total;
    };
    lines.push_back({"mefl_forward", grad_check(f, wrt, kStep)});
  }

  {
    Rng rng(2103);
    const GatedGcnParams params = make_gated_gcn_params(kNodes, kChannels, 2, rng);
    params.sc_anchors->value = random_mat(kNodes, kChannels, rng, 0.3, 0.2);
    const Linear head = make_linear(kChannels, 4, rng);
    const TensorPtr v0 = variable(random_mat(kNodes, kChannels, rng, 0.2, 0.5));
    EdgeFeatureSet e0(kNodes);
    std::vector<TensorPtr> wrt{v0};
    for (int i = 0; i < kNodes; ++i) {
      for (int j = 0; j < kNodes; ++j) {
        if (i == j) continue;
        const TensorPtr e = variable(random_mat(1, kChannels, rng));
        e0.set(i, j, e);
        wrt.push_back(e);
      }
    }
    for (const GatedGcnLayerParams& layer : params.layers) {
      wrt.insert(wrt.end(), {layer.w1, layer.w2, layer.w3, layer.w4, layer.w5});
    }
    wrt.insert(wrt.end(), {params.sc_anchors, head.w, head.b});
    const auto f = [&]() {
      const GcnForwardResult res = gcn_forward(v0, e0, params);
      const TensorPtr lwa = weighted_asymmetric_loss(res.p, y, weights);
      const TensorPtr le = edge_cooccurrence_loss(edge_logits(res.graph.edges, head), edge_labels(y));
      return combined_loss(lwa, le, 0.05);
    };
    lines.push_back({"gated_gcn_forward+combined_loss", grad_check(f, wrt, kStep)});
  }

  return lines;
}

int run_command(const std::string& command, const RunSettings& settings,
                const std::string& out_dir) {
  try {
    if (out_dir.empty()) {
      throw ConfigError("output directory must not be empty");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      throw DataError(DataError::Kind::missing,
                      "cannot create output directory '" + out_dir + "': " + ec.message());
    }
    write_text(path_join(out_dir, "effective_config.txt"), settings.render());
    if (command == "gen-data") return cmd_gen_data(settings, out_dir);
    if (command == "train") return cmd_train(settings, out_dir);
    if (command == "eval") return cmd_eval(settings, out_dir);
    if (command == "infer") return cmd_infer(settings, out_dir);
    if (command == "gradcheck") return cmd_gradcheck(settings, out_dir);
    if (command == "ablate") return cmd_ablate(settings, out_dir);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace augraph
