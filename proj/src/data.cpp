#include "augraph/data.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "augraph/bytes.hpp"
#include "augraph/errors.hpp"
#include "augraph/rng.hpp"

namespace augraph {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kVersion = 1;

void validate_spec(const GeneratorSpec& spec) {
  if (spec.n_aus < 2) throw ConfigError("generator: need at least 2 AUs");
  if (static_cast<int>(spec.base_rates.size()) != spec.n_aus) {
    throw ConfigError("generator: " + std::to_string(spec.base_rates.size()) +
                      " base rates for " + std::to_string(spec.n_aus) + " AUs");
  }
  for (int i = 0; i < spec.n_aus; ++i) {
    const Scalar r = spec.base_rates[static_cast<std::size_t>(i)];
    if (!(r > 0.0 && r < 1.0)) {
      throw ConfigError("generator: base rate for AU " + std::to_string(i) + " is " +
                        std::to_string(r) + ", must lie strictly inside (0, 1)");
    }
  }
  for (const auto& c : spec.couplings) {
    if (c.i < 0 || c.j < 0 || c.i >= spec.n_aus || c.j >= spec.n_aus || c.i == c.j) {
      throw ConfigError("generator: coupling (" + std::to_string(c.i) + ", " +
                        std::to_string(c.j) + ") references invalid AUs");
    }
  }
  if (spec.positions < 1 || spec.block_size < 1 || spec.distractors < 0) {
    throw ConfigError("generator: positions/block_size must be >= 1, distractors >= 0");
  }
  if (!(spec.noise > 0.0) || spec.jitter < 0.0) {
    throw ConfigError("generator: noise must be positive, jitter non-negative");
  }
  if (spec.gibbs_sweeps < 1) throw ConfigError("generator: need at least one Gibbs sweep");
}

}  // namespace

const OccurrenceStats& Corpus::require_occurrence() const {
  if (!occurrence) {
    std::string missing;
    for (int i = 0; i < n_aus; ++i) {
      bool seen = false;
      for (const auto& r : records) {
        if (r.labels[static_cast<std::size_t>(i)] == 1) {
          seen = true;
          break;
        }
      }
      if (!seen) missing += (missing.empty() ? "" : ", ") + std::to_string(i);
    }
    throw ConfigError("corpus has no occurrence stats; AUs never active: [" + missing + "]");
  }
  return *occurrence;
}

CooccurrenceMatrix::CooccurrenceMatrix(int n_aus) : n_(n_aus) {
  if (n_aus < 2) throw ConfigError("CooccurrenceMatrix: need at least 2 AUs");
  counts_.assign(static_cast<std::size_t>(n_aus) * n_aus * 4, 0);
}

CooccurrenceMatrix CooccurrenceMatrix::from_records(const std::vector<SampleRecord>& records,
                                                    int n_aus) {
  CooccurrenceMatrix m(n_aus);
  for (const auto& rec : records) {
    if (static_cast<int>(rec.labels.size()) != n_aus) {
      throw ConfigError("CooccurrenceMatrix: record '" + rec.id + "' has " +
                        std::to_string(rec.labels.size()) + " labels, expected " +
                        std::to_string(n_aus));
    }
    for (int i = 0; i < n_aus; ++i) {
      for (int j = 0; j < n_aus; ++j) {
        if (i == j) continue;
        const int cls = edge_label(rec.labels[static_cast<std::size_t>(i)],
                                   rec.labels[static_cast<std::size_t>(j)]);
        ++m.counts_[(static_cast<std::size_t>(i) * n_aus + j) * 4 + cls];
      }
    }
  }
  m.total_ = static_cast<std::int64_t>(records.size());
  return m;
}

std::int64_t CooccurrenceMatrix::count(int i, int j, int cls) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j || cls < 0 || cls > 3) {
    throw ConfigError("CooccurrenceMatrix: bad index (" + std::to_string(i) + ", " +
                      std::to_string(j) + ", " + std::to_string(cls) + ")");
  }
  return counts_[(static_cast<std::size_t>(i) * n_ + j) * 4 + cls];
}

Corpus generate_synthetic(const GeneratorSpec& spec, int n_samples, std::uint64_t seed) {
  validate_spec(spec);
  if (n_samples < 1) throw ConfigError("generator: need at least one sample");

  const int n = spec.n_aus;
  Mat coupling = Mat::Zero(n, n);
  for (const auto& c : spec.couplings) {
    coupling(c.i, c.j) += c.strength;
    coupling(c.j, c.i) += c.strength;
  }
  std::vector<Scalar> alpha(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Scalar r = spec.base_rates[static_cast<std::size_t>(i)];
    alpha[static_cast<std::size_t>(i)] = std::log(r / (1.0 - r));
  }

  Rng rng(seed);
  const Eigen::Index f = spec.feature_dim();
  Corpus corpus;
  corpus.n_aus = n;
  corpus.planted = coupling;
  corpus.records.reserve(static_cast<std::size_t>(n_samples));

  for (int s = 0; s < n_samples; ++s) {
    // Joint labels: independent draws, then Gibbs sweeps under the coupled
    // field p(y_i = 1 | rest) = sigmoid(alpha_i + sum_j coupling_ij y_j).
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] =
          rng.bernoulli(spec.base_rates[static_cast<std::size_t>(i)]) ? 1 : 0;
    }
    for (int sweep = 0; sweep < spec.gibbs_sweeps; ++sweep) {
      for (int i = 0; i < n; ++i) {
        Scalar field = alpha[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
          if (j != i) field += coupling(i, j) * y[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = rng.bernoulli(1.0 / (1.0 + std::exp(-field))) ? 1 : 0;
      }
    }

    // Base feature row: one Gaussian block per AU, one per coupled pair
    // (active only when both ends are), then distractor noise.
    Mat base(1, f);
    Eigen::Index col = 0;
    for (int i = 0; i < n; ++i) {
      const Scalar mean = y[static_cast<std::size_t>(i)] ? spec.signal : 0.0;
      for (int b = 0; b < spec.block_size; ++b) base(0, col++) = rng.normal(mean, spec.noise);
    }
    for (const auto& c : spec.couplings) {
      const Scalar mean =
          (y[static_cast<std::size_t>(c.i)] && y[static_cast<std::size_t>(c.j)]) ? spec.signal
                                                                                 : 0.0;
      for (int b = 0; b < spec.block_size; ++b) base(0, col++) = rng.normal(mean, spec.noise);
    }
    for (int d = 0; d < spec.distractors; ++d) base(0, col++) = rng.normal(0.0, 1.0);

    SampleRecord rec;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "s%06d", s);
    rec.id = idbuf;
    rec.labels = std::move(y);
    rec.input = Mat(spec.positions, f);
    for (Eigen::Index pos = 0; pos < spec.positions; ++pos) {
      for (Eigen::Index c = 0; c < f; ++c) {
        rec.input(pos, c) = base(0, c) + rng.normal(0.0, spec.jitter);
      }
    }
    corpus.records.push_back(std::move(rec));
  }

  try {
    corpus.occurrence = compute_occurrence(corpus.records, n);
  } catch (const ConfigError&) {
    corpus.occurrence.reset();  // legal corpus, just unusable for training as-is
  }
  return corpus;
}

OccurrenceStats compute_occurrence(const std::vector<SampleRecord>& records, int n_aus) {
  if (records.empty()) throw ConfigError("compute_occurrence: empty record list");
  Mat rates = Mat::Zero(1, n_aus);
  for (const auto& rec : records) {
    if (static_cast<int>(rec.labels.size()) != n_aus) {
      throw ConfigError("compute_occurrence: record '" + rec.id + "' has " +
                        std::to_string(rec.labels.size()) + " labels, expected " +
                        std::to_string(n_aus));
    }
    for (int i = 0; i < n_aus; ++i) rates(0, i) += rec.labels[static_cast<std::size_t>(i)];
  }
  rates /= static_cast<Scalar>(records.size());

  std::string missing;
  for (int i = 0; i < n_aus; ++i) {
    if (rates(0, i) == 0.0) missing += (missing.empty() ? "" : ", ") + std::to_string(i);
  }
  if (!missing.empty()) {
    throw ConfigError("compute_occurrence: AUs [" + missing +
                      "] never occur; weights would divide by zero");
  }
  return make_occurrence_stats(rates);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  if (corpus.records.empty()) throw ConfigError("save_corpus: empty corpus");
  const Eigen::Index rows = corpus.records.front().input.rows();
  const Eigen::Index cols = corpus.records.front().input.cols();

  std::vector<std::uint8_t> buf;
  bytes::put_bytes(buf, kMagic, sizeof kMagic);
  bytes::put_u32(buf, kVersion);
  bytes::put_u32(buf, static_cast<std::uint32_t>(corpus.records.size()));
  bytes::put_u32(buf, static_cast<std::uint32_t>(corpus.n_aus));
  bytes::put_u32(buf, static_cast<std::uint32_t>(rows));
  bytes::put_u32(buf, static_cast<std::uint32_t>(cols));

  const bool planted = corpus.planted.size() > 0;
  bytes::put_u32(buf, planted ? 1 : 0);
  if (planted) {
    if (corpus.planted.rows() != corpus.n_aus || corpus.planted.cols() != corpus.n_aus) {
      throw ConfigError("save_corpus: planted matrix must be n_aus x n_aus");
    }
    bytes::put_bytes(buf, corpus.planted.data(), sizeof(Scalar) * corpus.planted.size());
  }

  const std::size_t label_bytes = (static_cast<std::size_t>(corpus.n_aus) + 7) / 8;
  for (const auto& rec : corpus.records) {
    if (rec.input.rows() != rows || rec.input.cols() != cols) {
      throw ConfigError("save_corpus: record '" + rec.id + "' shape differs from the first");
    }
    bytes::put_str(buf, rec.id);
    bytes::put_bytes(buf, rec.input.data(), sizeof(Scalar) * rec.input.size());
    std::vector<std::uint8_t> packed(label_bytes, 0);
    for (int i = 0; i < corpus.n_aus; ++i) {
      if (rec.labels[static_cast<std::size_t>(i)]) {
        packed[static_cast<std::size_t>(i) / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      }
    }
    bytes::put_bytes(buf, packed.data(), packed.size());
  }

  bytes::write_sealed(path, buf, "save_corpus");
}

Corpus load_corpus(const std::string& path) {
  std::vector<std::uint8_t> buf = bytes::read_sealed(path, kMagic, "corpus file");
  bytes::Reader r(buf.data(), buf.size() - 8, "corpus file");
  char magic[8];
  r.read(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError(DataError::Kind::version, "load_corpus: '" + path + "' is format version " +
                                                  std::to_string(version) + ", expected " +
                                                  std::to_string(kVersion));
  }
  const std::uint32_t n_records = r.u32();
  const std::uint32_t n_aus = r.u32();
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (n_aus < 2 || rows < 1 || cols < 1) {
    throw DataError(DataError::Kind::format, "load_corpus: nonsense dimensions in '" + path + "'");
  }

  Corpus corpus;
  corpus.n_aus = static_cast<int>(n_aus);
  const std::uint32_t has_planted = r.u32();
  if (has_planted) {
    corpus.planted = Mat(n_aus, n_aus);
    r.read(corpus.planted.data(), sizeof(Scalar) * corpus.planted.size());
  } else {
    corpus.planted = Mat::Zero(n_aus, n_aus);
  }

  const std::size_t label_bytes = (static_cast<std::size_t>(n_aus) + 7) / 8;
  corpus.records.reserve(n_records);
  for (std::uint32_t k = 0; k < n_records; ++k) {
    SampleRecord rec;
    rec.id = r.str();
    rec.input = Mat(rows, cols);
    r.read(rec.input.data(), sizeof(Scalar) * rec.input.size());
    std::vector<std::uint8_t> packed(label_bytes);
    r.read(packed.data(), packed.size());
    rec.labels.resize(n_aus);
    for (std::uint32_t i = 0; i < n_aus; ++i) {
      rec.labels[i] = (packed[i / 8] >> (i % 8)) & 1u;
    }
    corpus.records.push_back(std::move(rec));
  }
  if (r.pos() != buf.size() - 8) {
    throw DataError(DataError::Kind::format,
                    "load_corpus: " + std::to_string(buf.size() - 8 - r.pos()) +
                        " unexpected trailing bytes in '" + path + "'");
  }

  try {
    corpus.occurrence = compute_occurrence(corpus.records, corpus.n_aus);
  } catch (const ConfigError&) {
    corpus.occurrence.reset();
  }
  return corpus;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, Scalar train_fraction,
                                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split_corpus: fraction must lie strictly inside (0, 1)");
  }
  if (corpus.records.size() < 2) throw ConfigError("split_corpus: need at least 2 records");

  std::vector<std::size_t> order(corpus.records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<Scalar>(corpus.records.size())));
  if (n_train == 0 || n_train == corpus.records.size()) {
    throw ConfigError("split_corpus: fraction leaves one side empty");
  }

  Corpus train, eval;
  train.n_aus = eval.n_aus = corpus.n_aus;
  train.planted = eval.planted = corpus.planted;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : eval).records.push_back(corpus.records[order[k]]);
  }

  train.occurrence = compute_occurrence(train.records, train.n_aus);  // throws if degenerate
  try {
    eval.occurrence = compute_occurrence(eval.records, eval.n_aus);
  } catch (const ConfigError&) {
    eval.occurrence.reset();
  }
  return {std::move(train), std::move(eval)};
}

}  // namespace augraph
