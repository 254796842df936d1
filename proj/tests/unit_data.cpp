#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "augraph/data.hpp"
#include "augraph/errors.hpp"

using namespace augraph;

namespace {

GeneratorSpec small_spec() {
  GeneratorSpec spec;
  spec.n_aus = 4;
  spec.base_rates = {0.5, 0.4, 0.3, 0.6};
  spec.positions = 3;
  spec.block_size = 2;
  spec.distractors = 1;
  return spec;
}

// Independent FNV-1a used to re-seal tampered files in corruption tests.
std::uint64_t fnv1a_oracle(const std::uint8_t* data, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::string tmp_path(const char* name) { return std::string("/tmp/augraph_test_") + name; }

SampleRecord record_with(std::string id, std::vector<int> labels) {
  SampleRecord r;
  r.id = std::move(id);
  r.labels = std::move(labels);
  r.input = Mat::Zero(2, 3);
  return r;
}

}  // namespace

TEST_CASE("uncoupled labels match independence within a 3-sigma binomial bound") {
  GeneratorSpec spec = small_spec();
  const int n = 10000;
  Corpus corpus = generate_synthetic(spec, n, 42);
  REQUIRE(corpus.size() == static_cast<std::size_t>(n));

  // Marginals first.
  for (int i = 0; i < spec.n_aus; ++i) {
    double freq = 0;
    for (const auto& rec : corpus.records) freq += rec.labels[static_cast<std::size_t>(i)];
    freq /= n;
    const double r = spec.base_rates[static_cast<std::size_t>(i)];
    const double sigma = std::sqrt(r * (1.0 - r) / n);
    CHECK(std::abs(freq - r) <= 3.0 * sigma);
  }

  // Pairwise (1,1) frequencies should factorize.
  for (int i = 0; i < spec.n_aus; ++i) {
    for (int j = i + 1; j < spec.n_aus; ++j) {
      double both = 0;
      for (const auto& rec : corpus.records) {
        both += rec.labels[static_cast<std::size_t>(i)] & rec.labels[static_cast<std::size_t>(j)];
      }
      both /= n;
      const double p = spec.base_rates[static_cast<std::size_t>(i)] *
                       spec.base_rates[static_cast<std::size_t>(j)];
      const double sigma = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(both - p) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("strong positive coupling lifts joint activation above independence") {
  GeneratorSpec spec = small_spec();
  spec.couplings = {{0, 1, 2.5}};
  const int n = 10000;
  Corpus corpus = generate_synthetic(spec, n, 43);
  double both = 0;
  for (const auto& rec : corpus.records) both += rec.labels[0] & rec.labels[1];
  const double independent = spec.base_rates[0] * spec.base_rates[1] * n;
  CHECK(both > independent * 1.2);
}

TEST_CASE("same seed reproduces the corpus bit for bit") {
  GeneratorSpec spec = small_spec();
  spec.couplings = {{1, 2, 1.0}};
  Corpus a = generate_synthetic(spec, 50, 7);
  Corpus b = generate_synthetic(spec, 50, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.records[k].id == b.records[k].id);
    CHECK(a.records[k].labels == b.records[k].labels);
    CHECK(std::memcmp(a.records[k].input.data(), b.records[k].input.data(),
                      sizeof(Scalar) * a.records[k].input.size()) == 0);
  }
  Corpus c = generate_synthetic(spec, 50, 8);
  bool any_diff = false;
  for (std::size_t k = 0; k < a.size() && !any_diff; ++k) {
    any_diff = a.records[k].labels != c.records[k].labels ||
               (a.records[k].input - c.records[k].input).cwiseAbs().maxCoeff() > 0.0;
  }
  CHECK(any_diff);
}

TEST_CASE("feature blocks carry the planted signal") {
  GeneratorSpec spec = small_spec();
  spec.noise = 0.1;
  spec.jitter = 0.05;
  Corpus corpus = generate_synthetic(spec, 2000, 11);
  // Column means of AU 0's block, conditioned on its label.
  double on_mean = 0, off_mean = 0;
  int on = 0, off = 0;
  for (const auto& rec : corpus.records) {
    const double col0 = rec.input.col(0).mean();
    if (rec.labels[0]) {
      on_mean += col0;
      ++on;
    } else {
      off_mean += col0;
      ++off;
    }
  }
  REQUIRE(on > 0);
  REQUIRE(off > 0);
  CHECK(on_mean / on == doctest::Approx(spec.signal).epsilon(0.05));
  CHECK(off_mean / off == doctest::Approx(0.0).epsilon(0.05));
}

TEST_CASE("generator rejects invalid recipes") {
  GeneratorSpec spec = small_spec();
  spec.base_rates[2] = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 10, 1), ConfigError);
  spec = small_spec();
  spec.base_rates[0] = 1.0;
  CHECK_THROWS_AS(generate_synthetic(spec, 10, 1), ConfigError);
  spec = small_spec();
  spec.couplings = {{0, 0, 1.0}};
  CHECK_THROWS_AS(generate_synthetic(spec, 10, 1), ConfigError);
  spec = small_spec();
  spec.couplings = {{0, 9, 1.0}};
  CHECK_THROWS_AS(generate_synthetic(spec, 10, 1), ConfigError);
  spec = small_spec();
  CHECK_THROWS_AS(generate_synthetic(spec, 0, 1), ConfigError);
}

TEST_CASE("occurrence rates count activations and delegate to the weight formula") {
  std::vector<SampleRecord> records = {
      record_with("a", {1, 1}),
      record_with("b", {1, 0}),
      record_with("c", {0, 1}),
      record_with("d", {0, 1}),
  };
  OccurrenceStats stats = compute_occurrence(records, 2);
  CHECK(stats.rates(0, 0) == doctest::Approx(0.5));
  CHECK(stats.rates(0, 1) == doctest::Approx(0.75));
  Mat expect = compute_weights(stats.rates);
  CHECK((stats.weights - expect).cwiseAbs().maxCoeff() == 0.0);

  std::vector<SampleRecord> all_on = {record_with("a", {1, 1}), record_with("b", {1, 1})};
  OccurrenceStats ones = compute_occurrence(all_on, 2);
  CHECK(ones.rates(0, 0) == 1.0);
  CHECK(ones.weights(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero-occurrence labels are named in the error") {
  std::vector<SampleRecord> records = {record_with("a", {1, 0, 0}), record_with("b", {1, 0, 0})};
  try {
    compute_occurrence(records, 3);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("1, 2") != std::string::npos);
  }
}

TEST_CASE("corpus round-trips bit-exactly through the container") {
  GeneratorSpec spec = small_spec();
  spec.couplings = {{0, 3, 1.5}};
  Corpus corpus = generate_synthetic(spec, 20, 99);
  const std::string path = tmp_path("roundtrip.bin");
  save_corpus(corpus, path);
  Corpus loaded = load_corpus(path);

  CHECK(loaded.n_aus == corpus.n_aus);
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    CHECK(loaded.records[k].id == corpus.records[k].id);
    CHECK(loaded.records[k].labels == corpus.records[k].labels);
    CHECK(std::memcmp(loaded.records[k].input.data(), corpus.records[k].input.data(),
                      sizeof(Scalar) * corpus.records[k].input.size()) == 0);
  }
  CHECK(std::memcmp(loaded.planted.data(), corpus.planted.data(),
                    sizeof(Scalar) * corpus.planted.size()) == 0);
  REQUIRE(loaded.occurrence.has_value());
  CHECK((loaded.occurrence->rates - corpus.occurrence->rates).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("missing, malformed, truncated and corrupted files raise distinct kinds") {
  const std::string path = tmp_path("corrupt.bin");
  Corpus corpus = generate_synthetic(small_spec(), 5, 3);
  save_corpus(corpus, path);
  std::vector<std::uint8_t> good = slurp(path);

  SUBCASE("missing file") {
    try {
      load_corpus(tmp_path("no_such_file.bin"));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind == DataError::Kind::missing);
    }
  }

  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    spit(path, bytes);
    try {
      load_corpus(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind == DataError::Kind::format);
    }
  }

  SUBCASE("wrong version, checksum re-sealed") {
    auto bytes = good;
    bytes[8] = 99;  // version field follows the 8-byte magic
    const std::uint64_t h = fnv1a_oracle(bytes.data(), bytes.size() - 8);
    std::memcpy(bytes.data() + bytes.size() - 8, &h, 8);
    spit(path, bytes);
    try {
      load_corpus(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind == DataError::Kind::version);
    }
  }

  SUBCASE("truncation, checksum re-sealed") {
    auto bytes = good;
    bytes.resize(bytes.size() - 40);
    const std::uint64_t h = fnv1a_oracle(bytes.data(), bytes.size() - 8);
    std::memcpy(bytes.data() + bytes.size() - 8, &h, 8);
    spit(path, bytes);
    try {
      load_corpus(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind == DataError::Kind::truncated);
    }
  }

  SUBCASE("flipped payload byte") {
    auto bytes = good;
    bytes[bytes.size() / 2] ^= 0x40;
    spit(path, bytes);
    try {
      load_corpus(path);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.kind == DataError::Kind::checksum);
    }
  }

  std::remove(path.c_str());
}

TEST_CASE("splitting is deterministic, disjoint and exhaustive") {
  Corpus corpus = generate_synthetic(small_spec(), 100, 5);
  auto [train1, eval1] = split_corpus(corpus, 0.5, 17);
  auto [train2, eval2] = split_corpus(corpus, 0.5, 17);

  CHECK(train1.size() == 50);
  CHECK(eval1.size() == 50);
  for (std::size_t k = 0; k < train1.size(); ++k) {
    CHECK(train1.records[k].id == train2.records[k].id);
  }

  std::set<std::string> ids;
  for (const auto& r : train1.records) ids.insert(r.id);
  for (const auto& r : eval1.records) ids.insert(r.id);
  CHECK(ids.size() == 100);

  auto [train3, eval3] = split_corpus(corpus, 0.5, 18);
  bool differs = false;
  for (std::size_t k = 0; k < train1.size() && !differs; ++k) {
    differs = train1.records[k].id != train3.records[k].id;
  }
  CHECK(differs);
}

TEST_CASE("split recomputes per-side occurrence and rejects degenerate training sides") {
  Corpus corpus = generate_synthetic(small_spec(), 60, 21);
  auto [train, eval] = split_corpus(corpus, 0.7, 3);
  REQUIRE(train.occurrence.has_value());
  Mat recomputed = compute_occurrence(train.records, train.n_aus).rates;
  CHECK((train.occurrence->rates - recomputed).cwiseAbs().maxCoeff() < 1e-12);

  // An AU that never occurs anywhere guarantees a degenerate training side.
  Corpus dead;
  dead.n_aus = 2;
  for (int k = 0; k < 10; ++k) {
    dead.records.push_back(record_with("r" + std::to_string(k), {k % 2, 0}));
  }
  CHECK_THROWS_AS(split_corpus(dead, 0.5, 1), ConfigError);
  CHECK_THROWS_AS(split_corpus(corpus, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split_corpus(corpus, 1.0, 1), ConfigError);
}

TEST_CASE("missing occurrence stats explain themselves") {
  Corpus dead;
  dead.n_aus = 3;
  dead.records.push_back(record_with("a", {1, 0, 0}));
  try {
    dead.require_occurrence();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("1, 2") != std::string::npos);
  }
}

TEST_CASE("co-occurrence counts sum to the corpus size per pair") {
  Corpus corpus = generate_synthetic(small_spec(), 200, 31);
  CooccurrenceMatrix m = CooccurrenceMatrix::from_records(corpus.records, corpus.n_aus);
  for (int i = 0; i < corpus.n_aus; ++i) {
    for (int j = 0; j < corpus.n_aus; ++j) {
      if (i == j) continue;
      std::int64_t sum = 0;
      for (int c = 0; c < 4; ++c) sum += m.count(i, j, c);
      CHECK(sum == 200);
    }
  }
}

TEST_CASE("co-occurrence obeys the directed swap identity") {
  Corpus corpus = generate_synthetic(small_spec(), 300, 33);
  CooccurrenceMatrix m = CooccurrenceMatrix::from_records(corpus.records, corpus.n_aus);
  for (int i = 0; i < corpus.n_aus; ++i) {
    for (int j = 0; j < corpus.n_aus; ++j) {
      if (i == j) continue;
      CHECK(m.count(i, j, 0) == m.count(j, i, 0));
      CHECK(m.count(i, j, 1) == m.count(j, i, 2));
      CHECK(m.count(i, j, 2) == m.count(j, i, 1));
      CHECK(m.count(i, j, 3) == m.count(j, i, 3));
    }
  }
}

TEST_CASE("co-occurrence hand count on a fixed record set") {
  std::vector<SampleRecord> records = {
      record_with("a", {1, 1}),
      record_with("b", {1, 0}),
      record_with("c", {0, 0}),
  };
  CooccurrenceMatrix m = CooccurrenceMatrix::from_records(records, 2);
  CHECK(m.count(0, 1, 3) == 1);  // (1,1) once
  CHECK(m.count(0, 1, 2) == 1);  // (1,0) once
  CHECK(m.count(0, 1, 0) == 1);  // (0,0) once
  CHECK(m.count(0, 1, 1) == 0);
  CHECK(m.count(1, 0, 1) == 1);  // the swap of (1,0)
}
