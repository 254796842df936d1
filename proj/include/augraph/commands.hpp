#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "augraph/data.hpp"
#include "augraph/tape.hpp"
#include "augraph/trainer.hpp"

namespace augraph {

/// Flat key=value run configuration. Every key is registered with a default;
/// file values override defaults and command-line overrides win over both.
/// Unknown keys are rejected wherever they appear.
class RunSettings {
public:
  RunSettings();

  /// Reads `key=value` lines ('#' comments and blank lines ignored).
  void load_file(const std::string& path);
  /// Sets one key. Throws ConfigError if the key is not registered.
  void set(const std::string& key, const std::string& value);
  /// Parses a single `key=value` override.
  void apply_override(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  Scalar get_scalar(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Every key with its effective value, one per line, in registry order.
  std::string render() const;

  /// Typed views over the gen.* and train.* keys.
  GeneratorSpec generator_spec() const;
  TrainConfig train_config(int n_aus) const;

  /// The registry, for help output: (key, default, description).
  static const std::vector<std::array<std::string, 3>>& registry();

private:
  std::vector<std::pair<std::string, std::string>> values_;
};

// Each command returns a process exit code; 0 is success. They throw the
// library error types, which run_command maps to the exit-code contract.
int cmd_gen_data(const RunSettings& s, const std::string& out_dir);
int cmd_train(const RunSettings& s, const std::string& out_dir);
int cmd_eval(const RunSettings& s, const std::string& out_dir);
int cmd_infer(const RunSettings& s, const std::string& out_dir);
int cmd_gradcheck(const RunSettings& s, const std::string& out_dir);
int cmd_ablate(const RunSettings& s, const std::string& out_dir);

struct GradCheckLine {
  std::string component;
  Scalar max_rel_err = 0;
};

constexpr Scalar kGradCheckTolerance = 1e-4;

/// Finite-difference sweep over each composite forward (+ losses where they
/// apply) at N=3, D=4, C=5. `corrupt` plants a deliberately wrong gradient
/// in one component as a negative control.
std::vector<GradCheckLine> run_gradcheck(bool corrupt);

/// Creates the run directory, writes the effective config into it, then
/// dispatches. Exit codes: 0 success, 1 usage/config error, 2 data error,
/// 3 numeric failure.
int run_command(const std::string& command, const RunSettings& settings,
                const std::string& out_dir);

}  // namespace augraph
