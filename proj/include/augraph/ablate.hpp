#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "augraph/data.hpp"
#include "augraph/trainer.hpp"

namespace augraph {

/// One row of the component-contribution study. Settings build on each other
/// the way the architecture does: pooled backbone features with a plain
/// sigmoid head, then the per-AU extractors, then the node graph, then the
/// relation branch, with the edge loss as the final ingredient.
enum class AblationSetting {
  backbone,          // backbone + shared sigmoid head
  afg,               // backbone + per-AU extractors + anchor classifier
  afg_fgg,           // the full stage-1 branch
  afg_mefl,          // relation branch on AFG features, no node graph, no edge loss
  afg_mefl_le,       // same with the edge loss
  afg_fgg_mefl,      // two-stage pipeline, edge loss off
  afg_fgg_mefl_le,   // the full system
};

std::string to_string(AblationSetting s);
/// Throws ConfigError on an unknown name.
AblationSetting parse_ablation_setting(const std::string& name);
std::vector<AblationSetting> all_ablation_settings();

struct AblationOptions {
  std::vector<AblationSetting> settings = all_ablation_settings();
  int n_seeds = 3;               // trained at seed, seed+1, ...
  Scalar split_fraction = 0.8;   // train share of each per-seed split
  Scalar threshold = 0.5;
};

struct AblationRow {
  AblationSetting setting;
  std::vector<std::optional<Scalar>> train_f1;  // one entry per seed
  std::vector<std::optional<Scalar>> eval_f1;
  std::optional<Scalar> mean_train_f1;  // over seeds where defined
  std::optional<Scalar> mean_eval_f1;
};

/// Trains and evaluates every requested setting across the seed range.
/// Each seed gets its own shuffled split; held-out macro F1 is the headline
/// number. Deterministic given (corpus, base config, options).
std::vector<AblationRow> run_ablation(const Corpus& corpus, const TrainConfig& base,
                                      const AblationOptions& opts, const LogSink& log = {});

/// Columns: setting,mean_train_f1,mean_eval_f1,seed0_eval,seed1_eval,...
void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace augraph
