#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavex/exp/experiment.hpp"
#include "cavex/rl/trainer.hpp"

namespace cavex {

enum class RunMode { Baseline, Proposal };

const char* to_string(RunMode m);
RunMode parse_mode(const std::string& s);

// One summary.csv row: config,mode,converged,epochs,total_actions,
// useless_ratio_pct,wall_time_s. For repeated runs the numeric columns are
// means and converged is true only if every repeat converged.
struct RunSummary {
  std::string config_id;
  RunMode mode = RunMode::Baseline;
  bool converged = false;
  double epochs = 0;
  double total_actions = 0;
  double useless_ratio_pct = 0;
  double wall_time_s = 0;
};

// Per-config derived metrics comparing the two approaches.
struct ComparisonRow {
  std::string config_id;
  double baseline_useless_pct = 0;
  double proposal_useless_pct = 0;
  double delta_pts = 0;  // proposal - baseline
  double baseline_time_s = 0;
  double proposal_time_s = 0;
  double time_ratio = 0;  // proposal / baseline
  bool both_converged = false;
};

struct SweepSummary {
  std::vector<RunSummary> rows;          // two per config: baseline, proposal
  std::vector<ComparisonRow> derived;    // one per config
  std::optional<double> geomean_time_ratio;  // over configs convergent in both modes
};

// Geometric mean (empty input has no mean).
std::optional<double> geometric_mean(std::span<const double> values);

// Runs one training with the penalty toggled by mode; writes per-epoch CSV,
// a one-row summary CSV, extracted plan files, and a checkpoint under
// cfg.output_dir, all prefixed "<config_id>_<mode>_seed<seed>_".
TrainReport run_train(const ExperimentConfig& cfg, const std::string& config_id, RunMode mode,
                      std::uint64_t seed);

// Baseline and proposal, `repeats` runs each with seeds 0..repeats-1, per
// config. Writes runs.csv, summary.csv and report.csv under out_dir. A run
// that throws is recorded as failed and the sweep continues.
SweepSummary run_sweep(std::span<const ExperimentConfig> cfgs,
                       std::span<const std::string> config_ids, std::uint32_t repeats,
                       const std::string& out_dir);

// Recomputes report.csv (deltas, time ratios, geometric mean) from an
// existing summary.csv.
SweepSummary report_from_summary_csv(const std::string& summary_path,
                                     const std::string& report_path);

// CSV helpers shared by the CLI and tests.
void write_epoch_csv(const std::string& path, const TrainReport& report);
std::string epoch_csv_text(const TrainReport& report);
std::string summary_row_text(const RunSummary& row);

}  // namespace cavex
