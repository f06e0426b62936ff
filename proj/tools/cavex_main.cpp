// cavex - explore cache-timing attacks on simulated caches with an RL agent,
// validate findings with a brute-force oracle, and compare the useless-action
// penalty against plain training.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavex/exp/presets.hpp"
#include "cavex/exp/runner.hpp"
#include "cavex/oracle/oracle.hpp"

namespace fs = std::filesystem;
using namespace cavex;

namespace {

ExperimentConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    throw ConfigError("give either --config or --preset, not both");
  if (!config_path.empty()) return load_config(config_path);
  if (!preset.empty()) return config_from_preset(preset);
  throw ConfigError("one of --config or --preset is required");
}

std::string config_label(const std::string& config_path, const std::string& preset) {
  if (!preset.empty()) return preset;
  return fs::path(config_path).stem().string();
}

int run_train_cmd(const std::string& config_path, const std::string& preset,
                  const std::string& mode, std::uint64_t seed, const std::string& out) {
  ExperimentConfig cfg = resolve_config(config_path, preset);
  if (!out.empty()) cfg.output_dir = out;
  const std::string id = config_label(config_path, preset);
  TrainReport r = run_train(cfg, id, parse_mode(mode), seed);
  std::printf("%s %s seed=%llu: %s after %u epochs, %llu actions, useless %.2f%%, %.1fs\n",
              id.c_str(), mode.c_str(), static_cast<unsigned long long>(seed),
              r.converged ? "converged" : "non-convergent", r.epochs_run,
              static_cast<unsigned long long>(r.total_actions), 100.0 * r.useless_ratio,
              r.wall_time_s);
  if (r.converged) {
    const double acc = replay_extracted(r.extracted_plans, cfg.env);
    std::printf("extracted plans replay at %.3f accuracy\n", acc);
  }
  std::printf("artifacts written under %s/\n", cfg.output_dir.c_str());
  return 0;
}

int run_sweep_cmd(const std::vector<std::string>& presets, const std::string& config_path,
                  std::uint32_t repeats, const std::string& out) {
  std::vector<ExperimentConfig> cfgs;
  std::vector<std::string> ids;
  if (!config_path.empty()) {
    cfgs.push_back(load_config(config_path));
    ids.push_back(config_label(config_path, ""));
  }
  for (const std::string& p : presets) {
    cfgs.push_back(config_from_preset(p));
    ids.push_back(p);
  }
  if (cfgs.empty()) throw ConfigError("sweep: need --preset (repeatable) or --config");
  if (repeats == 0) repeats = cfgs.front().repeats;
  SweepSummary s = run_sweep(cfgs, ids, repeats, out);
  for (const ComparisonRow& c : s.derived)
    std::printf("%s: useless %5.2f%% -> %5.2f%% (delta %+5.2f pts), time ratio %.4f%s\n",
                c.config_id.c_str(), c.baseline_useless_pct, c.proposal_useless_pct, c.delta_pts,
                c.time_ratio, c.both_converged ? "" : " [not convergent in both modes]");
  if (s.geomean_time_ratio)
    std::printf("geomean time ratio over convergent configs: %.4f\n", *s.geomean_time_ratio);
  std::printf("runs.csv, summary.csv, report.csv written under %s/\n", out.c_str());
  return 0;
}

int run_oracle_cmd(const std::string& config_path, const std::string& preset,
                   std::uint32_t max_len, const std::string& out) {
  ExperimentConfig cfg = resolve_config(config_path, preset);
  const std::string id = config_label(config_path, preset);
  std::optional<AttackPlan> plan;
  try {
    plan = search(cfg.env, max_len);
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  if (!plan) {
    std::printf("no plan found for %s at length <= %u\n", id.c_str(), max_len);
    return 1;
  }
  const double acc = replay(*plan, cfg.env);
  fs::create_directories(out);
  const std::string path = (fs::path(out) / (id + "_plan.txt")).string();
  save_plan(path, *plan);
  std::printf("plan of length %zu found for %s, replay accuracy %.3f, saved to %s\n",
              plan->prefix.size(), id.c_str(), acc, path.c_str());
  return 0;
}

int run_replay_cmd(const std::string& config_path, const std::string& preset,
                   const std::string& plan_path) {
  ExperimentConfig cfg = resolve_config(config_path, preset);
  const AttackPlan plan = load_plan(plan_path);
  const double acc = replay(plan, cfg.env);
  std::printf("replay accuracy over %llu secrets: %.3f\n",
              static_cast<unsigned long long>(cfg.env.secret_count()), acc);
  return 0;
}

int run_report_cmd(const std::string& out) {
  const std::string summary = (fs::path(out) / "summary.csv").string();
  const std::string report = (fs::path(out) / "report.csv").string();
  SweepSummary s = report_from_summary_csv(summary, report);
  if (s.geomean_time_ratio)
    std::printf("geomean time ratio over convergent configs: %.4f\n", *s.geomean_time_ratio);
  std::printf("wrote %s\n", report.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cache-timing attack exploration toolkit"};
  app.require_subcommand(1);

  std::string config_path, preset, mode = "baseline", out = "out", plan_path;
  std::vector<std::string> presets;
  std::uint64_t seed = 0;
  std::uint32_t repeats = 0, max_len = 10;

  CLI::App* train = app.add_subcommand("train", "train one agent on one configuration");
  train->add_option("--config", config_path, "experiment config file (JSON)");
  train->add_option("--preset", preset, "built-in configuration no1..no17");
  train->add_option("--mode", mode, "baseline|proposal (useless-action penalty off/on)");
  train->add_option("--seed", seed, "run seed");
  train->add_option("--out", out, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "baseline-vs-proposal over configs and seeds");
  sweep->add_option("--preset", presets, "built-in configuration (repeatable)");
  sweep->add_option("--config", config_path, "experiment config file (JSON)");
  sweep->add_option("--repeats", repeats, "runs per mode (seeds 0..repeats-1)");
  sweep->add_option("--out", out, "output directory");

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustively search for a fixed attack plan");
  oracle->add_option("--config", config_path, "experiment config file (JSON)");
  oracle->add_option("--preset", preset, "built-in configuration no1..no17");
  oracle->add_option("--max-len", max_len, "maximum plan length");
  oracle->add_option("--out", out, "output directory");

  CLI::App* replay_cmd = app.add_subcommand("replay", "replay a saved plan over every secret");
  replay_cmd->add_option("--config", config_path, "experiment config file (JSON)");
  replay_cmd->add_option("--preset", preset, "built-in configuration no1..no17");
  replay_cmd->add_option("--plan", plan_path, "plan file")->required();

  CLI::App* report = app.add_subcommand("report", "recompute report.csv from summary.csv");
  report->add_option("--out", out, "directory holding summary.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train_cmd(config_path, preset, mode, seed, out);
    if (sweep->parsed()) return run_sweep_cmd(presets, config_path, repeats, out);
    if (oracle->parsed()) return run_oracle_cmd(config_path, preset, max_len, out);
    if (replay_cmd->parsed()) return run_replay_cmd(config_path, preset, plan_path);
    if (report->parsed()) return run_report_cmd(out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
