#include "cavex/exp/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cavex/oracle/plan.hpp"

namespace cavex {

namespace fs = std::filesystem;

const char* to_string(RunMode m) { return m == RunMode::Baseline ? "baseline" : "proposal"; }

RunMode parse_mode(const std::string& s) {
  if (s == "baseline") return RunMode::Baseline;
  if (s == "proposal") return RunMode::Proposal;
  throw ConfigError("unknown mode: " + s + " (expected baseline or proposal)");
}

std::optional<double> geometric_mean(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  double log_sum = 0;
  for (double v : values) log_sum += std::log(v);
  return std::exp(log_sum / static_cast<double>(values.size()));
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

std::string epoch_csv_text(const TrainReport& report) {
  std::ostringstream out;
  out << "epoch,episodes,correct_rate,useless_actions,total_actions,wall_time_s\n";
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const EpochStats& e = report.epochs[i];
    out << (i + 1) << ',' << e.episodes_completed << ',' << fmt("%.6f", e.correct_rate()) << ','
        << e.useless_actions << ',' << e.total_actions << ',' << fmt("%.3f", e.wall_time_s)
        << '\n';
  }
  return out.str();
}

void write_epoch_csv(const std::string& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_epoch_csv: cannot open " + path);
  out << epoch_csv_text(report);
}

std::string summary_row_text(const RunSummary& row) {
  std::ostringstream out;
  out << row.config_id << ',' << to_string(row.mode) << ',' << (row.converged ? 1 : 0) << ','
      << fmt("%.1f", row.epochs) << ',' << fmt("%.1f", row.total_actions) << ','
      << fmt("%.2f", row.useless_ratio_pct) << ',' << fmt("%.3f", row.wall_time_s);
  return out.str();
}

namespace {

constexpr const char* kSummaryHeader =
    "config,mode,converged,epochs,total_actions,useless_ratio_pct,wall_time_s\n";

RunSummary summarize_runs(const std::string& config_id, RunMode mode,
                          std::span<const TrainReport> reports) {
  RunSummary s;
  s.config_id = config_id;
  s.mode = mode;
  s.converged = !reports.empty();
  for (const TrainReport& r : reports) {
    s.converged = s.converged && r.converged;
    s.epochs += static_cast<double>(r.epochs_run);
    s.total_actions += static_cast<double>(r.total_actions);
    s.useless_ratio_pct += 100.0 * r.useless_ratio;
    s.wall_time_s += r.wall_time_s;
  }
  if (!reports.empty()) {
    const double n = static_cast<double>(reports.size());
    s.epochs /= n;
    s.total_actions /= n;
    s.useless_ratio_pct /= n;
    s.wall_time_s /= n;
  }
  return s;
}

SweepSummary derive(std::vector<RunSummary> rows) {
  SweepSummary sweep;
  sweep.rows = std::move(rows);
  std::map<std::string, std::pair<const RunSummary*, const RunSummary*>> by_config;
  for (const RunSummary& r : sweep.rows) {
    auto& slot = by_config[r.config_id];
    (r.mode == RunMode::Baseline ? slot.first : slot.second) = &r;
  }
  std::vector<double> ratios;
  for (const auto& [id, pair] : by_config) {
    if (!pair.first || !pair.second) continue;
    ComparisonRow c;
    c.config_id = id;
    c.baseline_useless_pct = pair.first->useless_ratio_pct;
    c.proposal_useless_pct = pair.second->useless_ratio_pct;
    c.delta_pts = c.proposal_useless_pct - c.baseline_useless_pct;
    c.baseline_time_s = pair.first->wall_time_s;
    c.proposal_time_s = pair.second->wall_time_s;
    c.time_ratio = c.baseline_time_s > 0 ? c.proposal_time_s / c.baseline_time_s : 0;
    c.both_converged = pair.first->converged && pair.second->converged;
    if (c.both_converged && c.time_ratio > 0) ratios.push_back(c.time_ratio);
    sweep.derived.push_back(c);
  }
  sweep.geomean_time_ratio = geometric_mean(ratios);
  return sweep;
}

void write_summary_csv(const std::string& path, std::span<const RunSummary> rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_summary_csv: cannot open " + path);
  out << kSummaryHeader;
  for (const RunSummary& r : rows) out << summary_row_text(r) << '\n';
}

void write_report_csv(const std::string& path, const SweepSummary& sweep) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_report_csv: cannot open " + path);
  out << "config,baseline_useless_pct,proposal_useless_pct,delta_pts,baseline_time_s,"
         "proposal_time_s,time_ratio\n";
  for (const ComparisonRow& c : sweep.derived) {
    out << c.config_id << ',' << fmt("%.2f", c.baseline_useless_pct) << ','
        << fmt("%.2f", c.proposal_useless_pct) << ',' << fmt("%.2f", c.delta_pts) << ','
        << fmt("%.3f", c.baseline_time_s) << ',' << fmt("%.3f", c.proposal_time_s) << ','
        << fmt("%.4f", c.time_ratio) << '\n';
  }
  if (sweep.geomean_time_ratio)
    out << "_geomean,,,,,," << fmt("%.4f", *sweep.geomean_time_ratio) << '\n';
}

std::string run_prefix(const ExperimentConfig& cfg, const std::string& config_id, RunMode mode,
                       std::uint64_t seed) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) /
          (config_id + "_" + to_string(mode) + "_seed" + std::to_string(seed) + "_"))
      .string();
}

AttackPlan to_attack_plan(const ExtractedPlan& p) {
  AttackPlan plan;
  plan.prefix = p.actions;
  std::string trace = p.trace;
  if (p.guess) {
    plan.prefix.pop_back();  // drop the guess action
    trace.pop_back();
    plan.decode[trace] = *p.guess;
  }
  return plan;
}

}  // namespace

TrainReport run_train(const ExperimentConfig& cfg, const std::string& config_id, RunMode mode,
                      std::uint64_t seed) {
  cfg.validate();
  EnvConfig env_cfg = cfg.env;
  env_cfg.useless_penalty_enabled = mode == RunMode::Proposal;  // the only toggle

  PolicyNet net({1, 1, cfg.policy.hidden_units, cfg.policy.shared_trunk});
  PolicySpec spec;
  spec.hidden_units = cfg.policy.hidden_units;
  spec.shared_trunk = cfg.policy.shared_trunk;
  TrainReport report = train(env_cfg, spec, cfg.hyper, seed, &net);

  const std::string prefix = run_prefix(cfg, config_id, mode, seed);
  write_epoch_csv(prefix + "epochs.csv", report);
  RunSummary row = summarize_runs(config_id, mode, {&report, 1});
  std::ofstream summary(prefix + "summary.csv");
  if (!summary) throw ConfigError("run_train: cannot open " + prefix + "summary.csv");
  summary << kSummaryHeader << summary_row_text(row) << '\n';
  save_checkpoint(prefix + "checkpoint.txt", net, cfg.hyper, seed);
  for (const ExtractedPlan& p : report.extracted_plans)
    save_plan(prefix + "plan_secret" + std::to_string(p.secret) + ".txt", to_attack_plan(p));
  return report;
}

SweepSummary run_sweep(std::span<const ExperimentConfig> cfgs,
                       std::span<const std::string> config_ids, std::uint32_t repeats,
                       const std::string& out_dir) {
  if (cfgs.empty() || cfgs.size() != config_ids.size())
    throw ConfigError("run_sweep: need one config id per config");
  fs::create_directories(out_dir);
  std::ofstream runs(fs::path(out_dir) / "runs.csv");
  runs << "config,mode,seed,converged,epochs,total_actions,useless_ratio_pct,wall_time_s,error\n";

  std::vector<RunSummary> rows;
  for (std::size_t ci = 0; ci < cfgs.size(); ++ci) {
    ExperimentConfig cfg = cfgs[ci];
    cfg.output_dir = out_dir;
    for (RunMode mode : {RunMode::Baseline, RunMode::Proposal}) {
      std::vector<TrainReport> reports;
      for (std::uint32_t seed = 0; seed < repeats; ++seed) {
        try {
          TrainReport r = run_train(cfg, config_ids[ci], mode, seed);
          runs << config_ids[ci] << ',' << to_string(mode) << ',' << seed << ','
               << (r.converged ? 1 : 0) << ',' << r.epochs_run << ',' << r.total_actions << ','
               << fmt("%.2f", 100.0 * r.useless_ratio) << ',' << fmt("%.3f", r.wall_time_s)
               << ",\n";
          reports.push_back(std::move(r));
        } catch (const std::exception& e) {
          runs << config_ids[ci] << ',' << to_string(mode) << ',' << seed << ",,,,,," << e.what()
               << '\n';
        }
      }
      rows.push_back(summarize_runs(config_ids[ci], mode, reports));
    }
  }
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(), rows);
  // Derive the report from the written summary so the `report` verb
  // reproduces it byte for byte.
  return report_from_summary_csv((fs::path(out_dir) / "summary.csv").string(),
                                 (fs::path(out_dir) / "report.csv").string());
}

SweepSummary report_from_summary_csv(const std::string& summary_path,
                                     const std::string& report_path) {
  std::ifstream in(summary_path);
  if (!in) throw ConfigError("report: cannot open " + summary_path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<RunSummary> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    RunSummary r;
    std::getline(ls, r.config_id, ',');
    std::getline(ls, field, ',');
    r.mode = parse_mode(field);
    std::getline(ls, field, ',');
    r.converged = field == "1";
    std::getline(ls, field, ',');
    r.epochs = std::strtod(field.c_str(), nullptr);
    std::getline(ls, field, ',');
    r.total_actions = std::strtod(field.c_str(), nullptr);
    std::getline(ls, field, ',');
    r.useless_ratio_pct = std::strtod(field.c_str(), nullptr);
    std::getline(ls, field, ',');
    r.wall_time_s = std::strtod(field.c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  SweepSummary sweep = derive(std::move(rows));
  write_report_csv(report_path, sweep);
  return sweep;
}

}  // namespace cavex
