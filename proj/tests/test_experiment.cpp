#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cavex/exp/experiment.hpp"
#include "cavex/exp/presets.hpp"
#include "cavex/exp/runner.hpp"

using namespace cavex;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small-but-real training setup so runner tests stay quick.
ExperimentConfig micro_config(const std::string& preset) {
  ExperimentConfig cfg = config_from_preset(preset);
  cfg.env.epoch_actions = 200;
  cfg.policy.hidden_units = 32;
  cfg.hyper.rollout_len = 128;
  cfg.hyper.minibatch = 32;
  cfg.hyper.max_epochs = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Strips the trailing wall-time column from every CSV row.
std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << (pos == std::string::npos ? line : line.substr(0, pos)) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("presets: table rows") {
  const EnvConfig no1 = preset_env("no1");
  CHECK(no1.hierarchy.levels.size() == 1);
  CHECK(no1.hierarchy.levels[0].n_ways == 1);
  CHECK(no1.hierarchy.levels[0].n_sets == 4);
  CHECK(no1.victim_addrs == AddrRange{0, 3});
  CHECK(no1.attacker_addrs == AddrRange{4, 7});
  CHECK_FALSE(no1.flush_enabled);

  const EnvConfig no13 = preset_env("no13");
  CHECK(no13.hierarchy.levels[0].n_sets == 1);
  CHECK(no13.hierarchy.levels[0].n_ways == 8);
  CHECK(no13.hierarchy.levels[0].prefetcher == PrefetcherKind::NextLine);
  CHECK(no13.attacker_addrs == AddrRange{0, 15});
  CHECK(no13.binary_secret());

  const EnvConfig no16 = preset_env("no16");
  CHECK(no16.hierarchy.levels.size() == 2);
  CHECK(no16.hierarchy.n_cores == 2);
  CHECK(no16.hierarchy.inclusive);
  CHECK(no16.hierarchy.levels[1].n_ways == 2);

  CHECK(preset_names().size() == 17);
  CHECK(is_preset_name("no17"));
  CHECK_FALSE(is_preset_name("no18"));
  CHECK_THROWS_AS(preset_env("no18"), ConfigError);

  // Every preset validates and the episode cap exceeds a workable plan length.
  for (const std::string& name : preset_names()) {
    const EnvConfig cfg = preset_env(name);
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.episode_len_limit() >= cfg.attacker_addrs.size() + 2);
  }
}

TEST_CASE("config files: parse, validate, reject unknowns, round-trip") {
  SUBCASE("preset expansion with overrides") {
    const ExperimentConfig cfg = parse_config_text(R"({
      "preset": "no1",
      "env": {"seed": 9, "snapshot_scope": "lines_only"},
      "rewards": {"r_useless": -0.02},
      "policy": {"hidden_units": 64},
      "hyper": {"max_epochs": 50},
      "repeats": 3,
      "output_dir": "runs"
    })");
    CHECK(cfg.env.attacker_addrs == AddrRange{4, 7});
    CHECK(cfg.env.seed == 9);
    CHECK(cfg.env.snapshot_scope == SnapshotScope::LinesOnly);
    CHECK(cfg.env.rewards.r_useless == doctest::Approx(-0.02));
    CHECK(cfg.policy.hidden_units == 64);
    CHECK(cfg.hyper.max_epochs == 50);
    CHECK(cfg.repeats == 3);
  }
  SUBCASE("invariant violations name the field") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"preset":"no1","rewards":{"r_correct":-1}})"),
                         doctest::Contains("r_correct"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"preset":"no1","hyper":{"minibatch":100}})"),
                         doctest::Contains("minibatch"), ConfigError);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"preset":"no1","envv":{}})"),
                         doctest::Contains("envv"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"preset":"no1","env":{"flush":true}})"),
                         doctest::Contains("flush"), ConfigError);
  }
  SUBCASE("full hierarchy spelled out, no preset") {
    const ExperimentConfig cfg = parse_config_text(R"({
      "env": {
        "hierarchy": {"levels": [{"n_sets": 2, "n_ways": 2, "policy": "rrip"}]},
        "victim_addrs": [0, 1],
        "attacker_addrs": [2, 5],
        "flush_enabled": true
      }
    })");
    CHECK(cfg.env.hierarchy.levels[0].policy == ReplacementPolicy::Rrip);
    CHECK(cfg.env.attacker_addrs.size() == 4);
  }
  SUBCASE("save/load round-trip preserves every field") {
    ExperimentConfig cfg = config_from_preset("no16");
    cfg.env.seed = 31;
    cfg.env.useless_penalty_enabled = true;
    cfg.env.max_episode_len = 40;
    cfg.hyper.entropy_coef = 0.02;
    cfg.policy.shared_trunk = false;
    cfg.repeats = 4;
    const fs::path dir = temp_dir("cavex_cfg_roundtrip");
    const std::string path = (dir / "cfg.json").string();
    save_config(cfg, path);
    const ExperimentConfig back = load_config(path);
    CHECK(back.env == cfg.env);
    CHECK(back.policy == cfg.policy);
    CHECK(back.hyper == cfg.hyper);
    CHECK(back.repeats == cfg.repeats);
    fs::remove_all(dir);
  }
}

TEST_CASE("run_train: mode toggles exactly one flag") {
  ExperimentConfig cfg = config_from_preset("no1");
  EnvConfig base = cfg.env;
  base.useless_penalty_enabled = false;
  EnvConfig prop = cfg.env;
  prop.useless_penalty_enabled = true;
  // The two mode configs differ in the penalty flag alone.
  prop.useless_penalty_enabled = base.useless_penalty_enabled;
  CHECK(prop == base);
}

TEST_CASE("run_train: artifacts, determinism, summary consistency") {
  const fs::path dir = temp_dir("cavex_run_train");
  ExperimentConfig cfg = micro_config("no1");
  cfg.output_dir = dir.string();

  const TrainReport r1 = run_train(cfg, "no1", RunMode::Proposal, 0);
  CHECK(r1.epochs_run == 2);
  CHECK(r1.total_actions == 400);

  const fs::path epochs_csv = dir / "no1_proposal_seed0_epochs.csv";
  const fs::path summary_csv = dir / "no1_proposal_seed0_summary.csv";
  const fs::path ckpt = dir / "no1_proposal_seed0_checkpoint.txt";
  REQUIRE(fs::exists(epochs_csv));
  REQUIRE(fs::exists(summary_csv));
  REQUIRE(fs::exists(ckpt));

  SUBCASE("per-epoch CSV recomputes to the summary ratio") {
    std::ifstream in(epochs_csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,episodes,correct_rate,useless_actions,total_actions,wall_time_s");
    std::uint64_t useless = 0, total = 0;
    int rows = 0;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string f;
      std::getline(ls, f, ',');  // epoch
      std::getline(ls, f, ',');  // episodes
      std::getline(ls, f, ',');  // correct_rate
      const double rate = std::strtod(f.c_str(), nullptr);
      CHECK(rate >= 0.0);
      CHECK(rate <= 1.0);
      std::getline(ls, f, ',');
      useless += std::strtoull(f.c_str(), nullptr, 10);
      std::getline(ls, f, ',');
      total += std::strtoull(f.c_str(), nullptr, 10);
      ++rows;
    }
    CHECK(rows == 2);
    CHECK(total == r1.total_actions);
    CHECK(useless == r1.total_useless);
    const std::string summary = slurp(summary_csv);
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%.2f",
                  100.0 * static_cast<double>(useless) / static_cast<double>(total));
    CHECK(summary.find(expected) != std::string::npos);
  }

  SUBCASE("re-running the same seed reproduces the metric columns") {
    const std::string first = drop_last_column(slurp(epochs_csv));
    run_train(cfg, "no1", RunMode::Proposal, 0);
    const std::string second = drop_last_column(slurp(epochs_csv));
    REQUIRE(first == second);
  }
  fs::remove_all(dir);
}

TEST_CASE("run_sweep: run counting, summary rows, derived report") {
  const fs::path dir = temp_dir("cavex_sweep");
  const ExperimentConfig cfg = micro_config("no1");
  const std::vector<ExperimentConfig> cfgs = {cfg};
  const std::vector<std::string> ids = {"no1"};
  const SweepSummary s = run_sweep(cfgs, ids, 3, dir.string());

  REQUIRE(s.rows.size() == 2);  // baseline + proposal
  CHECK(s.rows[0].mode == RunMode::Baseline);
  CHECK(s.rows[1].mode == RunMode::Proposal);
  REQUIRE(s.derived.size() == 1);

  // 2 modes x 3 seeds = 6 run rows.
  std::ifstream runs(dir / "runs.csv");
  std::string line;
  std::getline(runs, line);
  int rows = 0;
  while (std::getline(runs, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);

  REQUIRE(fs::exists(dir / "summary.csv"));
  REQUIRE(fs::exists(dir / "report.csv"));

  // report verb reproduces report.csv from summary.csv alone.
  const std::string before = slurp(dir / "report.csv");
  const SweepSummary again = report_from_summary_csv((dir / "summary.csv").string(),
                                                     (dir / "report.csv").string());
  CHECK(slurp(dir / "report.csv") == before);
  REQUIRE(again.derived.size() == 1);
  CHECK(again.derived[0].delta_pts ==
        doctest::Approx(s.derived[0].delta_pts).epsilon(0.02));
  fs::remove_all(dir);
}

TEST_CASE("geometric mean identity") {
  const std::vector<double> two = {0.5, 2.0};
  REQUIRE(geometric_mean(two).has_value());
  CHECK(*geometric_mean(two) == doctest::Approx(1.0));
  CHECK_FALSE(geometric_mean({}).has_value());
  const std::vector<double> one = {0.9516};
  CHECK(*geometric_mean(one) == doctest::Approx(0.9516));
}

TEST_CASE("summary row formatting: percent to two decimals") {
  RunSummary row;
  row.config_id = "no1";
  row.mode = RunMode::Baseline;
  row.converged = true;
  row.epochs = 12;
  row.total_actions = 36000;
  row.useless_ratio_pct = 32.78901;
  row.wall_time_s = 1.23456;
  CHECK(summary_row_text(row) == "no1,baseline,1,12.0,36000.0,32.79,1.235");
}
