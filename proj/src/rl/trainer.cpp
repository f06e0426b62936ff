#include "cavex/rl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cavex/rl/adam.hpp"
#include "cavex/rl/ppo.hpp"
#include "cavex/rl/rollout.hpp"
#include "cavex/util/rng.hpp"

namespace cavex {

namespace {

std::vector<ExtractedPlan> extract_plans(const EnvConfig& env_cfg, const PolicyNet& net) {
  std::vector<ExtractedPlan> plans;
  AttackEnv env(env_cfg);
  for (std::uint64_t secret : secret_domain(env_cfg)) {
    ExtractedPlan plan;
    plan.secret = secret;
    Observation obs = env.reset_episode(secret);
    while (env.episode_active()) {
      const PolicyNet::Forward f = net.forward(obs);
      const std::size_t a = static_cast<std::size_t>(
          std::max_element(f.logits.begin(), f.logits.end()) - f.logits.begin());
      const Action& action = env.legal_actions()[a];
      const StepResult sr = env.step(action);
      plan.actions.push_back(action);
      plan.trace.push_back(latency_trace_char(sr.info.latency));
      if (action.kind == ActionKind::Guess) {
        plan.guess = action.operand;
        plan.correct = sr.info.guess_correct.value_or(false);
      }
      obs = sr.observation;
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace

double replay_extracted(const std::vector<ExtractedPlan>& plans, const EnvConfig& env_cfg) {
  if (plans.empty()) return 0.0;
  std::size_t correct = 0;
  AttackEnv env(env_cfg);
  for (const ExtractedPlan& plan : plans) {
    env.reset_episode(plan.secret);
    bool ok = false;
    for (const Action& a : plan.actions) {
      if (!env.episode_active()) break;
      const StepResult sr = env.step(a);
      if (a.kind == ActionKind::Guess) ok = sr.info.guess_correct.value_or(false);
    }
    if (ok) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(plans.size());
}

TrainReport train(const EnvConfig& env_cfg, PolicySpec spec, const TrainHyper& hyper,
                  std::uint64_t seed, PolicyNet* out_net) {
  hyper.validate();
  EnvConfig cfg = env_cfg;
  cfg.seed = seed;
  AttackEnv env(cfg);
  if (spec.obs_dim == 0) spec.obs_dim = static_cast<std::uint32_t>(env.obs_dim());
  if (spec.n_actions == 0) spec.n_actions = static_cast<std::uint32_t>(env.n_actions());
  if (spec.obs_dim != env.obs_dim() || spec.n_actions != env.n_actions())
    throw std::invalid_argument("train: policy spec does not match the environment");

  PolicyNet net(spec);
  net.init_random(derive_seed(seed, 2));
  std::mt19937_64 sample_rng(derive_seed(seed, 3));
  std::mt19937_64 shuffle_rng(derive_seed(seed, 4));
  AdamOptimizer adam(net.param_count(), hyper.lr);
  RolloutBuffer buf(env.obs_dim());
  const std::vector<std::uint8_t> mask(env.n_actions(), 1);

  TrainReport report;
  const auto t0 = std::chrono::steady_clock::now();
  const double horizon =
      static_cast<double>(hyper.max_epochs) * static_cast<double>(cfg.epoch_actions);
  Observation obs = env.reset_episode();
  std::uint64_t steps_taken = 0;
  bool stop = false;
  while (!stop) {
    const PolicyNet::Forward f = net.forward(obs);
    const auto [a, logp] = sample_action(f.logits, mask, sample_rng);
    const StepResult sr = env.step(env.legal_actions()[static_cast<std::size_t>(a)]);
    buf.push(obs, a, logp, sr.reward, f.value, sr.done, sr.info.truncated);
    obs = sr.done ? env.reset_episode() : sr.observation;
    ++steps_taken;

    if (env.epoch_complete()) {
      EpochStats stats = env.epoch_stats();
      report.epochs.push_back(stats);
      ++report.epochs_run;
      if (stats.episodes_completed > 0 && stats.episodes_correct == stats.episodes_completed)
        report.converged = true;
      if (report.converged || report.epochs_run >= hyper.max_epochs) stop = true;
    }
    if (!stop && buf.size() == hyper.rollout_len) {
      const double bootstrap = net.forward(obs).value;
      buf.finalize(bootstrap, hyper.gamma, hyper.gae_lambda);
      TrainHyper step_hyper = hyper;  // entropy annealed over the epoch horizon
      step_hyper.entropy_coef =
          hyper.entropy_coef * std::max(0.0, 1.0 - static_cast<double>(steps_taken) / horizon);
      ppo_update(net, adam, buf, step_hyper, shuffle_rng);
      buf.clear();
    }
  }

  for (const EpochStats& s : report.epochs) {
    report.total_actions += s.total_actions;
    report.total_useless += s.useless_actions;
  }
  report.useless_ratio = report.total_actions == 0
                             ? 0.0
                             : static_cast<double>(report.total_useless) /
                                   static_cast<double>(report.total_actions);
  if (report.converged) report.extracted_plans = extract_plans(cfg, net);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out_net) *out_net = net;
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointMagic = "cavex-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string hexfloat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hexfloat(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

void save_checkpoint(const std::string& path, const PolicyNet& net, const TrainHyper& hyper,
                     std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const PolicySpec& s = net.spec();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "obs_dim " << s.obs_dim << '\n';
  out << "n_actions " << s.n_actions << '\n';
  out << "hidden_units " << s.hidden_units << '\n';
  out << "shared_trunk " << (s.shared_trunk ? 1 : 0) << '\n';
  out << "seed " << seed << '\n';
  out << "gamma " << hexfloat(hyper.gamma) << '\n';
  out << "lr " << hexfloat(hyper.lr) << '\n';
  out << "clip_ratio " << hexfloat(hyper.clip_ratio) << '\n';
  out << "rollout_len " << hyper.rollout_len << '\n';
  out << "minibatch " << hyper.minibatch << '\n';
  out << "gae_lambda " << hexfloat(hyper.gae_lambda) << '\n';
  out << "ppo_epochs_per_update " << hyper.ppo_epochs_per_update << '\n';
  out << "value_coef " << hexfloat(hyper.value_coef) << '\n';
  out << "entropy_coef " << hexfloat(hyper.entropy_coef) << '\n';
  out << "max_epochs " << hyper.max_epochs << '\n';
  out << "params " << net.param_count() << '\n';
  for (double p : net.params()) out << hexfloat(p) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kCheckpointMagic || version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unrecognized format in " + path);

  Checkpoint ck;
  std::string key, value;
  std::size_t n_params = 0;
  auto as_u64 = [&](const std::string& v) { return std::strtoull(v.c_str(), nullptr, 10); };
  while (in >> key >> value) {
    if (key == "obs_dim") ck.spec.obs_dim = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "n_actions") ck.spec.n_actions = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "hidden_units") ck.spec.hidden_units = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "shared_trunk") ck.spec.shared_trunk = value != "0";
    else if (key == "seed") ck.seed = as_u64(value);
    else if (key == "gamma") ck.hyper.gamma = parse_hexfloat(value);
    else if (key == "lr") ck.hyper.lr = parse_hexfloat(value);
    else if (key == "clip_ratio") ck.hyper.clip_ratio = parse_hexfloat(value);
    else if (key == "rollout_len") ck.hyper.rollout_len = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "minibatch") ck.hyper.minibatch = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "gae_lambda") ck.hyper.gae_lambda = parse_hexfloat(value);
    else if (key == "ppo_epochs_per_update")
      ck.hyper.ppo_epochs_per_update = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "value_coef") ck.hyper.value_coef = parse_hexfloat(value);
    else if (key == "entropy_coef") ck.hyper.entropy_coef = parse_hexfloat(value);
    else if (key == "max_epochs") ck.hyper.max_epochs = static_cast<std::uint32_t>(as_u64(value));
    else if (key == "params") {
      n_params = as_u64(value);
      break;
    } else {
      throw std::runtime_error("load_checkpoint: unknown key " + key);
    }
  }
  ck.params.reserve(n_params);
  std::string tok;
  while (ck.params.size() < n_params && in >> tok) ck.params.push_back(parse_hexfloat(tok));
  if (ck.params.size() != n_params)
    throw std::runtime_error("load_checkpoint: truncated parameter block");
  return ck;
}

}  // namespace cavex
