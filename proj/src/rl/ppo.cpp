#include "cavex/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cavex/rl/gae.hpp"
#include "cavex/util/rng.hpp"

namespace cavex {

std::vector<double> masked_log_softmax(std::span<const double> logits,
                                       std::span<const std::uint8_t> mask) {
  if (logits.size() != mask.size())
    throw std::invalid_argument("masked_log_softmax: mask size mismatch");
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i] && logits[i] > max) max = logits[i];
  if (max == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("masked_log_softmax: no legal action");
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) z += std::exp(logits[i] - max);
  const double log_z = std::log(z) + max;
  std::vector<double> out(logits.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) out[i] = logits[i] - log_z;
  return out;
}

std::pair<int, double> sample_action(std::span<const double> logits,
                                     std::span<const std::uint8_t> mask, std::mt19937_64& rng) {
  const std::vector<double> logp = masked_log_softmax(logits, mask);
  const double u = uniform_real01(rng);
  double cum = 0.0;
  int last_legal = -1;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    if (!mask[i]) continue;
    last_legal = static_cast<int>(i);
    cum += std::exp(logp[i]);
    if (u < cum) return {static_cast<int>(i), logp[i]};
  }
  return {last_legal, logp[last_legal]};  // rounding tail
}

void RolloutBuffer::finalize(double bootstrap_value, double gamma, double lambda) {
  GaeResult g = compute_gae(rewards, values, dones, bootstrap_value, gamma, lambda);
  returns = std::move(g.returns);
  advantages = std::move(g.advantages);
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

PpoLossStats ppo_minibatch_loss(const PolicyNet& net, const RolloutBuffer& buf,
                                std::span<const int> idx, const TrainHyper& hyper,
                                std::vector<double>* grad) {
  const std::size_t n_actions = net.spec().n_actions;
  const double inv_b = 1.0 / static_cast<double>(idx.size());
  const double eps = hyper.clip_ratio;
  PpoLossStats stats;
  std::vector<double> dlogits(n_actions);

  for (int row : idx) {
    const auto obs = buf.obs_at(static_cast<std::size_t>(row));
    const PolicyNet::Forward f = net.forward(obs);

    // log-softmax over all actions (legality is static for this env family)
    double max = *std::max_element(f.logits.begin(), f.logits.end());
    double z = 0.0;
    for (double l : f.logits) z += std::exp(l - max);
    const double log_z = std::log(z) + max;

    const int a = buf.actions[static_cast<std::size_t>(row)];
    const double logp_new = f.logits[static_cast<std::size_t>(a)] - log_z;
    const double logp_old = buf.log_probs[static_cast<std::size_t>(row)];
    const double adv = buf.advantages[static_cast<std::size_t>(row)];
    const double ret = buf.returns[static_cast<std::size_t>(row)];

    const double ratio = std::exp(logp_new - logp_old);
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    stats.policy += -std::min(surr1, surr2) * inv_b;

    double entropy = 0.0;
    const double verr = f.value - ret;
    stats.value += verr * verr * inv_b;

    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    // d(-min(surr1, surr2))/d(logp_new); zero when the clipped branch binds
    const double dlogp = surr1 <= surr2 ? -ratio * adv * inv_b : 0.0;
    for (std::size_t k = 0; k < n_actions; ++k) {
      const double logp_k = f.logits[k] - log_z;
      const double p_k = std::exp(logp_k);
      entropy -= p_k * logp_k;
      dlogits[k] += dlogp * ((static_cast<int>(k) == a ? 1.0 : 0.0) - p_k);
    }
    stats.entropy += entropy * inv_b;
    if (grad) {
      // entropy bonus: d(-c_H * H)/d(logit_k) = c_H * p_k (logp_k + H)
      for (std::size_t k = 0; k < n_actions; ++k) {
        const double logp_k = f.logits[k] - log_z;
        const double p_k = std::exp(logp_k);
        dlogits[k] += hyper.entropy_coef * inv_b * p_k * (logp_k + entropy);
      }
      const double dvalue = hyper.value_coef * 2.0 * verr * inv_b;
      net.backward(f, obs, dlogits, dvalue, *grad);
    }
  }
  stats.total = stats.policy + hyper.value_coef * stats.value - hyper.entropy_coef * stats.entropy;
  return stats;
}

namespace {

// Fisher-Yates with our own index draws: identical shuffles for identical
// seeds on any standard library.
void shuffle_indices(std::vector<int>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

PpoLossStats ppo_update(PolicyNet& net, AdamOptimizer& adam, const RolloutBuffer& buf,
                        const TrainHyper& hyper, std::mt19937_64& shuffle_rng) {
  if (buf.size() != hyper.rollout_len)
    throw std::invalid_argument("ppo_update: buffer not full");
  std::vector<int> order(buf.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(net.param_count());

  PpoLossStats acc;
  std::size_t n_batches = 0;
  for (std::uint32_t e = 0; e < hyper.ppo_epochs_per_update; ++e) {
    shuffle_indices(order, shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.minibatch) {
      std::fill(grad.begin(), grad.end(), 0.0);
      const std::span<const int> idx(order.data() + start, hyper.minibatch);
      const PpoLossStats s = ppo_minibatch_loss(net, buf, idx, hyper, &grad);
      if (!std::isfinite(s.total))
        throw TrainError("ppo_update: non-finite loss (policy=" + std::to_string(s.policy) +
                         " value=" + std::to_string(s.value) +
                         " entropy=" + std::to_string(s.entropy) + ")");
      adam.step(net.params(), grad);
      acc.total += s.total;
      acc.policy += s.policy;
      acc.value += s.value;
      acc.entropy += s.entropy;
      ++n_batches;
    }
  }
  const double inv = 1.0 / static_cast<double>(n_batches);
  acc.total *= inv;
  acc.policy *= inv;
  acc.value *= inv;
  acc.entropy *= inv;
  return acc;
}

}  // namespace cavex
