#include "cavex/rl/policy_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cavex/util/rng.hpp"

namespace cavex {

void PolicySpec::validate() const {
  if (obs_dim == 0) throw std::invalid_argument("policy.obs_dim: must be positive");
  if (n_actions == 0) throw std::invalid_argument("policy.n_actions: must be positive");
  if (hidden_units == 0) throw std::invalid_argument("policy.hidden_units: must be positive");
}

PolicyNet::PolicyNet(PolicySpec spec) : spec_(spec) {
  spec_.validate();
  const std::size_t o = spec_.obs_dim, h = spec_.hidden_units, a = spec_.n_actions;
  Layout& L = layout_;
  std::size_t off = 0;
  L.w1p = off, off += h * o;
  L.b1p = off, off += h;
  L.wp = off, off += a * h;
  L.bp = off, off += a;
  if (spec_.shared_trunk) {
    L.w1v = L.w1p;
    L.b1v = L.b1p;
  } else {
    L.w1v = off, off += h * o;
    L.b1v = off, off += h;
  }
  L.wv = off, off += h;
  L.bv = off, off += 1;
  L.total = off;
  params_.assign(L.total, 0.0);
}

namespace {

double gaussian(std::mt19937_64& rng) {
  // Box-Muller; avoids std::normal_distribution for cross-library determinism.
  double u1 = uniform_real01(rng);
  while (u1 <= 1e-300) u1 = uniform_real01(rng);
  const double u2 = uniform_real01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Semi-orthogonal matrix via modified Gram-Schmidt on the smaller dimension.
void orthogonal_fill(std::span<double> w, std::size_t rows, std::size_t cols, double gain,
                     std::mt19937_64& rng) {
  for (double& x : w) x = gaussian(rng);
  const bool by_rows = rows <= cols;
  const std::size_t n = by_rows ? rows : cols;
  const std::size_t len = by_rows ? cols : rows;
  auto elem = [&](std::size_t vec, std::size_t i) -> double& {
    return by_rows ? w[vec * cols + i] : w[i * cols + vec];
  };
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0;
      for (std::size_t i = 0; i < len; ++i) dot += elem(k, i) * elem(j, i);
      for (std::size_t i = 0; i < len; ++i) elem(k, i) -= dot * elem(j, i);
    }
    double norm = 0;
    for (std::size_t i = 0; i < len; ++i) norm += elem(k, i) * elem(k, i);
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      for (std::size_t i = 0; i < len; ++i) elem(k, i) = i == k % len ? 1.0 : 0.0;
      norm = 1.0;
    }
    for (std::size_t i = 0; i < len; ++i) elem(k, i) /= norm;
  }
  for (double& x : w) x *= gain;
}

}  // namespace

void PolicyNet::init_random(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t o = spec_.obs_dim, h = spec_.hidden_units, a = spec_.n_actions;
  const double kTrunkGain = std::sqrt(2.0);  // relu
  const double kPolicyGain = 0.01;           // near-uniform initial policy
  const double kValueGain = 1.0;
  auto span_at = [&](std::size_t off, std::size_t n) {
    return std::span<double>(params_.data() + off, n);
  };
  orthogonal_fill(span_at(layout_.w1p, h * o), h, o, kTrunkGain, rng);
  orthogonal_fill(span_at(layout_.wp, a * h), a, h, kPolicyGain, rng);
  if (!spec_.shared_trunk) orthogonal_fill(span_at(layout_.w1v, h * o), h, o, kTrunkGain, rng);
  orthogonal_fill(span_at(layout_.wv, h), 1, h, kValueGain, rng);
  // biases stay zero
}

PolicyNet::Forward PolicyNet::forward(std::span<const double> obs) const {
  if (obs.size() != spec_.obs_dim)
    throw std::invalid_argument("forward: observation dimension mismatch");
  const std::size_t o = spec_.obs_dim, h = spec_.hidden_units, a = spec_.n_actions;
  const double* p = params_.data();
  Forward f;

  f.z_p.resize(h);
  f.h_p.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    double z = p[layout_.b1p + i];
    const double* row = p + layout_.w1p + i * o;
    for (std::size_t j = 0; j < o; ++j) z += row[j] * obs[j];
    f.z_p[i] = z;
    f.h_p[i] = z > 0 ? z : 0.0;
  }
  f.logits.resize(a);
  for (std::size_t k = 0; k < a; ++k) {
    double z = p[layout_.bp + k];
    const double* row = p + layout_.wp + k * h;
    for (std::size_t i = 0; i < h; ++i) z += row[i] * f.h_p[i];
    f.logits[k] = z;
  }

  const std::vector<double>* hv = &f.h_p;
  if (!spec_.shared_trunk) {
    f.z_v.resize(h);
    f.h_v.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
      double z = p[layout_.b1v + i];
      const double* row = p + layout_.w1v + i * o;
      for (std::size_t j = 0; j < o; ++j) z += row[j] * obs[j];
      f.z_v[i] = z;
      f.h_v[i] = z > 0 ? z : 0.0;
    }
    hv = &f.h_v;
  }
  double v = p[layout_.bv];
  for (std::size_t i = 0; i < h; ++i) v += p[layout_.wv + i] * (*hv)[i];
  f.value = v;
  return f;
}

void PolicyNet::backward(const Forward& f, std::span<const double> obs,
                         std::span<const double> dlogits, double dvalue,
                         std::span<double> grad) const {
  const std::size_t o = spec_.obs_dim, h = spec_.hidden_units, a = spec_.n_actions;
  const double* p = params_.data();
  double* g = grad.data();

  // policy head
  std::vector<double> dh_p(h, 0.0);
  for (std::size_t k = 0; k < a; ++k) {
    const double dk = dlogits[k];
    if (dk == 0.0) continue;
    double* grow = g + layout_.wp + k * h;
    const double* wrow = p + layout_.wp + k * h;
    for (std::size_t i = 0; i < h; ++i) {
      grow[i] += dk * f.h_p[i];
      dh_p[i] += dk * wrow[i];
    }
    g[layout_.bp + k] += dk;
  }

  // value head
  const std::vector<double>& hv = spec_.shared_trunk ? f.h_p : f.h_v;
  std::vector<double> dh_v;
  double* dv_sink = nullptr;
  if (spec_.shared_trunk) {
    dv_sink = dh_p.data();
  } else {
    dh_v.assign(h, 0.0);
    dv_sink = dh_v.data();
  }
  if (dvalue != 0.0) {
    for (std::size_t i = 0; i < h; ++i) {
      g[layout_.wv + i] += dvalue * hv[i];
      dv_sink[i] += dvalue * p[layout_.wv + i];
    }
    g[layout_.bv] += dvalue;
  }

  // policy trunk (the only trunk when shared)
  for (std::size_t i = 0; i < h; ++i) {
    if (f.z_p[i] <= 0) continue;
    const double dz = dh_p[i];
    if (dz == 0.0) continue;
    double* grow = g + layout_.w1p + i * o;
    for (std::size_t j = 0; j < o; ++j) grow[j] += dz * obs[j];
    g[layout_.b1p + i] += dz;
  }
  if (!spec_.shared_trunk) {
    for (std::size_t i = 0; i < h; ++i) {
      if (f.z_v[i] <= 0) continue;
      const double dz = dh_v[i];
      if (dz == 0.0) continue;
      double* grow = g + layout_.w1v + i * o;
      for (std::size_t j = 0; j < o; ++j) grow[j] += dz * obs[j];
      g[layout_.b1v + i] += dz;
    }
  }
}

}  // namespace cavex
