#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cavex {

struct PolicySpec {
  std::uint32_t obs_dim = 0;    // filled from the environment when 0
  std::uint32_t n_actions = 0;  // filled from the environment when 0
  std::uint32_t hidden_units = 256;
  bool shared_trunk = true;

  void validate() const;
  bool operator==(const PolicySpec&) const = default;
};

// Two-headed MLP: one ReLU hidden layer feeding n_actions policy logits and a
// scalar state value. With shared_trunk=false the heads get separate trunks.
// Parameters live in one flat vector so the optimizer and the checkpoint
// format stay trivial.
class PolicyNet {
 public:
  explicit PolicyNet(PolicySpec spec);

  const PolicySpec& spec() const { return spec_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Orthogonal init scaled per layer (sqrt(2) trunk, 0.01 policy head, 1.0
  // value head), biases zero. Deterministic for a given seed.
  void init_random(std::uint64_t seed);

  struct Forward {
    std::vector<double> logits;
    double value = 0.0;
    // retained activations for backward()
    std::vector<double> z_p, h_p;  // policy trunk (the only trunk when shared)
    std::vector<double> z_v, h_v;  // value trunk (empty when shared)
  };

  Forward forward(std::span<const double> obs) const;

  // Accumulates d(loss)/d(params) into grad given d(loss)/d(logits) and
  // d(loss)/d(value) for one sample. grad must have param_count() entries.
  void backward(const Forward& f, std::span<const double> obs, std::span<const double> dlogits,
                double dvalue, std::span<double> grad) const;

 private:
  // flat layout (shared):   W1 b1 Wp bp Wv bv
  // flat layout (separate): W1p b1p Wp bp W1v b1v Wv bv
  struct Layout {
    std::size_t w1p, b1p, wp, bp, w1v, b1v, wv, bv, total;
  };
  Layout layout_;
  PolicySpec spec_;
  std::vector<double> params_;
};

}  // namespace cavex
