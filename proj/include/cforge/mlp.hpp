#pragma once

#include <vector>

#include "cforge/rng.hpp"
#include "cforge/types.hpp"

namespace cforge {

enum class Act { linear, relu, tanh_act, sigmoid };

struct MlpLayerSpec {
  int in = 0;
  int out = 0;
  Act act = Act::linear;
  bool noisy = false;  // factorized Gaussian noise on weights and bias
};

/// Plain fully-connected stack used by the RL agents. Runs one sample at a
/// time; batches are accumulated by the caller. Noisy layers follow the
/// factorized scheme: w_eff = w + w_sigma * (f(eps_out) f(eps_in)^T) with
/// f(x) = sign(x) sqrt(|x|).
class Mlp {
 public:
  struct Layer {
    MlpLayerSpec spec;
    std::vector<real> w, b;
    std::vector<real> w_sigma, b_sigma;  // empty unless noisy
    std::vector<real> eps_in, eps_out;   // current noise draw (noisy only)
  };

  Mlp() = default;
  Mlp(std::vector<MlpLayerSpec> specs, Rng& rng);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().spec.in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().spec.out; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }

  std::vector<real> forward(const std::vector<real>& in) const;
  /// Activation output after `n_layers` layers (0 < n_layers <= count).
  std::vector<real> forward_partial(const std::vector<real>& in, int n_layers) const;

  struct Trace {
    std::vector<std::vector<real>> x;  // input to each layer
    std::vector<std::vector<real>> y;  // post-activation output of each layer
  };
  std::vector<real> forward_traced(const std::vector<real>& in, Trace& tr) const;

  struct Grads {
    std::vector<std::vector<real>> w, b, w_sigma, b_sigma;
    std::vector<real> input;  // dL/d(input), for actor-critic chaining
    void add_scaled(const Grads& o, real s);
  };
  Grads zero_grads() const;

  /// Backpropagate dL/d(output) through the recorded trace, accumulating
  /// parameter gradients into `g` and returning via g.input.
  void backward(const Trace& tr, const std::vector<real>& dy, Grads& g) const;

  void resample_noise(Rng& rng);
  void zero_noise();

  std::vector<real> params_flat() const;
  void set_params_flat(const std::vector<real>& flat);
  void copy_from(const Mlp& other);
  void polyak_from(const Mlp& online, double tau);

 private:
  std::vector<Layer> layers_;

  friend class Adam;
};

/// Adam over all Mlp parameters (including sigma parameters of noisy
/// layers), applied to accumulated gradients.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr);
  void step(Mlp& net, const Mlp::Grads& g);
  double lr() const { return lr_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  i64 t_ = 0;
  std::vector<std::vector<real>> m_, v_;  // one pair per parameter block
};

}  // namespace cforge
