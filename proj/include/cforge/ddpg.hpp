#pragma once

#include <array>

#include "cforge/mlp.hpp"
#include "cforge/replay.hpp"

namespace cforge {

struct DdpgConfig {
  int state_dim = 13;
  int hidden = 300;   // three hidden layers of this width
  double actor_lr = 1e-3;
  double critic_lr = 1e-4;
  double tau = 0.01;
  double gamma = 1.0;
  double sigma_init = 0.6;
  double sigma_decay = 0.99;
  double priority_eps = 1e-6;
};

/// Deterministic continuous-action actor-critic over (a_S, a_Q) in [0,1]^2.
/// The actor's last hidden layer doubles as the feature extractor for the
/// discrete-technique agent.
class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& cfg, Rng& rng);

  /// Deterministic policy output; with explore, truncated-normal noise with
  /// the current sigma, truncation window [0,1].
  std::array<double, 2> act(const std::vector<real>& state, bool explore, Rng& rng) const;

  /// 300-d output of the actor's last hidden layer.
  std::vector<real> features(const std::vector<real>& state) const;
  int feature_dim() const { return cfg_.hidden; }

  struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
  };
  UpdateStats update(PrioritizedReplay& replay, int batch_size, double beta, Rng& rng);

  void decay_sigma() { sigma_ *= cfg_.sigma_decay; }
  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Mlp& mutable_actor() { return actor_; }
  const DdpgConfig& config() const { return cfg_; }

  std::vector<real> snapshot_params() const;
  void restore_params(const std::vector<real>& blob);

 private:
  DdpgConfig cfg_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
  double sigma_ = 0.6;
};

void polyak_update(Mlp& target, const Mlp& online, double tau);

}  // namespace cforge
