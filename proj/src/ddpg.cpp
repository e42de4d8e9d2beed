#include "cforge/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

namespace {

std::vector<MlpLayerSpec> actor_spec(const DdpgConfig& c) {
  return {{c.state_dim, c.hidden, Act::relu, false},
          {c.hidden, c.hidden, Act::relu, false},
          {c.hidden, c.hidden, Act::relu, false},
          {c.hidden, 2, Act::sigmoid, false}};
}

std::vector<MlpLayerSpec> critic_spec(const DdpgConfig& c) {
  const int in = c.state_dim + 2;
  return {{in, c.hidden, Act::relu, false},
          {c.hidden, c.hidden, Act::relu, false},
          {c.hidden, c.hidden, Act::relu, false},
          {c.hidden, 1, Act::linear, false}};
}

}  // namespace

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  target.polyak_from(online, tau);
}

DdpgAgent::DdpgAgent(const DdpgConfig& cfg, Rng& rng)
    : cfg_(cfg),
      actor_(actor_spec(cfg), rng),
      critic_(critic_spec(cfg), rng),
      actor_target_(actor_spec(cfg), rng),
      critic_target_(critic_spec(cfg), rng),
      actor_opt_(actor_, cfg.actor_lr),
      critic_opt_(critic_, cfg.critic_lr),
      sigma_(cfg.sigma_init) {
  actor_target_.copy_from(actor_);
  critic_target_.copy_from(critic_);
}

std::array<double, 2> DdpgAgent::act(const std::vector<real>& state, bool explore,
                                     Rng& rng) const {
  const auto out = actor_.forward(state);
  std::array<double, 2> a{static_cast<double>(out[0]), static_cast<double>(out[1])};
  if (explore && sigma_ > 0.0) {
    a[0] = rng.truncated_normal(a[0], sigma_, 0.0, 1.0);
    a[1] = rng.truncated_normal(a[1], sigma_, 0.0, 1.0);
  }
  a[0] = std::clamp(a[0], 0.0, 1.0);
  a[1] = std::clamp(a[1], 0.0, 1.0);
  return a;
}

std::vector<real> DdpgAgent::features(const std::vector<real>& state) const {
  return actor_.forward_partial(state, actor_.layer_count() - 1);
}

DdpgAgent::UpdateStats DdpgAgent::update(PrioritizedReplay& replay, int batch_size, double beta,
                                         Rng& rng) {
  require(replay.size() >= batch_size, "ddpg update: not enough transitions");
  auto batch = replay.sample(batch_size, beta, rng);

  UpdateStats stats;
  auto critic_grads = critic_.zero_grads();
  const real inv_n = real(1) / static_cast<real>(batch_size);

  // critic regression toward r + gamma * (1 - done) * Q_target(s', mu_target(s'))
  for (size_t bi = 0; bi < batch.indices.size(); ++bi) {
    const Transition& tr = replay.at(batch.indices[bi]);
    double target = tr.reward;
    if (!tr.done) {
      const auto next_action = actor_target_.forward(tr.next_state);
      std::vector<real> in(tr.next_state);
      in.insert(in.end(), next_action.begin(), next_action.end());
      target += cfg_.gamma * static_cast<double>(critic_target_.forward(in)[0]);
    }
    std::vector<real> in(tr.state);
    in.push_back(static_cast<real>(tr.ddpg_action[0]));
    in.push_back(static_cast<real>(tr.ddpg_action[1]));
    Mlp::Trace trace;
    const auto q = critic_.forward_traced(in, trace);
    const double td = static_cast<double>(q[0]) - target;
    const double w = batch.weights[bi];
    stats.critic_loss += w * td * td / batch_size;
    critic_.backward(trace, {static_cast<real>(2.0 * td * w) * inv_n}, critic_grads);
    replay.update_priority(batch.indices[bi], std::abs(td) + cfg_.priority_eps);
  }
  critic_opt_.step(critic_, critic_grads);

  // actor ascends the critic: minimize -mean Q(s, mu(s))
  auto actor_grads = actor_.zero_grads();
  for (size_t bi = 0; bi < batch.indices.size(); ++bi) {
    const Transition& tr = replay.at(batch.indices[bi]);
    Mlp::Trace atrace;
    const auto mu = actor_.forward_traced(tr.state, atrace);
    std::vector<real> in(tr.state);
    in.insert(in.end(), mu.begin(), mu.end());
    Mlp::Trace ctrace;
    const auto q = critic_.forward_traced(in, ctrace);
    stats.actor_loss -= static_cast<double>(q[0]) / batch_size;
    auto cg = critic_.zero_grads();
    critic_.backward(ctrace, {-inv_n}, cg);
    // chain dQ/da into the actor head
    std::vector<real> da(cg.input.end() - 2, cg.input.end());
    actor_.backward(atrace, da, actor_grads);
  }
  actor_opt_.step(actor_, actor_grads);

  polyak_update(actor_target_, actor_, cfg_.tau);
  polyak_update(critic_target_, critic_, cfg_.tau);
  return stats;
}

std::vector<real> DdpgAgent::snapshot_params() const {
  std::vector<real> blob = actor_.params_flat();
  const auto c = critic_.params_flat();
  const auto at = actor_target_.params_flat();
  const auto ct = critic_target_.params_flat();
  blob.insert(blob.end(), c.begin(), c.end());
  blob.insert(blob.end(), at.begin(), at.end());
  blob.insert(blob.end(), ct.begin(), ct.end());
  return blob;
}

void DdpgAgent::restore_params(const std::vector<real>& blob) {
  const size_t na = actor_.params_flat().size();
  const size_t nc = critic_.params_flat().size();
  require(blob.size() == 2 * (na + nc), "ddpg: checkpoint size mismatch");
  auto slice = [&blob](size_t off, size_t len) {
    return std::vector<real>(blob.begin() + static_cast<std::ptrdiff_t>(off),
                             blob.begin() + static_cast<std::ptrdiff_t>(off + len));
  };
  actor_.set_params_flat(slice(0, na));
  critic_.set_params_flat(slice(na, nc));
  actor_target_.set_params_flat(slice(na + nc, na));
  critic_target_.set_params_flat(slice(na + nc + na, nc));
}

}  // namespace cforge
