#include "cforge/rainbow.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

std::vector<double> distributional_projection(double reward, bool done,
                                              const std::vector<double>& next_dist,
                                              const std::vector<double>& support, double gamma) {
  const int n = static_cast<int>(support.size());
  require(static_cast<int>(next_dist.size()) == n, "projection: dist/support size mismatch");
  const double v_min = support.front(), v_max = support.back();
  const double dz = n > 1 ? (v_max - v_min) / (n - 1) : 1.0;
  std::vector<double> m(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const double mass = done ? (j == 0 ? 1.0 : 0.0) : next_dist[static_cast<size_t>(j)];
    if (mass == 0.0) continue;
    const double tz = std::clamp(reward + (done ? 0.0 : gamma * support[static_cast<size_t>(j)]),
                                 v_min, v_max);
    const double pos = (tz - v_min) / dz;
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = static_cast<int>(std::ceil(pos));
    if (lo == hi) {
      m[static_cast<size_t>(lo)] += mass;
    } else {
      m[static_cast<size_t>(lo)] += mass * (hi - pos);
      m[static_cast<size_t>(hi)] += mass * (pos - lo);
    }
  }
  double sum = 0.0;
  for (double v : m) sum += v;
  if (sum > 0.0)
    for (double& v : m) v /= sum;
  return m;
}

namespace {

std::vector<MlpLayerSpec> value_spec(const RainbowConfig& c) {
  return {{c.feature_dim, c.hidden, Act::relu, false}, {c.hidden, c.atoms, Act::linear, true}};
}

std::vector<MlpLayerSpec> adv_spec(const RainbowConfig& c) {
  return {{c.feature_dim, c.hidden, Act::relu, false},
          {c.hidden, c.actions * c.atoms, Act::linear, true}};
}

}  // namespace

RainbowAgent::RainbowAgent(const RainbowConfig& cfg, Rng& rng)
    : cfg_(cfg),
      value_(value_spec(cfg), rng),
      adv_(adv_spec(cfg), rng),
      value_target_(value_spec(cfg), rng),
      adv_target_(adv_spec(cfg), rng),
      value_opt_(value_, cfg.lr),
      adv_opt_(adv_, cfg.lr) {
  require(cfg.atoms >= 2, "rainbow: need at least 2 atoms");
  value_target_.copy_from(value_);
  adv_target_.copy_from(adv_);
  support_.resize(static_cast<size_t>(cfg.atoms));
  for (int i = 0; i < cfg.atoms; ++i)
    support_[static_cast<size_t>(i)] =
        cfg.v_min + (cfg.v_max - cfg.v_min) * static_cast<double>(i) / (cfg.atoms - 1);
}

std::vector<double> RainbowAgent::dist_of(const Mlp& value, const Mlp& adv,
                                          const std::vector<real>& features) const {
  const auto v = value.forward(features);
  const auto a = adv.forward(features);
  const int A = cfg_.actions, Z = cfg_.atoms;
  std::vector<double> out(static_cast<size_t>(A) * Z);
  for (int z = 0; z < Z; ++z) {
    double mean_adv = 0.0;
    for (int ai = 0; ai < A; ++ai) mean_adv += static_cast<double>(a[static_cast<size_t>(ai) * Z + z]);
    mean_adv /= A;
    for (int ai = 0; ai < A; ++ai)
      out[static_cast<size_t>(ai) * Z + z] = static_cast<double>(v[static_cast<size_t>(z)]) +
                                             static_cast<double>(a[static_cast<size_t>(ai) * Z + z]) -
                                             mean_adv;
  }
  // per-action softmax over atoms, accumulated in double
  for (int ai = 0; ai < A; ++ai) {
    double* row = out.data() + static_cast<size_t>(ai) * Z;
    double zmax = row[0];
    for (int z = 1; z < Z; ++z) zmax = std::max(zmax, row[z]);
    double denom = 0.0;
    for (int z = 0; z < Z; ++z) denom += std::exp(row[z] - zmax);
    for (int z = 0; z < Z; ++z) row[z] = std::exp(row[z] - zmax) / denom;
  }
  return out;
}

std::vector<double> RainbowAgent::distribution(const std::vector<real>& features) const {
  return dist_of(value_, adv_, features);
}

int RainbowAgent::greedy_action(const std::vector<double>& dist) const {
  int best = 0;
  double best_q = -1e300;
  for (int ai = 0; ai < cfg_.actions; ++ai) {
    double q = 0.0;
    for (int z = 0; z < cfg_.atoms; ++z)
      q += support_[static_cast<size_t>(z)] * dist[static_cast<size_t>(ai) * cfg_.atoms + z];
    if (q > best_q) {
      best_q = q;
      best = ai;
    }
  }
  return best;
}

int RainbowAgent::act(const std::vector<real>& features, bool frozen, Rng& rng) {
  if (frozen) return rng.uniform_int(0, cfg_.actions - 1);
  value_.resample_noise(rng);
  adv_.resample_noise(rng);
  return greedy_action(distribution(features));
}

double RainbowAgent::update(PrioritizedReplay& replay, int batch_size, double beta,
                            const FeatureFn& feature_fn, Rng& rng) {
  require(replay.size() >= batch_size, "rainbow update: not enough transitions");
  auto batch = replay.sample(batch_size, beta, rng);
  value_.resample_noise(rng);
  adv_.resample_noise(rng);
  value_target_.resample_noise(rng);
  adv_target_.resample_noise(rng);

  auto vgrads = value_.zero_grads();
  auto agrads = adv_.zero_grads();
  const int A = cfg_.actions, Z = cfg_.atoms;
  double total_loss = 0.0;

  for (size_t bi = 0; bi < batch.indices.size(); ++bi) {
    const Transition& tr = replay.at(batch.indices[bi]);
    const auto f = feature_fn(tr.state);

    // double-Q: online picks the next action, target supplies its dist
    std::vector<double> m;
    if (tr.nstep_done) {
      m = distributional_projection(tr.nstep_return, true, std::vector<double>(Z, 0.0), support_,
                                    tr.nstep_discount);
    } else {
      const auto fn = feature_fn(tr.nstep_state);
      const auto online_next = dist_of(value_, adv_, fn);
      const int a_star = greedy_action(online_next);
      const auto target_next = dist_of(value_target_, adv_target_, fn);
      std::vector<double> nd(target_next.begin() + static_cast<std::ptrdiff_t>(a_star) * Z,
                             target_next.begin() + static_cast<std::ptrdiff_t>(a_star + 1) * Z);
      m = distributional_projection(tr.nstep_return, false, nd, support_, tr.nstep_discount);
    }

    Mlp::Trace vtrace, atrace;
    const auto vout = value_.forward_traced(f, vtrace);
    const auto aout = adv_.forward_traced(f, atrace);
    const int act_i = tr.rainbow_action;
    // logits of the chosen action and its softmax
    std::vector<double> logits(static_cast<size_t>(Z));
    for (int z = 0; z < Z; ++z) {
      double mean_adv = 0.0;
      for (int ai = 0; ai < A; ++ai) mean_adv += static_cast<double>(aout[static_cast<size_t>(ai) * Z + z]);
      mean_adv /= A;
      logits[static_cast<size_t>(z)] = static_cast<double>(vout[static_cast<size_t>(z)]) +
                                       static_cast<double>(aout[static_cast<size_t>(act_i) * Z + z]) -
                                       mean_adv;
    }
    double zmax = logits[0];
    for (int z = 1; z < Z; ++z) zmax = std::max(zmax, logits[static_cast<size_t>(z)]);
    double denom = 0.0;
    for (int z = 0; z < Z; ++z) denom += std::exp(logits[static_cast<size_t>(z)] - zmax);
    std::vector<double> p(static_cast<size_t>(Z));
    for (int z = 0; z < Z; ++z) p[static_cast<size_t>(z)] = std::exp(logits[static_cast<size_t>(z)] - zmax) / denom;

    double ce = 0.0, kl = 0.0;
    for (int z = 0; z < Z; ++z) {
      if (m[static_cast<size_t>(z)] > 0.0) {
        ce -= m[static_cast<size_t>(z)] * std::log(std::max(p[static_cast<size_t>(z)], 1e-300));
        kl += m[static_cast<size_t>(z)] *
              (std::log(m[static_cast<size_t>(z)]) - std::log(std::max(p[static_cast<size_t>(z)], 1e-300)));
      }
    }
    total_loss += ce / batch_size;
    replay.update_priority(batch.indices[bi], std::max(kl, 0.0) + cfg_.priority_eps);

    // d(CE)/d(logit_z) = p_z - m_z; chain into the value and advantage heads
    const double wscale = batch.weights[bi] / batch_size;
    std::vector<real> dv(static_cast<size_t>(Z));
    std::vector<real> da(static_cast<size_t>(A) * Z, real(0));
    for (int z = 0; z < Z; ++z) {
      const double g = (p[static_cast<size_t>(z)] - m[static_cast<size_t>(z)]) * wscale;
      dv[static_cast<size_t>(z)] = static_cast<real>(g);
      for (int ai = 0; ai < A; ++ai) {
        const double d_adv = (ai == act_i ? 1.0 : 0.0) - 1.0 / A;
        da[static_cast<size_t>(ai) * Z + z] = static_cast<real>(g * d_adv);
      }
    }
    value_.backward(vtrace, dv, vgrads);
    adv_.backward(atrace, da, agrads);
  }

  value_opt_.step(value_, vgrads);
  adv_opt_.step(adv_, agrads);
  ++updates_;
  if (updates_ % cfg_.target_update_period == 0) {
    value_target_.copy_from(value_);
    adv_target_.copy_from(adv_);
  }
  return total_loss;
}

std::vector<real> RainbowAgent::snapshot_params() const {
  std::vector<real> blob = value_.params_flat();
  auto append = [&blob](const std::vector<real>& v) { blob.insert(blob.end(), v.begin(), v.end()); };
  append(adv_.params_flat());
  append(value_target_.params_flat());
  append(adv_target_.params_flat());
  return blob;
}

void RainbowAgent::restore_params(const std::vector<real>& blob) {
  const size_t nv = value_.params_flat().size();
  const size_t na = adv_.params_flat().size();
  require(blob.size() == 2 * (nv + na), "rainbow: checkpoint size mismatch");
  auto slice = [&blob](size_t off, size_t len) {
    return std::vector<real>(blob.begin() + static_cast<std::ptrdiff_t>(off),
                             blob.begin() + static_cast<std::ptrdiff_t>(off + len));
  };
  value_.set_params_flat(slice(0, nv));
  adv_.set_params_flat(slice(nv, na));
  value_target_.set_params_flat(slice(nv + na, nv));
  adv_target_.set_params_flat(slice(nv + na + nv, na));
}

bool RewardMonitor::observe(double episode_reward) {
  if (unlocked_) return true;
  rewards_.push_back(episode_reward);
  if (static_cast<int>(rewards_.size()) > window_) rewards_.pop_front();
  if (static_cast<int>(rewards_.size()) < window_) return false;
  double avg = 0.0;
  for (double r : rewards_) avg += r;
  avg /= window_;
  if (have_prev_) {
    streak_ = avg > prev_avg_ ? streak_ + 1 : 0;
    if (streak_ >= needed_) unlocked_ = true;
  }
  prev_avg_ = avg;
  have_prev_ = true;
  return unlocked_;
}

}  // namespace cforge
