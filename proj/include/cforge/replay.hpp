#pragma once

#include <array>
#include <vector>

#include "cforge/rng.hpp"
#include "cforge/types.hpp"

namespace cforge {

struct Transition {
  std::vector<real> state;
  std::vector<real> next_state;
  std::array<double, 2> ddpg_action{0.0, 0.0};  // (a_S, a_Q) in [0,1]^2
  int rainbow_action = 0;
  double reward = 0.0;
  bool done = false;
  // n-step view for the distributional update, prepared at episode end
  double nstep_return = 0.0;
  std::vector<real> nstep_state;
  bool nstep_done = false;
  double nstep_discount = 1.0;  // gamma^n
};

/// Proportional prioritized replay over a sum tree. Stores priority^alpha;
/// new transitions enter at the current maximum priority, eviction is FIFO.
class PrioritizedReplay {
 public:
  explicit PrioritizedReplay(int capacity, double alpha = 0.6);

  void push(Transition t);
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  const Transition& at(int idx) const { return storage_[static_cast<size_t>(idx)]; }

  struct Batch {
    std::vector<int> indices;
    std::vector<double> weights;  // importance-sampling weights, max-normalized
  };
  /// Stratified proportional sampling of n transitions.
  Batch sample(int n, double beta, Rng& rng) const;

  void update_priority(int idx, double priority);
  double priority_of(int idx) const;

 private:
  void set_weight(int idx, double p_alpha);
  double total() const { return tree_[1]; }

  int capacity_ = 0;
  int tree_base_ = 1;
  double alpha_ = 0.6;
  double max_priority_ = 1.0;
  int size_ = 0;
  int next_ = 0;
  std::vector<Transition> storage_;
  std::vector<double> tree_;       // 1-indexed binary sum tree over p^alpha
  std::vector<double> priority_;   // raw priorities
};

}  // namespace cforge
