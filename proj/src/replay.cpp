#include "cforge/replay.hpp"

#include <cmath>

namespace cforge {

PrioritizedReplay::PrioritizedReplay(int capacity, double alpha)
    : capacity_(capacity), alpha_(alpha) {
  require(capacity > 0, "replay: capacity must be positive");
  while (tree_base_ < capacity) tree_base_ <<= 1;
  tree_.assign(static_cast<size_t>(tree_base_) * 2, 0.0);
  priority_.assign(static_cast<size_t>(capacity), 0.0);
  storage_.resize(static_cast<size_t>(capacity));
}

void PrioritizedReplay::set_weight(int idx, double p_alpha) {
  int node = tree_base_ + idx;
  tree_[static_cast<size_t>(node)] = p_alpha;
  for (node >>= 1; node >= 1; node >>= 1)
    tree_[static_cast<size_t>(node)] =
        tree_[static_cast<size_t>(node) * 2] + tree_[static_cast<size_t>(node) * 2 + 1];
}

void PrioritizedReplay::push(Transition t) {
  const int idx = next_;
  storage_[static_cast<size_t>(idx)] = std::move(t);
  priority_[static_cast<size_t>(idx)] = max_priority_;
  set_weight(idx, std::pow(max_priority_, alpha_));
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

PrioritizedReplay::Batch PrioritizedReplay::sample(int n, double beta, Rng& rng) const {
  require(size_ > 0, "replay: sample from empty buffer");
  Batch b;
  b.indices.reserve(static_cast<size_t>(n));
  b.weights.reserve(static_cast<size_t>(n));
  const double mass = total();
  require(mass > 0.0, "replay: zero total priority");
  for (int i = 0; i < n; ++i) {
    // stratified draw within the i-th segment
    const double lo = mass * static_cast<double>(i) / n;
    const double hi = mass * static_cast<double>(i + 1) / n;
    double u = rng.uniform(lo, hi);
    int node = 1;
    while (node < tree_base_) {
      const int left = node * 2;
      if (u <= tree_[static_cast<size_t>(left)] ||
          tree_[static_cast<size_t>(left + 1)] <= 0.0) {
        node = left;
        u = std::min(u, tree_[static_cast<size_t>(left)]);
      } else {
        u -= tree_[static_cast<size_t>(left)];
        node = left + 1;
      }
    }
    int idx = node - tree_base_;
    if (idx >= size_) idx = size_ - 1;  // guard against fp edge on the last segment
    b.indices.push_back(idx);
  }
  double wmax = 0.0;
  for (int idx : b.indices) {
    const double p = tree_[static_cast<size_t>(tree_base_ + idx)] / mass;
    const double w = std::pow(static_cast<double>(size_) * std::max(p, 1e-300), -beta);
    b.weights.push_back(w);
    wmax = std::max(wmax, w);
  }
  if (wmax > 0.0)
    for (double& w : b.weights) w /= wmax;
  return b;
}

void PrioritizedReplay::update_priority(int idx, double priority) {
  require(idx >= 0 && idx < size_, "replay: priority index out of range");
  require(priority > 0.0, "replay: priority must be positive");
  priority_[static_cast<size_t>(idx)] = priority;
  max_priority_ = std::max(max_priority_, priority);
  set_weight(idx, std::pow(priority, alpha_));
}

double PrioritizedReplay::priority_of(int idx) const {
  return priority_[static_cast<size_t>(idx)];
}

}  // namespace cforge
