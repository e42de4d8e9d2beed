#include "cforge/dataset.hpp"

#include <algorithm>

#include "cforge/rng.hpp"

namespace cforge {

std::vector<int> Dataset::indices_of(Split s) const {
  std::vector<int> idx;
  for (int i = 0; i < size(); ++i)
    if (splits[i] == s) idx.push_back(i);
  return idx;
}

std::vector<int> Dataset::validation_subset(double fraction, u64 seed) const {
  auto val = indices_of(Split::validation);
  require(!val.empty(), "dataset: no validation samples");
  const int want = std::max(1, static_cast<int>(fraction * static_cast<double>(val.size())));
  Rng rng(Rng::derive(seed, 0x5b5e7ULL));
  // partial Fisher-Yates
  for (int i = 0; i < want; ++i) {
    const int j = i + rng.uniform_int(0, static_cast<int>(val.size()) - 1 - i);
    std::swap(val[i], val[j]);
  }
  val.resize(want);
  std::sort(val.begin(), val.end());
  return val;
}

double evaluate_accuracy(const ModelGraph& model, const Dataset& data,
                         const std::vector<int>& indices, const InputHook& hook) {
  require(data.size() > 0, "evaluate_accuracy: empty dataset");
  std::vector<int> all;
  const std::vector<int>* use = &indices;
  if (indices.empty()) {
    all.resize(data.size());
    for (int i = 0; i < data.size(); ++i) all[i] = i;
    use = &all;
  }
  i64 hits = 0;
  for (int i : *use) {
    Tensor logits = model_forward(model, data.inputs[i], hook);
    int best = 0;
    for (i64 c = 1; c < logits.numel(); ++c)
      if (logits[c] > logits[best]) best = static_cast<int>(c);
    if (best == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(use->size());
}

}  // namespace cforge
