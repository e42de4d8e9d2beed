#pragma once

#include <vector>

#include "cforge/model.hpp"
#include "cforge/tensor.hpp"

namespace cforge {

enum class Split { train_calib, validation, test };

struct Dataset {
  std::vector<int> sample_shape;
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::vector<Split> splits;
  int num_classes = 0;

  int size() const { return static_cast<int>(inputs.size()); }

  std::vector<int> indices_of(Split s) const;

  /// Seed-deterministic sample of `fraction` of the validation split
  /// (without replacement, at least one sample).
  std::vector<int> validation_subset(double fraction, u64 seed) const;
};

/// Top-1 accuracy over the given sample indices (all samples when `indices`
/// is empty). `hook` lets the caller fake-quantize layer inputs.
double evaluate_accuracy(const ModelGraph& model, const Dataset& data,
                         const std::vector<int>& indices = {}, const InputHook& hook = nullptr);

}  // namespace cforge
