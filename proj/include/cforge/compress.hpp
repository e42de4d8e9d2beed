#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cforge/dataset.hpp"
#include "cforge/model.hpp"
#include "cforge/tensor.hpp"

namespace cforge {

enum class Technique {
  sensitivity = 0,
  level,
  splicing,
  l1_ranked,
  l2_ranked,
  bernoulli,
  fm_reconstruction,
};
constexpr int kTechniqueCount = 7;

const char* technique_name(Technique t);
Technique technique_from_name(const std::string& name);

/// Coarse techniques remove whole structures (filters/channels/rows); the
/// energy model treats them with the structured reduction coefficients.
bool technique_is_coarse(Technique t);

enum class StructuredPattern { filter, channel, row };

struct CompressionAction {
  int layer = 0;
  Technique technique = Technique::level;
  double sparsity = 0.0;  // S
  int bits = 8;           // Q shared by weights and activations
};

/// Per-layer action list plus junction-imposed mask links filled in by
/// resolve_dependencies (src layer's filter mask is copied onto dst).
struct CompressionPlan {
  std::vector<CompressionAction> actions;
  struct FilterLink {
    int src = 0;
    int dst = 0;
  };
  std::vector<FilterLink> filter_links;
  bool resolved = false;
};

enum class MaskGranularity { element, filter, channel };

struct PruningMask {
  int layer = 0;
  MaskGranularity granularity = MaskGranularity::element;
  // element: one flag per weight; filter/channel: one flag per unit
  std::vector<std::uint8_t> keep;

  i64 kept() const;
  i64 pruned() const { return static_cast<i64>(keep.size()) - kept(); }
};

// ---- pruning algorithms -------------------------------------------------

/// Magnitude pruning: masks the floor(S*P) smallest |w|, ties to the lower
/// flat index.
PruningMask prune_level(const Tensor& w, double sparsity);

/// Saliency pruning: ranks |w * dL/dw| on a calibration batch; falls back to
/// |w| when the layer gradient is identically zero.
PruningMask prune_sensitivity(const ModelGraph& model, const std::vector<Tensor>& calib_inputs,
                              const std::vector<int>& calib_labels, int layer, double sparsity);

/// One-shot adaptation of splicing: two thresholds around the level
/// threshold; elements inside the band keep their previous state, and the
/// mask is then adjusted to hit the exact target count. Without a previous
/// mask this collapses to level pruning.
PruningMask prune_splicing(const Tensor& w, double sparsity, double band = 0.1,
                           const std::vector<std::uint8_t>* previous = nullptr);

PruningMask prune_l1_ranked(const Tensor& w, const LayerDescriptor& d, double sparsity,
                            StructuredPattern pattern);
PruningMask prune_l2_ranked(const Tensor& w, const LayerDescriptor& d, double sparsity,
                            StructuredPattern pattern);

/// Uniformly samples floor(S*C_o) filters without replacement.
PruningMask prune_bernoulli(const LayerDescriptor& d, double sparsity, u64 seed);

struct FmReconstruction {
  PruningMask mask;  // channel granularity
  Tensor weights;    // refit weights (dropped channels zeroed)
  bool refit_applied = false;
  double reconstruction_error = 0.0;
};

/// Greedy input-channel selection minimizing feature-map reconstruction
/// error on the calibration batch, followed by one least-squares refit of
/// the surviving weights.
FmReconstruction prune_fm_reconstruction(const ModelGraph& model,
                                         const std::vector<Tensor>& calib_inputs, int layer,
                                         double sparsity);

// ---- quantization -------------------------------------------------------

/// Laplace clip multiplier for Q in [2,8].
double laplace_clip_multiplier(int bits);

struct QuantParams {
  int bits = 8;
  std::vector<double> scale;   // per output channel, > 0
  std::vector<double> offset;  // grid anchor (channel min)
  std::vector<int> zero_point;
  std::vector<std::uint8_t> degenerate;  // max == min: pass-through channel
};

struct ActQuantParams {
  int bits = 8;
  bool enabled = false;
  double mean = 0.0;
  double laplace_b = 0.0;  // mean |a - mu|
  double clip = 0.0;       // alpha = lambda(Q) * b
  double scale = 1.0;
  double offset = 0.0;
};

/// Per-output-channel asymmetric affine parameters over [min,max] of the
/// kept weights of each channel.
QuantParams weight_quant_params(const Tensor& w, const LayerDescriptor& d, int bits,
                                const std::vector<std::uint8_t>* weight_keep = nullptr);

/// Quantize-then-dequantize in float; masked (zero) positions stay exact.
void fake_quantize_weights(Tensor& w, const LayerDescriptor& d, const QuantParams& qp,
                           const std::vector<std::uint8_t>* weight_keep = nullptr);

ActQuantParams activation_quant_params(const std::vector<const Tensor*>& calib_activations,
                                       int bits);
void fake_quantize_activations(Tensor& x, const ActQuantParams& qp);

real fake_quantize_value(real x, const ActQuantParams& qp);

// ---- plan application ---------------------------------------------------

CompressionPlan resolve_dependencies(const ModelGraph& model, CompressionPlan plan);

struct LayerCompression {
  std::vector<std::uint8_t> weight_keep;  // final merged, one flag per weight
  std::vector<std::uint8_t> out_keep;     // per output unit (filter/row masks)
  std::vector<std::uint8_t> in_keep;      // per input channel/column masks
  double achieved_sparsity = 0.0;
  bool coarse = false;
  int bits = 8;
};

struct CompressedModel {
  ModelGraph graph;  // weights masked and fake-quantized
  std::vector<LayerCompression> layers;
  std::vector<QuantParams> weight_quant;
  std::vector<ActQuantParams> act_quant;

  InputHook act_hook() const;
  double out_survival(int layer) const;
};

struct ApplyOptions {
  bool quantize = true;
  u64 seed = 0;  // drives Bernoulli sampling per layer
};

/// Applies a resolved plan: pruning first (layer order, then junction mask
/// links), then per-channel weight quantization and activation calibration
/// on the pruned model.
CompressedModel apply_plan(const ModelGraph& model, const CompressionPlan& plan,
                           const std::vector<Tensor>& calib_inputs,
                           const std::vector<int>& calib_labels, const ApplyOptions& opts);

/// (S, Q) from the two continuous agent outputs: S = a_s * s_cap,
/// Q = round(2 + 6 a_q).
std::pair<double, int> map_actions(double a_s, double a_q, double s_cap);

Technique technique_from_unit(double gene);

// CompressionPlan JSON (list of {layer, technique, sparsity, bits})
std::string plan_to_json(const CompressionPlan& plan);
CompressionPlan plan_from_json(const std::string& text);

}  // namespace cforge
