#pragma once

#include <functional>
#include <vector>

#include "cforge/tensor.hpp"
#include "cforge/types.hpp"

namespace cforge {

enum class LayerKind { conv, fc };

/// Static description of one layer. Weight layout: conv [C_o][C_in][k][k],
/// fc [N][M], both row-major. `pad` is symmetric zero padding (conv only).
struct LayerDescriptor {
  int index = 0;
  LayerKind kind = LayerKind::conv;

  int c_in = 0, c_out = 0;
  int h_in = 0, w_in = 0;
  int k = 1, stride = 1, pad = 0;

  int n_out = 0, m_in = 0;  // fc: W is n_out x m_in

  int h_out() const { return kind == LayerKind::conv ? (h_in + 2 * pad - k) / stride + 1 : 1; }
  int w_out() const { return kind == LayerKind::conv ? (w_in + 2 * pad - k) / stride + 1 : 1; }

  // P_t: weight parameter count (biases excluded throughout).
  i64 param_count() const {
    return kind == LayerKind::conv ? i64(c_out) * c_in * k * k : i64(n_out) * m_in;
  }
  // M_t = P_t * q_b, q_b = 32 for the dense float model.
  i64 memory_bits(int q_bits = 32) const { return param_count() * q_bits; }

  std::vector<int> weight_shape() const {
    return kind == LayerKind::conv ? std::vector<int>{c_out, c_in, k, k}
                                   : std::vector<int>{n_out, m_in};
  }
  int output_units() const { return kind == LayerKind::conv ? c_out : n_out; }
  int input_units() const { return kind == LayerKind::conv ? c_in : m_in; }
};

/// Residual add edge: the post-activation output of `producer` is added to
/// the pre-activation output of layer `consumer - 1` (i.e. into the input of
/// `consumer`), then the activation is applied.
struct Junction {
  int producer = 0;
  int consumer = 0;
};

enum class FcTransition { flatten, global_avg_pool };

struct ModelGraph {
  std::vector<LayerDescriptor> layers;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
  std::vector<Junction> junctions;
  FcTransition transition = FcTransition::flatten;
  int head_classes = 0;

  int layer_count() const { return static_cast<int>(layers.size()); }

  // Structural checks: index order, junction shape agreement, conv-before-fc.
  void validate() const;
};

Tensor conv2d_forward(const Tensor& input, const LayerDescriptor& layer, const Tensor& w,
                      const Tensor& b);
Tensor fc_forward(const Tensor& input, const LayerDescriptor& layer, const Tensor& w,
                  const Tensor& b);

/// Optional per-layer input transform, used by the compressed-execution path
/// to fake-quantize activations. Called with the layer index and the tensor
/// that is about to be fed to that layer.
using InputHook = std::function<void(int, Tensor&)>;

/// Full forward pass to class logits. ReLU after every layer except the
/// head; junction adds happen before the activation of their consumer input.
Tensor model_forward(const ModelGraph& model, const Tensor& input,
                     const InputHook& hook = nullptr);

struct ForwardTrace {
  std::vector<Tensor> fed;   // what each layer consumed (post transition)
  std::vector<Tensor> out;   // post-activation output of each layer
  Tensor logits;
};

ForwardTrace model_forward_traced(const ModelGraph& model, const Tensor& input);

struct LayerGradients {
  std::vector<Tensor> dw;
  std::vector<Tensor> db;
};

/// Mean softmax cross-entropy over the batch; returns d loss / d params for
/// every layer. Optionally reports the loss value.
LayerGradients loss_gradients(const ModelGraph& model, const std::vector<Tensor>& inputs,
                              const std::vector<int>& labels, double* loss_out = nullptr);

}  // namespace cforge
