// Builds the bundled desk-scale fixture: a 10-class oriented-grating image
// set and a 6-layer CNN (4 conv + 2 fc, one residual block, ~56k weights)
// trained on it. Outputs the standard model/dataset containers.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"

#include "cforge/dataset.hpp"
#include "cforge/io.hpp"
#include "cforge/model.hpp"
#include "cforge/rng.hpp"

using namespace cforge;

namespace {

constexpr int kImage = 16;
constexpr int kClasses = 10;

Tensor make_sample(int label, Rng& rng) {
  Tensor x({1, kImage, kImage});
  const double theta = M_PI * label / kClasses;  // orientations 18 degrees apart
  const double u = std::cos(theta), v = std::sin(theta);
  const double freq = 3.0 * rng.uniform(0.9, 1.1);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double amp = rng.uniform(0.7, 1.0);
  for (int i = 0; i < kImage; ++i)
    for (int j = 0; j < kImage; ++j) {
      const double t = 2.0 * M_PI * freq * (u * i + v * j) / kImage + phase;
      const double noise = rng.normal(0.0, 0.15);
      x.data[static_cast<size_t>(i) * kImage + j] = static_cast<real>(amp * std::sin(t) + noise);
    }
  return x;
}

Dataset make_dataset(int train, int val, int test, u64 seed) {
  Dataset ds;
  ds.sample_shape = {1, kImage, kImage};
  ds.num_classes = kClasses;
  Rng rng(seed);
  auto emit = [&](int count, Split split) {
    for (int i = 0; i < count; ++i) {
      const int label = i % kClasses;
      ds.inputs.push_back(make_sample(label, rng));
      ds.labels.push_back(label);
      ds.splits.push_back(split);
    }
  };
  emit(train, Split::train_calib);
  emit(val, Split::validation);
  emit(test, Split::test);
  return ds;
}

ModelGraph make_net(u64 seed) {
  ModelGraph m;
  auto conv = [](int idx, int ci, int co, int hin, int win, int k, int s, int p) {
    LayerDescriptor d;
    d.index = idx;
    d.kind = LayerKind::conv;
    d.c_in = ci;
    d.c_out = co;
    d.h_in = hin;
    d.w_in = win;
    d.k = k;
    d.stride = s;
    d.pad = p;
    return d;
  };
  auto fc = [](int idx, int m_in, int n_out, int hin, int win) {
    LayerDescriptor d;
    d.index = idx;
    d.kind = LayerKind::fc;
    d.m_in = m_in;
    d.n_out = n_out;
    d.h_in = hin;
    d.w_in = win;
    d.k = 1;
    return d;
  };
  m.layers = {conv(0, 1, 16, 16, 16, 3, 1, 0),  // -> 16x14x14
              conv(1, 16, 24, 14, 14, 3, 2, 0), // -> 24x6x6
              conv(2, 24, 24, 6, 6, 3, 1, 1),   // -> 24x6x6
              conv(3, 24, 24, 6, 6, 3, 1, 1),   // -> 24x6x6
              fc(4, 24 * 6 * 6, 48, 6, 6),
              fc(5, 48, 10, 1, 1)};
  m.junctions = {{1, 4}};  // residual block over layers 2-3
  m.head_classes = 10;
  m.transition = FcTransition::flatten;

  Rng rng(seed);
  for (const auto& d : m.layers) {
    Tensor w(d.weight_shape());
    const int fan_in = d.kind == LayerKind::conv ? d.c_in * d.k * d.k : d.m_in;
    const double stddev = std::sqrt(2.0 / fan_in);
    for (auto& v : w.data) v = static_cast<real>(rng.normal(0.0, stddev));
    m.weights.push_back(std::move(w));
    m.biases.push_back(Tensor({d.output_units()}));
  }
  m.validate();
  return m;
}

struct AdamState {
  double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  i64 t = 0;
  std::vector<Tensor> mw, vw, mb, vb;

  explicit AdamState(const ModelGraph& m, double lr_) : lr(lr_) {
    for (int i = 0; i < m.layer_count(); ++i) {
      mw.emplace_back(m.weights[static_cast<size_t>(i)].shape);
      vw.emplace_back(m.weights[static_cast<size_t>(i)].shape);
      mb.emplace_back(m.biases[static_cast<size_t>(i)].shape);
      vb.emplace_back(m.biases[static_cast<size_t>(i)].shape);
    }
  }

  void step(ModelGraph& m, const LayerGradients& g) {
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    auto upd = [&](Tensor& p, const Tensor& gr, Tensor& mm, Tensor& vv) {
      for (i64 i = 0; i < p.numel(); ++i) {
        const double gi = static_cast<double>(gr[i]);
        mm[i] = static_cast<real>(b1 * mm[i] + (1 - b1) * gi);
        vv[i] = static_cast<real>(b2 * vv[i] + (1 - b2) * gi * gi);
        p[i] -= static_cast<real>(lr * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + eps));
      }
    };
    for (int i = 0; i < m.layer_count(); ++i) {
      upd(m.weights[static_cast<size_t>(i)], g.dw[static_cast<size_t>(i)], mw[static_cast<size_t>(i)], vw[static_cast<size_t>(i)]);
      upd(m.biases[static_cast<size_t>(i)], g.db[static_cast<size_t>(i)], mb[static_cast<size_t>(i)], vb[static_cast<size_t>(i)]);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixture dataset + model generator"};
  std::string out = "fixtures";
  u64 seed = 42;
  int epochs = 40;
  int train_n = 2000, val_n = 1000, test_n = 1000;
  double target = 0.93;
  app.add_option("--out,-o", out, "output root directory");
  app.add_option("--seed", seed, "generation seed");
  app.add_option("--epochs", epochs, "max training epochs");
  app.add_option("--target", target, "stop once validation accuracy reaches this");
  CLI11_PARSE(app, argc, argv);

  std::cout << "generating dataset (" << train_n << "/" << val_n << "/" << test_n << ")...\n";
  Dataset ds = make_dataset(train_n, val_n, test_n, seed);
  ModelGraph net = make_net(Rng::derive(seed, 1));

  const auto train_idx = ds.indices_of(Split::train_calib);
  const auto val_idx = ds.indices_of(Split::validation);
  AdamState opt(net, 1e-3);
  Rng shuffle_rng(Rng::derive(seed, 2));
  const int batch = 32;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<int> order = train_idx;
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      const size_t j = i + static_cast<size_t>(shuffle_rng.uniform_int(
                               0, static_cast<int>(order.size() - 1 - i)));
      std::swap(order[i], order[j]);
    }
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t off = 0; off + batch <= order.size(); off += batch) {
      std::vector<Tensor> inputs;
      std::vector<int> labels;
      for (int b = 0; b < batch; ++b) {
        inputs.push_back(ds.inputs[static_cast<size_t>(order[off + static_cast<size_t>(b)])]);
        labels.push_back(ds.labels[static_cast<size_t>(order[off + static_cast<size_t>(b)])]);
      }
      double loss = 0.0;
      LayerGradients g = loss_gradients(net, inputs, labels, &loss);
      opt.step(net, g);
      loss_sum += loss;
      ++batches;
    }
    const double val_acc = evaluate_accuracy(net, ds, val_idx);
    std::cout << "epoch " << epoch << ": loss " << loss_sum / batches << ", val acc " << val_acc
              << "\n";
    if (val_acc >= target) break;
  }

  const double val_acc = evaluate_accuracy(net, ds, val_idx);
  const double test_acc = evaluate_accuracy(net, ds, ds.indices_of(Split::test));
  std::cout << "final: val " << val_acc << ", test " << test_acc << "\n";
  if (val_acc < 0.9) {
    std::cerr << "error: fixture training did not reach 90% validation accuracy\n";
    return 1;
  }

  save_model(out + "/model", net);
  save_dataset(out + "/dataset", ds);
  std::cout << "fixture written to " << out << "/{model,dataset}\n";
  return 0;
}
