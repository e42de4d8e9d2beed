#include "doctest.h"

#include <cmath>

#include "cforge/dataset.hpp"
#include "cforge/model.hpp"
#include "oracles.hpp"

using namespace cforge;
using oracles::conv_desc;
using oracles::fc_desc;

TEST_CASE("conv2d: 1x1 identity kernel passes input through") {
  auto d = conv_desc(0, 2, 2, 3, 3, 1, 1, 0);
  Tensor w({2, 2, 1, 1});
  w.data = {1, 0, 0, 1};  // identity channel mixing
  Tensor b({2});
  Tensor x({2, 3, 3});
  for (i64 i = 0; i < x.numel(); ++i) x[i] = static_cast<real>(i) * real(0.25) - real(1);
  auto y = conv2d_forward(x, d, w, b);
  REQUIRE(y.shape == x.shape);
  for (i64 i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-7));
}

TEST_CASE("conv2d: all-zero weights give all-zero output") {
  auto d = conv_desc(0, 3, 4, 5, 5, 3, 1, 0);
  Tensor w(d.weight_shape());
  Tensor b({4});
  Tensor x({3, 5, 5});
  Rng rng(7);
  oracles::fill_random(x, rng);
  auto y = conv2d_forward(x, d, w, b);
  for (real v : y.data) CHECK(v == real(0));
}

TEST_CASE("conv2d matches the direct nested-loop reference") {
  Rng rng(42);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = trial % 2 ? 3 : 2;
    const int stride = 1 + trial % 2;
    const int pad = trial % 3 == 0 ? 1 : 0;
    auto d = conv_desc(0, 1 + trial % 3, 1 + (trial + 1) % 4, 6, 7, k, stride, pad);
    Tensor x({d.c_in, d.h_in, d.w_in});
    Tensor w(d.weight_shape());
    Tensor b({d.c_out});
    oracles::fill_random(x, rng);
    oracles::fill_random(w, rng);
    oracles::fill_random(b, rng);
    auto got = conv2d_forward(x, d, w, b);
    auto want = oracles::naive_conv2d(x, d, w, b);
    REQUIRE(got.shape == want.shape);
    for (i64 i = 0; i < got.numel(); ++i)
      CHECK(static_cast<double>(got[i]) ==
            doctest::Approx(static_cast<double>(want[i])).epsilon(1e-6));
  }
}

TEST_CASE("conv2d rejects mismatched input shapes") {
  auto d = conv_desc(0, 2, 2, 4, 4, 3, 1, 0);
  Tensor w(d.weight_shape());
  Tensor b({2});
  Tensor x({3, 4, 4});
  CHECK_THROWS(conv2d_forward(x, d, w, b));
}

TEST_CASE("fc_forward: identity, zero and a hand-checked case") {
  auto d = fc_desc(0, 3, 3);
  Tensor w({3, 3});
  w.data = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Tensor b({3});
  Tensor x({3});
  x.data = {1, -2, 3};

  SUBCASE("identity weights, zero bias") {
    auto y = fc_forward(x, d, w, b);
    for (int i = 0; i < 3; ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("zero weights return the bias") {
    std::fill(w.data.begin(), w.data.end(), real(0));
    b.data = {5, 6, 7};
    auto y = fc_forward(x, d, w, b);
    CHECK(y[0] == real(5));
    CHECK(y[1] == real(6));
    CHECK(y[2] == real(7));
  }
  SUBCASE("3x4 system against manual dot products") {
    auto d2 = fc_desc(0, 4, 3);
    Tensor w2({3, 4});
    w2.data = {1, 2, 0, -1, 0.5, -0.5, 1, 1, 2, 0, 0, 3};
    Tensor b2({3});
    b2.data = {0.1f, -0.2f, 0.0f};
    Tensor x2({4});
    x2.data = {1, -1, 2, 0.5f};
    auto y = fc_forward(x2, d2, w2, b2);
    CHECK(y[0] == doctest::Approx(1 - 2 + 0 - 0.5 + 0.1));
    CHECK(y[1] == doctest::Approx(0.5 + 0.5 + 2 + 0.5 - 0.2));
    CHECK(y[2] == doctest::Approx(2 + 1.5));
  }
  SUBCASE("length mismatch throws") {
    Tensor bad({4});
    CHECK_THROWS(fc_forward(bad, d, w, b));
  }
}

TEST_CASE("model_forward: single conv layer equals conv2d_forward") {
  ModelGraph m;
  m.layers = {conv_desc(0, 1, 2, 4, 4, 3, 1, 0)};
  Tensor w(m.layers[0].weight_shape());
  Rng rng(3);
  oracles::fill_random(w, rng);
  m.weights = {w};
  m.biases = {Tensor({2})};
  m.head_classes = 2;  // logits straight from the conv? head must be fc-like
  // single-layer model: treat conv output as logits via its 2 channels on 2x2
  // -> instead check against conv2d_forward directly
  Tensor x({1, 4, 4});
  oracles::fill_random(x, rng);
  // validate() requires head == output units, conv c_out = 2
  m.head_classes = 2;
  auto direct = conv2d_forward(x, m.layers[0], m.weights[0], m.biases[0]);
  auto logits = model_forward(m, x);
  REQUIRE(logits.numel() == direct.numel());
  for (i64 i = 0; i < direct.numel(); ++i) CHECK(logits[i] == direct[i]);
}

TEST_CASE("model_forward: residual block with a zero second conv returns the shortcut") {
  auto m = oracles::residual_toy(11);
  std::fill(m.weights[2].data.begin(), m.weights[2].data.end(), real(0));
  std::fill(m.biases[2].data.begin(), m.biases[2].data.end(), real(0));
  Tensor x({1, 5, 5});
  Rng rng(5);
  oracles::fill_random(x, rng);

  // shortcut branch alone: run layers 0 then the head on out0
  ForwardTrace tr = model_forward_traced(m, x);
  const Tensor& shortcut = tr.out[0];
  // block output is zero, so the junction add gives relu(0 + out0) = out0
  for (i64 i = 0; i < shortcut.numel(); ++i) CHECK(tr.out[2][i] == shortcut[i]);
}

TEST_CASE("model_forward: 3-layer toy equals composed per-layer calls") {
  auto m = oracles::toy_model(19);
  Tensor x({1, 6, 6});
  Rng rng(6);
  oracles::fill_random(x, rng);

  auto relu = [](Tensor t) {
    for (auto& v : t.data) v = v > real(0) ? v : real(0);
    return t;
  };
  Tensor a0 = relu(conv2d_forward(x, m.layers[0], m.weights[0], m.biases[0]));
  Tensor a1 = relu(conv2d_forward(a0, m.layers[1], m.weights[1], m.biases[1]));
  Tensor flat({m.layers[2].m_in});
  flat.data = a1.data;
  Tensor logits = fc_forward(flat, m.layers[2], m.weights[2], m.biases[2]);

  Tensor got = model_forward(m, x);
  REQUIRE(got.numel() == logits.numel());
  for (i64 i = 0; i < got.numel(); ++i) CHECK(got[i] == logits[i]);
}

TEST_CASE("model_forward is bitwise deterministic") {
  auto m = oracles::residual_toy(23);
  Tensor x({1, 5, 5});
  Rng rng(9);
  oracles::fill_random(x, rng);
  auto a = model_forward(m, x);
  auto b = model_forward(m, x);
  for (i64 i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("model validate rejects dangling junctions and bad shapes") {
  auto m = oracles::residual_toy(29);
  SUBCASE("junction out of range") {
    m.junctions[0].consumer = 9;
    CHECK_THROWS(m.validate());
  }
  SUBCASE("junction shape mismatch") {
    m.junctions[0].producer = 0;
    m.layers[0].c_out = 3;  // breaks weight shape agreement too
    CHECK_THROWS(m.validate());
  }
}

TEST_CASE("evaluate_accuracy") {
  auto m = oracles::toy_model(31);
  Dataset ds;
  ds.sample_shape = {1, 6, 6};
  ds.num_classes = 4;
  Rng rng(17);
  for (int i = 0; i < 48; ++i) {
    Tensor x({1, 6, 6});
    oracles::fill_random(x, rng);
    ds.inputs.push_back(x);
    auto logits = model_forward(m, x);
    int best = 0;
    for (i64 c = 1; c < logits.numel(); ++c)
      if (logits[c] > logits[best]) best = static_cast<int>(c);
    ds.labels.push_back(best);
    ds.splits.push_back(Split::validation);
  }

  SUBCASE("labels equal to argmax give accuracy 1") {
    CHECK(evaluate_accuracy(m, ds) == doctest::Approx(1.0));
  }
  SUBCASE("shifted labels give accuracy below 1") {
    for (auto& l : ds.labels) l = (l + 1) % 4;
    CHECK(evaluate_accuracy(m, ds) < 1.0);
  }
  SUBCASE("empty dataset throws") {
    Dataset empty;
    CHECK_THROWS(evaluate_accuracy(m, empty));
  }
  SUBCASE("subset evaluation is deterministic") {
    auto idx = ds.validation_subset(0.25, 99);
    auto idx2 = ds.validation_subset(0.25, 99);
    CHECK(idx == idx2);
    CHECK(idx.size() == 12);
    const double a = evaluate_accuracy(m, ds, idx);
    CHECK(a == evaluate_accuracy(m, ds, idx));
  }
}

TEST_CASE("random logits on a balanced set land near chance level") {
  // a fresh random model scores ~1/classes on balanced random labels; the
  // binomial 4-sigma band around 0.25 for n=400 is about +/- 0.087
  auto m = oracles::toy_model(37);
  Dataset ds;
  ds.sample_shape = {1, 6, 6};
  ds.num_classes = 4;
  Rng rng(21);
  for (int i = 0; i < 400; ++i) {
    Tensor x({1, 6, 6});
    oracles::fill_random(x, rng);
    ds.inputs.push_back(x);
    ds.labels.push_back(i % 4);
    ds.splits.push_back(Split::validation);
  }
  const double acc = evaluate_accuracy(m, ds);
  CHECK(acc > 0.25 - 0.0875);
  CHECK(acc < 0.25 + 0.0875);
}

TEST_CASE("loss_gradients: zero-weight final fc under uniform softmax") {
  // with W = 0, b = 0 the logits are zero, softmax is uniform, and the bias
  // gradient of the head is (1/C - onehot)/batch averaged over samples
  auto m = oracles::toy_model(41);
  std::fill(m.weights[2].data.begin(), m.weights[2].data.end(), real(0));
  std::fill(m.biases[2].data.begin(), m.biases[2].data.end(), real(0));
  Rng rng(3);
  std::vector<Tensor> xs;
  std::vector<int> ys;
  for (int i = 0; i < 4; ++i) {
    Tensor x({1, 6, 6});
    oracles::fill_random(x, rng);
    xs.push_back(x);
    ys.push_back(i % 4);
  }
  auto g = loss_gradients(m, xs, ys);
  for (int c = 0; c < 4; ++c) {
    double expect = 0.0;
    for (int s = 0; s < 4; ++s) expect += (0.25 - (ys[static_cast<size_t>(s)] == c ? 1.0 : 0.0)) / 4.0;
    CHECK(static_cast<double>(g.db[2][c]) == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("loss_gradients: duplicated sample batch equals single-sample gradient") {
  auto m = oracles::toy_model(43);
  Rng rng(8);
  Tensor x({1, 6, 6});
  oracles::fill_random(x, rng);
  auto g1 = loss_gradients(m, {x}, {2});
  auto g4 = loss_gradients(m, {x, x, x, x}, {2, 2, 2, 2});
  for (int t = 0; t < m.layer_count(); ++t)
    for (i64 i = 0; i < g1.dw[static_cast<size_t>(t)].numel(); ++i)
      CHECK(static_cast<double>(g4.dw[static_cast<size_t>(t)][i]) ==
            doctest::Approx(static_cast<double>(g1.dw[static_cast<size_t>(t)][i])).epsilon(1e-5));
}
