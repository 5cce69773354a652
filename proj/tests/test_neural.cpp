#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fsorf/neural.hpp"

using namespace fsorf;
using Md = Mlp<double>;
using Mf = Mlp<float>;
using MatrixXd = Md::Matrix;

namespace {

double masked_loss(const Md& net, const MatrixXd& in, const MatrixXd& tgt,
                   const MatrixXd& mask) {
  const auto out = net.forward(in).output();
  const MatrixXd diff = mask.array() * (out - tgt).array();
  return diff.array().square().sum() / static_cast<double>(in.cols());
}

MlpSpec small_spec(Rng& rng) {
  MlpSpec s;
  s.input_dim = 1 + rng.uniform_int(5);
  s.hidden_dims.clear();
  const int depth = 1 + rng.uniform_int(3);
  for (int i = 0; i < depth; ++i) s.hidden_dims.push_back(1 + rng.uniform_int(6));
  s.output_dim = 1 + rng.uniform_int(3);
  return s;
}

// Fresh networks have all-zero biases, which parks dead units exactly on the
// activation kink; jitter the biases so finite differences stay clean.
void jitter_biases(Md& net, Rng& rng) {
  for (int l = 0; l < net.num_layers(); ++l)
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i)
      net.bias(l)(i) = rng.normal(0.0, 0.2);
}

// Draws an input batch whose pre-activations all sit safely away from the
// ReLU kink, keeping finite differences well-behaved.
MatrixXd safe_input(const Md& net, int batch, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    MatrixXd in(net.spec().input_dim, batch);
    for (Eigen::Index i = 0; i < in.size(); ++i)
      in(i) = rng.normal(0.0, 1.0);
    const auto p = net.forward(in);
    double closest = 1e9;
    for (std::size_t l = 0; l + 1 < p.pre.size(); ++l)
      closest = std::min(closest, p.pre[l].array().abs().minCoeff());
    if (closest > 1e-3) return in;
  }
  FAIL("could not find an input away from the activation kink");
  return MatrixXd();
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("initial weights respect the fan-in bound, biases start at zero") {
  Rng rng(5);
  MlpSpec spec;
  spec.input_dim = 16;
  spec.hidden_dims = {30, 20};
  spec.output_dim = 2;
  Mf net(spec, rng);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.weight(l).cols()));
    CHECK(static_cast<double>(net.weight(l).array().abs().maxCoeff()) <= bound);
    CHECK(net.bias(l).array().abs().maxCoeff() == 0.0f);
    // A uniform draw should fill most of the admissible interval.
    CHECK(static_cast<double>(net.weight(l).array().abs().maxCoeff()) > 0.5 * bound);
  }
  CHECK(net.num_params() == 16 * 30 + 30 + 30 * 20 + 20 + 20 * 2 + 2);
}

TEST_CASE("forward matches a hand-computed two-layer example") {
  MlpSpec spec;
  spec.input_dim = 2;
  spec.hidden_dims = {2};
  spec.output_dim = 1;
  auto net = Md::zeros(spec);
  net.weight(0) << 1.0, -1.0, 0.5, 2.0;
  net.bias(0) << 0.0, -3.0;
  net.weight(1) << 2.0, 1.0;
  net.bias(1) << 0.25;
  MatrixXd in(2, 1);
  in << 1.0, 2.0;
  // Hidden pre: (1*1 - 1*2, 0.5*1 + 2*2 - 3) = (-1, 1.5); ReLU -> (0, 1.5)
  // Output: 2*0 + 1*1.5 + 0.25 = 1.75
  const auto p = net.forward(in);
  CHECK(p.output()(0, 0) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(p.features()(0, 0) == 0.0);
  CHECK(p.features()(1, 0) == 1.5);
}

TEST_CASE("forward_one equals the matching batched column") {
  Rng rng(8);
  MlpSpec spec;
  spec.input_dim = 6;
  spec.hidden_dims = {10, 7};
  spec.output_dim = 3;
  Mf net(spec, rng);
  Mf::Matrix batch(6, 4);
  for (Eigen::Index i = 0; i < batch.size(); ++i)
    batch(i) = static_cast<float>(rng.normal());
  const auto p = net.forward(batch);
  for (int c = 0; c < 4; ++c) {
    std::vector<float> one(batch.col(c).data(), batch.col(c).data() + 6);
    const auto out = net.forward_one(one);
    // Accumulation order differs between the batched and single-column
    // kernels, so equality holds to rounding, not bitwise.
    for (int r = 0; r < 3; ++r)
      CHECK(out(r) == doctest::Approx(p.output()(r, c)).epsilon(1e-5));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(42);
  const double h = 1e-5;
  const double tol = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    Md net(small_spec(rng), rng);
    jitter_biases(net, rng);
    const int batch = 1 + rng.uniform_int(4);
    MatrixXd in = safe_input(net, batch, rng);
    MatrixXd tgt(net.spec().output_dim, batch);
    MatrixXd mask(net.spec().output_dim, batch);
    for (Eigen::Index i = 0; i < tgt.size(); ++i) {
      tgt(i) = rng.normal();
      mask(i) = rng.bernoulli(0.7) ? 1.0 : 0.0;
    }
    const auto pass = net.forward(in);
    const auto [loss, grads] = net.backward_mse(pass, tgt, mask);
    CHECK(loss == doctest::Approx(masked_loss(net, in, tgt, mask)).epsilon(1e-12));

    double worst = 0.0;
    for (int l = 0; l < net.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < net.weight(l).size(); ++i) {
        double& theta = net.weight(l)(i);
        const double keep = theta;
        theta = keep + h;
        const double up = masked_loss(net, in, tgt, mask);
        theta = keep - h;
        const double dn = masked_loss(net, in, tgt, mask);
        theta = keep;
        const double numeric = (up - dn) / (2.0 * h);
        const double analytic = grads.w[l](i);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
      }
      for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) {
        double& theta = net.bias(l)(i);
        const double keep = theta;
        theta = keep + h;
        const double up = masked_loss(net, in, tgt, mask);
        theta = keep - h;
        const double dn = masked_loss(net, in, tgt, mask);
        theta = keep;
        const double numeric = (up - dn) / (2.0 * h);
        const double rel = std::abs(grads.b[l](i) - numeric) /
                           std::max({std::abs(grads.b[l](i)), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
      }
    }
    CHECK(worst <= tol);
  }
}

TEST_CASE("mask removes a unit's contribution entirely") {
  Rng rng(3);
  MlpSpec spec;
  spec.input_dim = 4;
  spec.hidden_dims = {6};
  spec.output_dim = 2;
  Md net(spec, rng);
  jitter_biases(net, rng);
  MatrixXd in = safe_input(net, 3, rng);
  MatrixXd tgt = MatrixXd::Zero(2, 3);
  MatrixXd mask = MatrixXd::Zero(2, 3);
  mask(0, 0) = 1.0;  // only one output of one sample is scored
  const auto pass = net.forward(in);
  const auto [loss, grads] = net.backward_mse(pass, tgt, mask);
  const double o = pass.output()(0, 0);
  CHECK(loss == doctest::Approx(o * o / 3.0).epsilon(1e-12));
  // Final-layer rows feeding only the masked-out output must have zero grad.
  CHECK(grads.w.back().row(1).array().abs().maxCoeff() == 0.0);
  CHECK(grads.b.back()(1) == 0.0);
}

TEST_CASE("sgd step applies exactly theta minus lr times gradient") {
  Rng rng(9);
  MlpSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {4};
  spec.output_dim = 2;
  Md net(spec, rng);
  Md before(spec, rng);
  before.copy_weights_from(net);
  MatrixXd in = safe_input(net, 2, rng);
  MatrixXd tgt = MatrixXd::Ones(2, 2);
  MatrixXd mask = MatrixXd::Ones(2, 2);
  const auto [loss, grads] = net.backward_mse(net.forward(in), tgt, mask);
  net.sgd_step(grads, 0.1);
  for (int l = 0; l < net.num_layers(); ++l) {
    const MatrixXd expect = before.weight(l) - 0.1 * grads.w[l];
    CHECK((net.weight(l) - expect).array().abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("first adam step moves each parameter by about lr") {
  // With fresh moments, m-hat = g and v-hat = g^2, so the update is
  // lr * g / (|g| + eps') ~ lr * sign(g).
  MlpSpec spec;
  spec.input_dim = 1;
  spec.hidden_dims = {};
  spec.output_dim = 1;
  auto net = Md::zeros(spec);
  net.weight(0)(0, 0) = 2.0;
  MatrixXd in = MatrixXd::Ones(1, 1);
  MatrixXd tgt = MatrixXd::Zero(1, 1);
  MatrixXd mask = MatrixXd::Ones(1, 1);
  const auto [loss, grads] = net.backward_mse(net.forward(in), tgt, mask);
  CHECK(grads.w[0](0, 0) == doctest::Approx(4.0));  // d/dw (w^2) = 2w
  net.adam_step(grads, 1e-3);
  CHECK(net.weight(0)(0, 0) == doctest::Approx(2.0 - 1e-3).epsilon(1e-6));
  CHECK(net.adam_steps() == 1);
}

TEST_CASE("adam drives a small regression problem to low loss") {
  Rng rng(14);
  MlpSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {16};
  spec.output_dim = 1;
  Mf net(spec, rng);
  // Fit y = x0 - 2 x1 + 0.5 x2 on a fixed batch.
  Mf::Matrix in(3, 64);
  Mf::Matrix tgt(1, 64);
  for (int c = 0; c < 64; ++c) {
    for (int r = 0; r < 3; ++r) in(r, c) = static_cast<float>(rng.normal());
    tgt(0, c) = in(0, c) - 2.0f * in(1, c) + 0.5f * in(2, c);
  }
  const Mf::Matrix mask = Mf::Matrix::Ones(1, 64);
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const auto [loss, grads] = net.backward_mse(net.forward(in), tgt, mask);
    if (it == 0) first = loss;
    last = loss;
    net.adam_step(grads, 1e-3);
  }
  CHECK(last < 0.01 * first);
}

TEST_CASE("weight copy synchronizes but leaves optimizer state private") {
  Rng rng(21);
  MlpSpec spec;
  spec.input_dim = 2;
  spec.hidden_dims = {3};
  spec.output_dim = 1;
  Md a(spec, rng);
  Md b(spec, rng);
  CHECK_FALSE(a.same_weights(b));
  b.copy_weights_from(a);
  CHECK(a.same_weights(b));
  CHECK(b.adam_steps() == 0);

  MlpSpec other = spec;
  other.hidden_dims = {4};
  Md c(other, rng);
  CHECK_THROWS_AS(b.copy_weights_from(c), std::invalid_argument);
  CHECK_FALSE(b.same_weights(c));
}

TEST_CASE("serialization round-trips weights bit-exactly") {
  Rng rng(33);
  MlpSpec spec;
  spec.input_dim = 5;
  spec.hidden_dims = {8, 6};
  spec.output_dim = 2;
  Mf net(spec, rng);
  std::stringstream buf;
  net.save(buf);
  const Mf back = Mf::load(buf);
  CHECK(back.same_weights(net));
  CHECK(back.spec() == spec);

  std::stringstream bad("not a network");
  CHECK_THROWS_AS(Mf::load(bad), std::runtime_error);
}

TEST_CASE("softmax is normalized, ordered, and stable for huge logits") {
  const std::vector<double> logits = {1e4, 1e4 - 1.0, 0.0};
  const auto p = softmax<double>(logits);
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[0] > p[1]);
  CHECK(p[1] > p[2]);
  CHECK(std::isfinite(p[0]));
  // exp(-1) ratio between the two leading entries
  CHECK(p[1] / p[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("boltzmann sampling frequencies follow the scaled softmax") {
  Rng rng(77);
  const std::vector<float> q = {1.0f, 0.0f};
  const auto p = softmax<double>(std::vector<double>{2.0, 0.0});  // T = 0.5
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (boltzmann_sample<float>(q, 0.5, rng) == 0) ++hits;
  CHECK(std::abs(hits / double(n) - p[0]) < 0.01);
}

TEST_CASE("low temperature concentrates on the argmax") {
  Rng rng(78);
  const std::vector<float> q = {0.3f, 0.9f};
  int hits = 0;
  for (int i = 0; i < 20000; ++i)
    if (boltzmann_sample<float>(q, 0.05, rng) == 1) ++hits;
  CHECK(hits > 19990);
  CHECK_THROWS_AS(boltzmann_sample<float>(q, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(boltzmann_sample<float>(q, -1.0, rng), std::invalid_argument);
}

TEST_CASE("shape errors are rejected loudly") {
  Rng rng(2);
  MlpSpec spec;
  spec.input_dim = 3;
  spec.hidden_dims = {4};
  spec.output_dim = 2;
  Md net(spec, rng);
  MatrixXd wrong = MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(net.forward(wrong), std::invalid_argument);
  const auto pass = net.forward(MatrixXd::Zero(3, 2));
  CHECK_THROWS_AS(net.backward(pass, MatrixXd::Zero(3, 2)), std::invalid_argument);
  CHECK_THROWS_AS(
      net.backward_mse(pass, MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 2)),
      std::invalid_argument);
  MlpSpec bad;
  CHECK_FALSE(bad.validate().empty());
  CHECK_THROWS_AS(Md(bad, rng), std::invalid_argument);

  MlpSpec linear;  // no hidden layer: features() undefined
  linear.input_dim = 2;
  linear.hidden_dims = {};
  linear.output_dim = 1;
  Md lin(linear, rng);
  const auto lp = lin.forward(MatrixXd::Zero(2, 1));
  CHECK_THROWS_AS(lp.features(), std::logic_error);
}

}  // TEST_SUITE
