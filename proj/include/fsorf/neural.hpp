#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsorf/rng.hpp"

namespace fsorf {

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden_dims = {300, 200, 100};
  int output_dim = 0;

  std::vector<std::string> validate() const {
    std::vector<std::string> errs;
    if (input_dim < 1) errs.push_back("net.input_dim must be at least 1");
    if (output_dim < 1) errs.push_back("net.output_dim must be at least 1");
    for (int h : hidden_dims)
      if (h < 1) errs.push_back("net.hidden_dims entries must be at least 1");
    return errs;
  }

  // input_dim, hidden..., output_dim
  std::vector<int> dims() const {
    std::vector<int> d;
    d.push_back(input_dim);
    d.insert(d.end(), hidden_dims.begin(), hidden_dims.end());
    d.push_back(output_dim);
    return d;
  }

  bool operator==(const MlpSpec&) const = default;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Numerically safe softmax (max-subtracted), accumulated in double.
template <typename Scalar>
std::vector<double> softmax(std::span<const Scalar> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  double m = logits[0];
  for (Scalar v : logits) m = std::max(m, static_cast<double>(v));
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

// Samples an index with probability proportional to exp(value / temperature).
template <typename Scalar>
int boltzmann_sample(std::span<const Scalar> values, double temperature, Rng& rng) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("boltzmann temperature must be positive");
  std::vector<double> scaled(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    scaled[i] = static_cast<double>(values[i]) / temperature;
  const auto p = softmax<double>(scaled);
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;  // guards rounding at u ~ 1
}

// Fully connected feedforward network: ReLU hidden layers, identity output.
// Scalar is float for training throughput and double where finite-difference
// accuracy matters (gradient verification).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // Weights drawn from U[-1/sqrt(n), 1/sqrt(n)] with n the layer fan-in;
  // biases start at zero.
  Mlp(MlpSpec spec, Rng& rng) : Mlp(std::move(spec)) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w_[l].cols()));
      for (Eigen::Index c = 0; c < w_[l].cols(); ++c)
        for (Eigen::Index r = 0; r < w_[l].rows(); ++r)
          w_[l](r, c) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
    }
  }

  static Mlp zeros(MlpSpec spec) { return Mlp(std::move(spec)); }

  // Activations cached by one batched forward pass (columns are samples).
  struct Pass {
    Matrix input;
    std::vector<Matrix> pre;  // pre-activation per layer
    std::vector<Matrix> act;  // post-ReLU per hidden layer

    const Matrix& output() const { return pre.back(); }
    // Penultimate-layer representation (last hidden activations).
    const Matrix& features() const {
      if (act.empty()) throw std::logic_error("network has no hidden layer");
      return act.back();
    }
    int batch() const { return static_cast<int>(input.cols()); }
  };

  struct Gradients {
    std::vector<Matrix> w;
    std::vector<Vector> b;
  };

  Pass forward(const Matrix& input) const {
    if (input.rows() != spec_.input_dim)
      throw std::invalid_argument("forward: input rows != input_dim");
    Pass p;
    p.input = input;
    p.pre.reserve(w_.size());
    p.act.reserve(w_.size() - 1);
    const Matrix* x = &p.input;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      Matrix z = (w_[l] * (*x)).colwise() + b_[l];
      p.pre.push_back(std::move(z));
      if (l + 1 < w_.size()) {
        p.act.push_back(p.pre.back().cwiseMax(Scalar(0)));
        x = &p.act.back();
      }
    }
    return p;
  }

  // Single-sample convenience: returns the output column.
  Vector forward_one(std::span<const Scalar> input) const {
    Matrix in(spec_.input_dim, 1);
    if (static_cast<int>(input.size()) != spec_.input_dim)
      throw std::invalid_argument("forward_one: wrong input size");
    for (int i = 0; i < spec_.input_dim; ++i) in(i, 0) = input[i];
    return forward(in).output().col(0);
  }

  // Backpropagates dL/dOutput through the cached pass. grad_output must
  // already carry any batch-mean factor; this routine only applies the chain
  // rule.
  Gradients backward(const Pass& p, const Matrix& grad_output) const {
    if (grad_output.rows() != spec_.output_dim ||
        grad_output.cols() != p.input.cols())
      throw std::invalid_argument("backward: grad_output shape mismatch");
    Gradients g;
    g.w.resize(w_.size());
    g.b.resize(w_.size());
    Matrix delta = grad_output;
    for (int l = static_cast<int>(w_.size()) - 1; l >= 0; --l) {
      const Matrix& below = l == 0 ? p.input : p.act[l - 1];
      g.w[l].noalias() = delta * below.transpose();
      g.b[l] = delta.rowwise().sum();
      if (l > 0) {
        Matrix up = w_[l].transpose() * delta;
        // ReLU gate: zero where the pre-activation was non-positive.
        delta = (p.pre[l - 1].array() > Scalar(0))
                    .select(up, Matrix::Zero(up.rows(), up.cols()));
      }
    }
    return g;
  }

  // Batch-mean squared error restricted to masked output units:
  //   L = (1/B) * sum_i sum_j mask(j,i) * (out(j,i) - target(j,i))^2
  // Returns the loss and its gradients.
  std::pair<double, Gradients> backward_mse(const Pass& p, const Matrix& target,
                                            const Matrix& mask) const {
    const Matrix& out = p.output();
    if (target.rows() != out.rows() || target.cols() != out.cols() ||
        mask.rows() != out.rows() || mask.cols() != out.cols())
      throw std::invalid_argument("backward_mse: target/mask shape mismatch");
    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(out.cols());
    Matrix diff = mask.array() * (out - target).array();
    const double loss =
        static_cast<double>(diff.array().square().sum()) * inv_b;
    Matrix grad_out = Scalar(2) * inv_b * diff;
    return {loss, backward(p, grad_out)};
  }

  void sgd_step(const Gradients& g, double lr) {
    check_grads(g);
    for (std::size_t l = 0; l < w_.size(); ++l) {
      w_[l] -= static_cast<Scalar>(lr) * g.w[l];
      b_[l] -= static_cast<Scalar>(lr) * g.b[l];
    }
  }

  void adam_step(const Gradients& g, double lr, const AdamConfig& cfg = {}) {
    check_grads(g);
    if (mw_.empty()) init_adam_state();
    ++adam_t_;
    const Scalar b1 = static_cast<Scalar>(cfg.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg.beta2);
    const Scalar eps = static_cast<Scalar>(cfg.epsilon);
    const Scalar corr1 =
        Scalar(1) - static_cast<Scalar>(std::pow(cfg.beta1, adam_t_));
    const Scalar corr2 =
        Scalar(1) - static_cast<Scalar>(std::pow(cfg.beta2, adam_t_));
    const Scalar alpha = static_cast<Scalar>(lr);
    for (std::size_t l = 0; l < w_.size(); ++l) {
      mw_[l] = b1 * mw_[l] + (Scalar(1) - b1) * g.w[l];
      vw_[l] = b2 * vw_[l].array() + (Scalar(1) - b2) * g.w[l].array().square();
      w_[l].array() -= alpha * (mw_[l].array() / corr1) /
                       ((vw_[l].array() / corr2).sqrt() + eps);
      mb_[l] = b1 * mb_[l] + (Scalar(1) - b1) * g.b[l];
      vb_[l] = b2 * vb_[l].array() + (Scalar(1) - b2) * g.b[l].array().square();
      b_[l].array() -= alpha * (mb_[l].array() / corr1) /
                       ((vb_[l].array() / corr2).sqrt() + eps);
    }
  }

  // Copies weights only; the optimizer state of this network is untouched.
  void copy_weights_from(const Mlp& other) {
    if (other.spec_ != spec_)
      throw std::invalid_argument("copy_weights_from: shape mismatch");
    w_ = other.w_;
    b_ = other.b_;
  }

  bool same_weights(const Mlp& other) const {
    if (other.spec_ != spec_) return false;
    for (std::size_t l = 0; l < w_.size(); ++l)
      if (w_[l] != other.w_[l] || b_[l] != other.b_[l]) return false;
    return true;
  }

  const MlpSpec& spec() const { return spec_; }
  int num_layers() const { return static_cast<int>(w_.size()); }
  Matrix& weight(int l) { return w_.at(l); }
  const Matrix& weight(int l) const { return w_.at(l); }
  Vector& bias(int l) { return b_.at(l); }
  const Vector& bias(int l) const { return b_.at(l); }
  long adam_steps() const { return adam_t_; }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l)
      n += static_cast<std::size_t>(w_[l].size()) + b_[l].size();
    return n;
  }

  void save(std::ostream& out) const {
    const char magic[8] = {'F', 'S', 'R', 'F', 'N', 'E', 'T', '1'};
    out.write(magic, 8);
    write_u32(out, sizeof(Scalar));
    const auto dims = spec_.dims();
    write_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (int d : dims) write_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t l = 0; l < w_.size(); ++l) {
      out.write(reinterpret_cast<const char*>(w_[l].data()),
                static_cast<std::streamsize>(sizeof(Scalar) * w_[l].size()));
      out.write(reinterpret_cast<const char*>(b_[l].data()),
                static_cast<std::streamsize>(sizeof(Scalar) * b_[l].size()));
    }
    if (!out) throw std::runtime_error("network save failed");
  }

  static Mlp load(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "FSRFNET1")
      throw std::runtime_error("network load: bad magic");
    if (read_u32(in) != sizeof(Scalar))
      throw std::runtime_error("network load: scalar width mismatch");
    const std::uint32_t ndims = read_u32(in);
    if (ndims < 2 || ndims > 64)
      throw std::runtime_error("network load: implausible layer count");
    std::vector<int> dims(ndims);
    for (auto& d : dims) d = static_cast<int>(read_u32(in));
    MlpSpec spec;
    spec.input_dim = dims.front();
    spec.output_dim = dims.back();
    spec.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
    Mlp net(std::move(spec));
    for (std::size_t l = 0; l < net.w_.size(); ++l) {
      in.read(reinterpret_cast<char*>(net.w_[l].data()),
              static_cast<std::streamsize>(sizeof(Scalar) * net.w_[l].size()));
      in.read(reinterpret_cast<char*>(net.b_[l].data()),
              static_cast<std::streamsize>(sizeof(Scalar) * net.b_[l].size()));
    }
    if (!in) throw std::runtime_error("network load: truncated stream");
    return net;
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    save(out);
  }

  static Mlp load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load(in);
  }

 private:
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    const auto errs = spec_.validate();
    if (!errs.empty()) {
      std::string msg = "invalid network shape:";
      for (const auto& e : errs) msg += "\n  " + e;
      throw std::invalid_argument(msg);
    }
    const auto d = spec_.dims();
    for (std::size_t l = 0; l + 1 < d.size(); ++l) {
      w_.push_back(Matrix::Zero(d[l + 1], d[l]));
      b_.push_back(Vector::Zero(d[l + 1]));
    }
  }

  void check_grads(const Gradients& g) const {
    if (g.w.size() != w_.size() || g.b.size() != b_.size())
      throw std::invalid_argument("gradient layer count mismatch");
  }

  void init_adam_state() {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      mw_.push_back(Matrix::Zero(w_[l].rows(), w_[l].cols()));
      vw_.push_back(Matrix::Zero(w_[l].rows(), w_[l].cols()));
      mb_.push_back(Vector::Zero(b_[l].size()));
      vb_.push_back(Vector::Zero(b_[l].size()));
    }
  }

  static void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                 static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out.write(b, 4);
  }

  static std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  }

  MlpSpec spec_;
  std::vector<Matrix> w_;
  std::vector<Vector> b_;
  std::vector<Matrix> mw_, vw_;
  std::vector<Vector> mb_, vb_;
  long adam_t_ = 0;
};

}  // namespace fsorf
