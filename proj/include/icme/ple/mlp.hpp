#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace icme::ple {

enum class Activation { kRelu, kTanh };
enum class Optimizer { kAdam, kSgd };

/// Fully connected network with an identity output unit, trained on
///   0.5 * mean((f(x) - y)^2) + 0.5 * alpha * sum(W^2) / n
/// (weights only, biases unpenalised) with Adam or Nesterov-momentum SGD.
template <typename Scalar>
class MlpNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  struct Layer {
    Matrix weights;  // fan_in x fan_out
    RowVector bias;
  };

  MlpNet() = default;
  explicit MlpNet(Activation a) : activation_(a) {}

  Activation activation() const { return activation_; }

  /// Glorot-uniform initialisation for weights and biases.
  template <typename Rng>
  void init(Eigen::Index inputs, const std::vector<Eigen::Index>& hidden, Rng& rng) {
    layers_.clear();
    Eigen::Index fan_in = inputs;
    std::vector<Eigen::Index> sizes = hidden;
    sizes.push_back(1);
    for (Eigen::Index fan_out : sizes) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> u(-bound, bound);
      Layer l{Matrix(fan_in, fan_out), RowVector(fan_out)};
      for (Eigen::Index k = 0; k < l.weights.size(); ++k) l.weights.data()[k] = static_cast<Scalar>(u(rng));
      for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = static_cast<Scalar>(u(rng));
      layers_.push_back(std::move(l));
      fan_in = fan_out;
    }
    reset_optimizer();
  }

  bool initialised() const { return !layers_.empty(); }
  Eigen::Index inputs() const { return layers_.empty() ? 0 : layers_.front().weights.rows(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Vector predict(const Matrix& X) const {
    Matrix a = X;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = a * layers_[l].weights;
      z.rowwise() += layers_[l].bias;
      a = (l + 1 < layers_.size()) ? activate(z) : z;
    }
    return a.col(0);
  }

  /// Objective on a batch; fills `grads` (same shapes as layers) when given.
  Scalar loss(const Matrix& X, const Vector& y, Scalar alpha, std::vector<Layer>* grads = nullptr) const {
    const auto n = static_cast<Scalar>(X.rows());
    std::vector<Matrix> acts{X};
    acts.reserve(layers_.size() + 1);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = acts.back() * layers_[l].weights;
      z.rowwise() += layers_[l].bias;
      acts.push_back((l + 1 < layers_.size()) ? activate(z) : z);
    }
    const Vector residual = acts.back().col(0) - y;
    Scalar penalty = 0;
    for (const auto& l : layers_) penalty += l.weights.squaredNorm();
    const Scalar value = Scalar(0.5) * residual.squaredNorm() / n + Scalar(0.5) * alpha * penalty / n;
    if (!grads) return value;

    grads->resize(layers_.size());
    Matrix delta = residual / n;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      (*grads)[l].weights = acts[l].transpose() * delta + (alpha / n) * layers_[l].weights;
      (*grads)[l].bias = delta.colwise().sum();
      if (l > 0) {
        delta = (delta * layers_[l].weights.transpose()).cwiseProduct(derivative(acts[l]));
      }
    }
    return value;
  }

  void reset_optimizer() {
    step_ = 0;
    m_.clear();
    v_.clear();
    for (const auto& l : layers_) {
      m_.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), RowVector::Zero(l.bias.size())});
      v_.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), RowVector::Zero(l.bias.size())});
    }
  }

  /// Mini-batch training for `epochs` passes, continuing from the current
  /// parameters and optimiser state.
  template <typename Rng>
  void train(const Matrix& X, const Vector& y, Scalar alpha, Scalar learning_rate, int epochs,
             Eigen::Index batch_size, Rng& rng, Optimizer optimizer = Optimizer::kAdam) {
    if (X.rows() != y.size()) throw std::invalid_argument("X/y size mismatch");
    const Eigen::Index n = X.rows();
    if (n == 0) return;
    const Eigen::Index batch = std::min(std::max<Eigen::Index>(1, batch_size), n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
    std::vector<Layer> grads;
    Matrix xb;
    Vector yb;
    constexpr Scalar beta1 = Scalar(0.9), beta2 = Scalar(0.999), eps = Scalar(1e-8);
    for (int epoch = 0; epoch < epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (Eigen::Index start = 0; start < n; start += batch) {
        const Eigen::Index m = std::min(batch, n - start);
        xb.resize(m, X.cols());
        yb.resize(m);
        for (Eigen::Index r = 0; r < m; ++r) {
          xb.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
          yb[r] = y[order[static_cast<std::size_t>(start + r)]];
        }
        loss(xb, yb, alpha, &grads);
        ++step_;
        if (optimizer == Optimizer::kSgd) {
          for (std::size_t l = 0; l < layers_.size(); ++l) {
            nesterov(layers_[l].weights, m_[l].weights, grads[l].weights, learning_rate);
            nesterov(layers_[l].bias, m_[l].bias, grads[l].bias, learning_rate);
          }
          continue;
        }
        const Scalar c1 = Scalar(1) - std::pow(beta1, static_cast<Scalar>(step_));
        const Scalar c2 = Scalar(1) - std::pow(beta2, static_cast<Scalar>(step_));
        const Scalar rate = learning_rate * std::sqrt(c2) / c1;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
          adam(layers_[l].weights, m_[l].weights, v_[l].weights, grads[l].weights, rate, beta1, beta2, eps);
          adam(layers_[l].bias, m_[l].bias, v_[l].bias, grads[l].bias, rate, beta1, beta2, eps);
        }
      }
    }
  }

 private:
  Matrix activate(const Matrix& z) const {
    if (activation_ == Activation::kTanh) return z.array().tanh().matrix();
    return z.cwiseMax(Scalar(0));
  }

  /// Activation derivative expressed through the activation output.
  Matrix derivative(const Matrix& a) const {
    if (activation_ == Activation::kTanh) return (Scalar(1) - a.array().square()).matrix();
    return (a.array() > Scalar(0)).template cast<Scalar>().matrix();
  }

  template <typename M>
  static void nesterov(M& param, M& velocity, const M& g, Scalar rate) {
    constexpr Scalar momentum = Scalar(0.9);
    velocity = momentum * velocity - rate * g;
    param += momentum * velocity - rate * g;
  }

  template <typename M>
  static void adam(M& param, M& m, M& v, const M& g, Scalar rate, Scalar beta1, Scalar beta2, Scalar eps) {
    m = beta1 * m + (Scalar(1) - beta1) * g;
    v = beta2 * v + (Scalar(1) - beta2) * g.cwiseProduct(g);
    param.array() -= rate * m.array() / (v.array().sqrt() + eps);
  }

  Activation activation_ = Activation::kRelu;
  std::vector<Layer> layers_;
  std::vector<Layer> m_;
  std::vector<Layer> v_;
  long step_ = 0;
};

}  // namespace icme::ple
