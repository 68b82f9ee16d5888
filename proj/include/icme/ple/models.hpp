#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "icme/genotype.hpp"
#include "icme/ple/history.hpp"
#include "icme/ple/mlp.hpp"

namespace icme::ple {

/// Average selection count per occupied bin over the window:
/// L = (1 / k_eff) * sum_t Y^t. Never-selected bins score 0; an empty
/// history gives uniform logits.
PreferenceLogits tabular_logits(const SelectionHistory& h, const std::vector<BinIndex>& occupied);

/// L = delta * (sum_t Y^t * (1 - lambda) + sum_t credits^t). Credits are the
/// backward shares stored with each record. Empty history gives uniform
/// logits.
PreferenceLogits dl_tabular_logits(const SelectionHistory& h, const std::vector<BinIndex>& occupied, double delta,
                                   double lambda);

/// One row per distinct bin seen in any snapshot of the window. Features
/// come from the most recent record containing the bin; the target is its
/// selection count divided by k_eff.
struct TrainingSet {
  std::vector<BinIndex> bins;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

TrainingSet training_set(const SelectionHistory& h);

enum class ModelKind { kNone, kTabular, kDlTabular, kLinear, kRidge, kNeural, kKnn, kKrrLinear, kKrrRbf };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);
bool is_regression(ModelKind k);

/// Model hyperparameters; each model reads only its own fields.
struct ModelParams {
  // Ridge.
  double ridge_alpha = 1.0;
  /// "gd" (iterative gradient descent), "svd" or "cholesky" (closed forms).
  std::string ridge_solver = "gd";
  // Neural network.
  std::vector<Eigen::Index> hidden{200, 200};
  Activation activation = Activation::kRelu;
  Optimizer optimizer = Optimizer::kAdam;
  double nn_alpha = 1e-3;
  double learning_rate = 1e-3;
  int epochs = 20;
  /// Mini-batch size, capped at the number of training rows.
  Eigen::Index batch_size = 200;
  // kNN.
  int knn_k = 5;
  // Kernel ridge.
  double krr_alpha = 1.0;
  double krr_gamma = 0.0;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static ModelParams from_json(const nlohmann::json& j);
};

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) = 0;
  /// Raw predictions (unclamped).
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
  /// Parameters carried from one fit to the next; null for models that
  /// refit from scratch.
  virtual nlohmann::json state_json() const { return nullptr; }
  virtual void load_state(const nlohmann::json&) {}
};

/// Ordinary least squares with an intercept (minimum-norm solution when
/// rank deficient).
class LinearRegression final : public Regressor {
 public:
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  const Eigen::VectorXd& coef() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  Eigen::VectorXd coef_;
  double intercept_ = 0.0;
};

/// min_w,b ||y - Xw - b||^2 + alpha ||w||^2 by full-batch gradient descent
/// on centred data. The step is 1/L for the Lipschitz constant L of the
/// gradient; iteration stops once the gradient norm drops below `tolerance`.
class RidgeRegression final : public Regressor {
 public:
  struct Options {
    double alpha = 1.0;
    enum class Solver { kGradientDescent, kSvd, kCholesky } solver = Solver::kGradientDescent;
    double tolerance = 1e-12;
    int max_iterations = 200000;
  };

  RidgeRegression() = default;
  explicit RidgeRegression(Options o) : options_(o) {}
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  const Eigen::VectorXd& coef() const { return coef_; }
  double intercept() const { return intercept_; }
  int iterations() const { return iterations_; }

 private:
  Options options_;
  Eigen::VectorXd coef_;
  double intercept_ = 0.0;
  int iterations_ = 0;
};

/// Feed-forward regressor (two ReLU layers of 200 and Adam by default).
/// Later fits start from the previous weights while the input width is
/// unchanged; optimiser moments restart with every fit.
class NeuralRegression final : public Regressor {
 public:
  struct Options {
    std::vector<Eigen::Index> hidden{200, 200};
    Activation activation = Activation::kRelu;
    Optimizer optimizer = Optimizer::kAdam;
    double alpha = 1e-3;
    double learning_rate = 1e-3;
    int epochs = 20;
    Eigen::Index batch_size = 200;
  };

  NeuralRegression() = default;
  explicit NeuralRegression(Options o) : options_(std::move(o)), net_(options_.activation) {}
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  const MlpNet<float>& net() const { return net_; }
  int fits() const { return fits_; }
  nlohmann::json state_json() const override;
  void load_state(const nlohmann::json& j) override;

 private:
  Options options_;
  MlpNet<float> net_;
  int fits_ = 0;
};

/// Inverse-distance weighted k nearest neighbours (Euclidean). A query that
/// coincides with training points returns the mean of their targets.
class KnnRegression final : public Regressor {
 public:
  explicit KnnRegression(int k = 5) : k_(k) {}
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;

 private:
  int k_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
};

/// Kernel ridge regression: (K + alpha I) a = y, f(x) = k(x, X) a.
class KernelRidge final : public Regressor {
 public:
  enum class Kernel { kLinear, kRbf };
  /// gamma <= 0 selects 1 / n_features for the RBF kernel.
  explicit KernelRidge(Kernel kernel, double alpha = 1.0, double gamma = 0.0)
      : kernel_(kernel), alpha_(alpha), gamma_(gamma) {}
  void fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;

 private:
  Eigen::MatrixXd gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;

  Kernel kernel_;
  double alpha_;
  double gamma_;
  double effective_gamma_ = 1.0;
  Eigen::MatrixXd X_;
  Eigen::VectorXd dual_;
};

/// Fresh regressor for a regression model kind (nullptr otherwise).
std::unique_ptr<Regressor> make_regressor(ModelKind kind, const ModelParams& params = {});

/// Fits `model` on the history's training set. Returns false (leaving the
/// model untouched) when the training set is empty.
bool fit_regressor(Regressor& model, const SelectionHistory& h, Rng& rng);

/// Clamped predictions for the given occupied bins and their feature rows.
PreferenceLogits regression_logits(const Regressor& model, const std::vector<BinIndex>& occupied,
                                   const Eigen::MatrixXd& features);

}  // namespace icme::ple
