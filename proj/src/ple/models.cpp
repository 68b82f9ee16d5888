#include "icme/ple/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace icme::ple {

using Keyed = std::unordered_map<BinIndex, double, BinIndexHash>;

PreferenceLogits tabular_logits(const SelectionHistory& h, const std::vector<BinIndex>& occupied) {
  if (h.empty()) return uniform_logits(occupied);
  Keyed counts;
  for (const auto& r : h.records()) counts[r.selected] += 1.0;
  const auto k = static_cast<double>(h.effective_window());
  for (auto& [bin, v] : counts) v /= k;
  return project_onto(counts, occupied);
}

PreferenceLogits dl_tabular_logits(const SelectionHistory& h, const std::vector<BinIndex>& occupied, double delta,
                                   double lambda) {
  if (h.empty()) return uniform_logits(occupied);
  Keyed keyed;
  for (const auto& r : h.records()) {
    keyed[r.selected] += delta * (1.0 - lambda);
    for (const auto& c : r.credits) keyed[c.source] += delta * c.share;
  }
  return project_onto(keyed, occupied);
}

TrainingSet training_set(const SelectionHistory& h) {
  TrainingSet t;
  if (h.empty()) return t;
  std::map<BinIndex, std::pair<const SelectionRecord*, Eigen::Index>> latest;
  std::map<BinIndex, double> counts;
  for (const auto& r : h.records()) {
    counts[r.selected] += 1.0;
    for (std::size_t i = 0; i < r.occupied.size(); ++i) latest[r.occupied[i]] = {&r, static_cast<Eigen::Index>(i)};
  }
  const Eigen::Index cols = h.records().back().features.cols();
  const auto k = static_cast<double>(h.effective_window());
  t.X.resize(static_cast<Eigen::Index>(latest.size()), cols);
  t.y.resize(static_cast<Eigen::Index>(latest.size()));
  Eigen::Index row = 0;
  for (const auto& [bin, where] : latest) {
    const auto& [record, r] = where;
    if (record->features.cols() != cols) throw std::invalid_argument("feature width changed inside the window");
    t.bins.push_back(bin);
    t.X.row(row) = record->features.row(r);
    const auto it = counts.find(bin);
    t.y[row] = it == counts.end() ? 0.0 : it->second / k;
    ++row;
  }
  return t;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kNone: return "none";
    case ModelKind::kTabular: return "tabular";
    case ModelKind::kDlTabular: return "dl_tabular";
    case ModelKind::kLinear: return "linear";
    case ModelKind::kRidge: return "ridge";
    case ModelKind::kNeural: return "neural";
    case ModelKind::kKnn: return "knn";
    case ModelKind::kKrrLinear: return "krr_linear";
    case ModelKind::kKrrRbf: return "krr_rbf";
  }
  return "none";
}

ModelKind model_kind_from_string(std::string_view s) {
  for (auto k : {ModelKind::kNone, ModelKind::kTabular, ModelKind::kDlTabular, ModelKind::kLinear, ModelKind::kRidge,
                 ModelKind::kNeural, ModelKind::kKnn, ModelKind::kKrrLinear, ModelKind::kKrrRbf}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown model kind: " + std::string(s));
}

bool is_regression(ModelKind k) {
  return k != ModelKind::kNone && k != ModelKind::kTabular && k != ModelKind::kDlTabular;
}

namespace {

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("X/y size mismatch");
  if (X.rows() == 0) throw std::invalid_argument("empty training set");
}

}  // namespace

void LinearRegression::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng&) {
  check_training_data(X, y);
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.leftCols(X.cols()) = X;
  A.col(X.cols()).setOnes();
  const Eigen::VectorXd w = A.completeOrthogonalDecomposition().solve(y);
  coef_ = w.head(X.cols());
  intercept_ = w[X.cols()];
}

Eigen::VectorXd LinearRegression::predict(const Eigen::MatrixXd& X) const {
  return (X * coef_).array() + intercept_;
}

void RidgeRegression::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng&) {
  check_training_data(X, y);
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const auto d = X.cols();
  // Gradient of the objective: 2 (H w - g) with H = Xc'Xc + alpha I.
  Eigen::MatrixXd H = Xc.transpose() * Xc;
  H.diagonal().array() += options_.alpha;
  const Eigen::VectorXd g = Xc.transpose() * yc;
  coef_ = Eigen::VectorXd::Zero(d);
  iterations_ = 0;
  if (d > 0 && options_.solver == Options::Solver::kCholesky) {
    coef_ = H.llt().solve(g);
  } else if (d > 0 && options_.solver == Options::Solver::kSvd) {
    coef_ = H.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(g);
  } else if (d > 0) {
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly)
                                       .eigenvalues()
                                       .maxCoeff();
    const double step = 1.0 / lipschitz;
    const double scale = std::max(1.0, g.norm());
    for (; iterations_ < options_.max_iterations; ++iterations_) {
      const Eigen::VectorXd grad = 2.0 * (H * coef_ - g);
      if (grad.norm() <= options_.tolerance * scale) break;
      coef_ -= step * grad;
    }
  }
  intercept_ = y_mean - x_mean.dot(coef_);
}

Eigen::VectorXd RidgeRegression::predict(const Eigen::MatrixXd& X) const {
  return (X * coef_).array() + intercept_;
}

void NeuralRegression::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng) {
  check_training_data(X, y);
  if (!net_.initialised() || net_.inputs() != X.cols()) net_.init(X.cols(), options_.hidden, rng);
  net_.reset_optimizer();
  net_.train(X.cast<float>(), y.cast<float>(), static_cast<float>(options_.alpha),
             static_cast<float>(options_.learning_rate), options_.epochs, options_.batch_size, rng,
             options_.optimizer);
  ++fits_;
}

Eigen::VectorXd NeuralRegression::predict(const Eigen::MatrixXd& X) const {
  if (!net_.initialised()) return Eigen::VectorXd::Zero(X.rows());
  return net_.predict(X.cast<float>()).cast<double>();
}

nlohmann::json NeuralRegression::state_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net_.layers()) {
    layers.push_back({{"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", std::vector<float>(l.weights.data(), l.weights.data() + l.weights.size())},
                      {"bias", std::vector<float>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"fits", fits_}, {"layers", layers}};
}

void NeuralRegression::load_state(const nlohmann::json& j) {
  std::vector<MlpNet<float>::Layer> layers;
  for (const auto& l : j.at("layers")) {
    const auto rows = l.at("rows").get<Eigen::Index>(), cols = l.at("cols").get<Eigen::Index>();
    const auto w = l.at("weights").get<std::vector<float>>();
    const auto b = l.at("bias").get<std::vector<float>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != cols) {
      throw std::invalid_argument("neural model state has inconsistent shapes");
    }
    MlpNet<float>::Layer layer{Eigen::Map<const MlpNet<float>::Matrix>(w.data(), rows, cols),
                               Eigen::Map<const MlpNet<float>::RowVector>(b.data(), cols)};
    layers.push_back(std::move(layer));
  }
  net_ = MlpNet<float>(options_.activation);
  net_.layers() = std::move(layers);
  net_.reset_optimizer();
  fits_ = j.at("fits").get<int>();
}

void KnnRegression::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng&) {
  check_training_data(X, y);
  X_ = X;
  y_ = y;
}

Eigen::VectorXd KnnRegression::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
  if (X_.rows() == 0) return out;
  const auto n = static_cast<std::size_t>(X_.rows());
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, k_)), n);
  std::vector<std::pair<double, Eigen::Index>> dist(n);
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      dist[r] = {(X_.row(ri) - X.row(q)).norm(), ri};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    if (dist[0].first == 0.0) {
      double sum = 0.0;
      int hits = 0;
      for (std::size_t r = 0; r < k && dist[r].first == 0.0; ++r, ++hits) sum += y_[dist[r].second];
      out[q] = sum / hits;
      continue;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const double w = 1.0 / dist[r].first;
      num += w * y_[dist[r].second];
      den += w;
    }
    out[q] = num / den;
  }
  return out;
}

Eigen::MatrixXd KernelRidge::gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
  Eigen::MatrixXd K = A * B.transpose();
  if (kernel_ == Kernel::kLinear) return K;
  const Eigen::VectorXd an = A.rowwise().squaredNorm();
  const Eigen::VectorXd bn = B.rowwise().squaredNorm();
  for (Eigen::Index r = 0; r < K.rows(); ++r) {
    for (Eigen::Index c = 0; c < K.cols(); ++c) {
      const double d2 = std::max(0.0, an[r] + bn[c] - 2.0 * K(r, c));
      K(r, c) = std::exp(-effective_gamma_ * d2);
    }
  }
  return K;
}

void KernelRidge::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng&) {
  check_training_data(X, y);
  effective_gamma_ = gamma_ > 0.0 ? gamma_ : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, X.cols()));
  X_ = X;
  Eigen::MatrixXd K = gram(X, X);
  K.diagonal().array() += alpha_;
  dual_ = K.ldlt().solve(y);
}

Eigen::VectorXd KernelRidge::predict(const Eigen::MatrixXd& X) const {
  if (X_.rows() == 0) return Eigen::VectorXd::Zero(X.rows());
  return gram(X, X_) * dual_;
}

void ModelParams::validate() const {
  if (!(ridge_alpha >= 0.0) || !(nn_alpha >= 0.0) || !(krr_alpha >= 0.0)) {
    throw std::invalid_argument("regularisation terms must be non-negative");
  }
  if (ridge_solver != "gd" && ridge_solver != "svd" && ridge_solver != "cholesky") {
    throw std::invalid_argument("unsupported ridge solver: " + ridge_solver);
  }
  if (hidden.empty()) throw std::invalid_argument("the network needs at least one hidden layer");
  for (auto h : hidden) {
    if (h <= 0) throw std::invalid_argument("hidden layer sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (knn_k <= 0) throw std::invalid_argument("knn_k must be positive");
}

nlohmann::json ModelParams::to_json() const {
  return {{"ridge_alpha", ridge_alpha},
          {"ridge_solver", ridge_solver},
          {"hidden", hidden},
          {"activation", activation == Activation::kTanh ? "tanh" : "relu"},
          {"optimizer", optimizer == Optimizer::kSgd ? "sgd" : "adam"},
          {"nn_alpha", nn_alpha},
          {"learning_rate", learning_rate},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"knn_k", knn_k},
          {"krr_alpha", krr_alpha},
          {"krr_gamma", krr_gamma}};
}

ModelParams ModelParams::from_json(const nlohmann::json& j) {
  ModelParams p;
  p.ridge_alpha = j.value("ridge_alpha", p.ridge_alpha);
  p.ridge_solver = j.value("ridge_solver", p.ridge_solver);
  if (j.contains("hidden")) p.hidden = j.at("hidden").get<std::vector<Eigen::Index>>();
  if (j.contains("activation")) {
    const auto a = j.at("activation").get<std::string>();
    if (a != "relu" && a != "tanh") throw std::invalid_argument("unsupported activation: " + a);
    p.activation = a == "tanh" ? Activation::kTanh : Activation::kRelu;
  }
  if (j.contains("optimizer")) {
    const auto o = j.at("optimizer").get<std::string>();
    if (o != "adam" && o != "sgd") throw std::invalid_argument("unsupported optimizer: " + o);
    p.optimizer = o == "sgd" ? Optimizer::kSgd : Optimizer::kAdam;
  }
  p.nn_alpha = j.value("nn_alpha", p.nn_alpha);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.epochs = j.value("epochs", p.epochs);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.knn_k = j.value("knn_k", p.knn_k);
  p.krr_alpha = j.value("krr_alpha", p.krr_alpha);
  p.krr_gamma = j.value("krr_gamma", p.krr_gamma);
  p.validate();
  return p;
}

std::unique_ptr<Regressor> make_regressor(ModelKind kind, const ModelParams& params) {
  switch (kind) {
    case ModelKind::kLinear: return std::make_unique<LinearRegression>();
    case ModelKind::kRidge: {
      RidgeRegression::Options o;
      o.alpha = params.ridge_alpha;
      if (params.ridge_solver == "svd") o.solver = RidgeRegression::Options::Solver::kSvd;
      if (params.ridge_solver == "cholesky") o.solver = RidgeRegression::Options::Solver::kCholesky;
      return std::make_unique<RidgeRegression>(o);
    }
    case ModelKind::kNeural: {
      NeuralRegression::Options o;
      o.hidden = params.hidden;
      o.activation = params.activation;
      o.optimizer = params.optimizer;
      o.alpha = params.nn_alpha;
      o.learning_rate = params.learning_rate;
      o.epochs = params.epochs;
      o.batch_size = params.batch_size;
      return std::make_unique<NeuralRegression>(o);
    }
    case ModelKind::kKnn: return std::make_unique<KnnRegression>(params.knn_k);
    case ModelKind::kKrrLinear:
      return std::make_unique<KernelRidge>(KernelRidge::Kernel::kLinear, params.krr_alpha);
    case ModelKind::kKrrRbf:
      return std::make_unique<KernelRidge>(KernelRidge::Kernel::kRbf, params.krr_alpha, params.krr_gamma);
    default: return nullptr;
  }
}

bool fit_regressor(Regressor& model, const SelectionHistory& h, Rng& rng) {
  const TrainingSet t = training_set(h);
  if (t.bins.empty()) return false;
  model.fit(t.X, t.y, rng);
  return true;
}

PreferenceLogits regression_logits(const Regressor& model, const std::vector<BinIndex>& occupied,
                                   const Eigen::MatrixXd& features) {
  if (features.rows() != static_cast<Eigen::Index>(occupied.size())) {
    throw std::invalid_argument("feature rows do not match the occupied set");
  }
  PreferenceLogits l;
  l.bins = occupied;
  l.values.resize(occupied.size());
  if (occupied.empty()) return l;
  const Eigen::VectorXd p = model.predict(features);
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    const double v = p[static_cast<Eigen::Index>(i)];
    l.values[i] = std::isfinite(v) ? std::max(0.0, v) : 0.0;
  }
  return l;
}

}  // namespace icme::ple
