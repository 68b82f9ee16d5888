#include "icme/ple/emitter.hpp"

#include <algorithm>
#include <stdexcept>

namespace icme::ple {

namespace {

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

nlohmann::json window_json(const std::optional<std::size_t>& w) {
  return w ? nlohmann::json(*w) : nlohmann::json("inf");
}

std::optional<std::size_t> window_from_json(const nlohmann::json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "inf")) return std::nullopt;
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
  throw std::invalid_argument("window must be a non-negative integer or \"inf\"");
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), c) = j.at(r).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

}  // namespace

void EmitterConfig::validate() const {
  if (sampler == SamplerKind::kThompson && model != ModelKind::kTabular) {
    throw std::invalid_argument("thompson sampling requires the tabular model");
  }
  if (sampler == SamplerKind::kNone && model != ModelKind::kNone) {
    throw std::invalid_argument("a model needs a sampler");
  }
  if ((sampler == SamplerKind::kGreedy || sampler == SamplerKind::kEpsGreedy ||
       sampler == SamplerKind::kBoltzmann) &&
      model == ModelKind::kNone) {
    throw std::invalid_argument(std::string(to_string(sampler)) + " sampling requires a model");
  }
  if (is_regression(model) && features == FeatureKind::kNone) {
    throw std::invalid_argument("regression models require a feature set");
  }
  check_unit(lambda_tab, "lambda_tab");
  check_unit(epsilon0, "epsilon0");
  check_unit(epsilon_decay, "epsilon_decay");
  check_unit(tau_decay, "tau_decay");
  if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) throw std::invalid_argument("Beta prior must be positive");
  params.validate();
}

nlohmann::json EmitterConfig::to_json() const {
  return {{"name", name},
          {"window", window_json(window)},
          {"features", std::string(to_string(features))},
          {"model", std::string(to_string(model))},
          {"sampler", std::string(to_string(sampler))},
          {"delta", delta},
          {"lambda_tab", lambda_tab},
          {"epsilon0", epsilon0},
          {"epsilon_decay", epsilon_decay},
          {"tau0", tau0},
          {"tau_decay", tau_decay},
          {"alpha0", alpha0},
          {"beta0", beta0},
          {"normalise", normalise},
          {"params", params.to_json()}};
}

const std::vector<std::string>& EmitterConfig::preset_names() {
  static const std::vector<std::string> names{"null", "random", "greedy", "best_ple"};
  return names;
}

EmitterConfig EmitterConfig::preset(const std::string& name) {
  EmitterConfig c;
  c.name = name;
  if (name == "best_ple") return c;
  if (name == "null") {
    c.window = 0;
    c.features = FeatureKind::kNone;
    c.model = ModelKind::kNone;
    c.sampler = SamplerKind::kNone;
    return c;
  }
  if (name == "random") {
    c.window = 0;
    c.features = FeatureKind::kNone;
    c.model = ModelKind::kNone;
    c.sampler = SamplerKind::kUniform;
    return c;
  }
  if (name == "greedy") {
    c.window = 1;
    c.features = FeatureKind::kNone;
    c.model = ModelKind::kTabular;
    c.sampler = SamplerKind::kGreedy;
    return c;
  }
  throw std::invalid_argument("unknown emitter preset: " + name);
}

EmitterConfig EmitterConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("emitter config must be an object");
  const std::string name = j.value("name", std::string("best_ple"));
  EmitterConfig c;
  const bool known = std::find(preset_names().begin(), preset_names().end(), name) != preset_names().end();
  if (known) {
    c = preset(name);
  } else if (!j.contains("model") || !j.contains("sampler")) {
    throw std::invalid_argument("unknown emitter: " + name);
  }
  c.name = name;
  if (j.contains("window")) c.window = window_from_json(j.at("window"));
  if (j.contains("features")) c.features = feature_kind_from_string(j.at("features").get<std::string>());
  if (j.contains("model")) c.model = model_kind_from_string(j.at("model").get<std::string>());
  if (j.contains("sampler")) c.sampler = sampler_kind_from_string(j.at("sampler").get<std::string>());
  c.delta = j.value("delta", c.delta);
  c.lambda_tab = j.value("lambda_tab", c.lambda_tab);
  c.epsilon0 = j.value("epsilon0", c.epsilon0);
  c.epsilon_decay = j.value("epsilon_decay", c.epsilon_decay);
  c.tau0 = j.value("tau0", c.tau0);
  c.tau_decay = j.value("tau_decay", c.tau_decay);
  c.alpha0 = j.value("alpha0", c.alpha0);
  c.beta0 = j.value("beta0", c.beta0);
  c.normalise = j.value("normalise", c.normalise);
  if (j.contains("params")) c.params = ModelParams::from_json(j.at("params"));
  c.validate();
  return c;
}

Emitter::Emitter(EmitterConfig config, std::size_t max_length)
    : config_(std::move(config)),
      max_length_(max_length),
      history_(config_.window),
      posterior_(config_.alpha0, config_.beta0),
      epsilon_(config_.epsilon0),
      tau_(config_.tau0) {
  config_.validate();
  model_ = make_regressor(config_.model, config_.params);
}

Eigen::MatrixXd Emitter::features_for(const qd::Container& c, const std::vector<BinIndex>& occupied) const {
  if (!is_regression(config_.model)) return {};
  return extract_features(c, occupied, config_.features, max_length_);
}

void Emitter::update(const qd::Container& c, const BinIndex& selected, std::vector<Credit> credits, int iteration) {
  std::vector<BinIndex> occupied = c.occupied_bins();
  if (std::find(occupied.begin(), occupied.end(), selected) == occupied.end()) {
    throw std::invalid_argument("selected bin " + selected.key() + " is not occupied");
  }
  if (config_.sampler == SamplerKind::kThompson) posterior_.update(selected, occupied);
  Eigen::MatrixXd features = features_for(c, occupied);
  record_selection(history_, selected, std::move(occupied), std::move(credits), std::move(features), iteration);
  dirty_ = true;
}

PreferenceLogits Emitter::logits(const qd::Container& c, Rng& rng) {
  const std::vector<BinIndex> occupied = c.occupied_bins();
  switch (config_.model) {
    case ModelKind::kNone: return uniform_logits(occupied);
    case ModelKind::kTabular: return tabular_logits(history_, occupied);
    case ModelKind::kDlTabular: return dl_tabular_logits(history_, occupied, config_.delta, config_.lambda_tab);
    default: break;
  }
  if (dirty_) {
    if (history_.empty()) {
      fitted_ = false;
    } else if (fit_regressor(*model_, history_, rng)) {
      fitted_ = true;
      ++fits_;
    }
    dirty_ = false;
  }
  if (!fitted_) return uniform_logits(occupied);
  PreferenceLogits l = regression_logits(*model_, occupied, features_for(c, occupied));
  if (config_.normalise) {
    double top = 0.0;
    for (double v : l.values) top = std::max(top, v);
    if (top > 0.0) {
      for (double& v : l.values) v /= top;
    }
  }
  return l;
}

BinIndex Emitter::emit(const qd::Container& c, Rng& rng) {
  if (is_null()) throw std::logic_error("the null emitter is never invoked");
  switch (config_.sampler) {
    case SamplerKind::kUniform: return sample_uniform(c.occupied_bins(), rng);
    case SamplerKind::kThompson: return sample_thompson(posterior_, c.occupied_bins(), rng);
    default: break;
  }
  const PreferenceLogits l = logits(c, rng);
  switch (config_.sampler) {
    case SamplerKind::kGreedy: return sample_greedy(l);
    case SamplerKind::kEpsGreedy: return sample_eps_greedy(l, epsilon_, config_.epsilon_decay, rng);
    case SamplerKind::kBoltzmann: return sample_boltzmann(l, tau_, config_.tau_decay, rng);
    default: throw std::logic_error("unhandled sampler");
  }
}

void Emitter::reset() {
  history_.clear();
  posterior_.clear();
  model_ = make_regressor(config_.model, config_.params);
  dirty_ = true;
  fitted_ = false;
  epsilon_ = config_.epsilon0;
  tau_ = config_.tau0;
}

nlohmann::json Emitter::state_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : history_.records()) {
    nlohmann::json occ = nlohmann::json::array();
    for (const auto& b : r.occupied) occ.push_back(b.key());
    nlohmann::json credits = nlohmann::json::array();
    for (const auto& cr : r.credits) credits.push_back({{"source", cr.source.key()}, {"share", cr.share}});
    records.push_back({{"iteration", r.iteration},
                       {"selected", r.selected.key()},
                       {"occupied", occ},
                       {"credits", credits},
                       {"feature_dim", r.features.cols()},
                       {"features", matrix_json(r.features)}});
  }
  return {{"config", config_.to_json()},
          {"epsilon", epsilon_},
          {"tau", tau_},
          {"fits", fits_},
          {"fitted", fitted_},
          {"dirty", dirty_},
          {"model", model_ ? model_->state_json() : nlohmann::json(nullptr)},
          {"posterior", posterior_.to_json()},
          {"history", records}};
}

void Emitter::load_state(const nlohmann::json& j) {
  Emitter fresh(EmitterConfig::from_json(j.at("config")), max_length_);
  for (const auto& r : j.at("history")) {
    SelectionRecord rec;
    rec.iteration = r.at("iteration").get<int>();
    rec.selected = BinIndex::parse(r.at("selected").get<std::string>());
    for (const auto& b : r.at("occupied")) rec.occupied.push_back(BinIndex::parse(b.get<std::string>()));
    for (const auto& cr : r.at("credits")) {
      rec.credits.push_back({BinIndex::parse(cr.at("source").get<std::string>()), cr.at("share").get<double>()});
    }
    const auto cols = r.value("feature_dim", Eigen::Index{0});
    rec.features = matrix_from_json(r.at("features"), cols);
    if (rec.features.rows() == 0) rec.features.resize(0, 0);
    fresh.history_.record(std::move(rec));
  }
  const auto& post = j.at("posterior");
  for (const auto& [key, ab] : post.at("bins").items()) {
    fresh.posterior_.set(BinIndex::parse(key), ab.at(0).get<double>(), ab.at(1).get<double>());
  }
  fresh.epsilon_ = j.at("epsilon").get<double>();
  fresh.tau_ = j.at("tau").get<double>();
  fresh.fits_ = j.value("fits", std::size_t{0});
  // Models without carried state refit deterministically from the history.
  const auto model = j.value("model", nlohmann::json(nullptr));
  if (fresh.model_ && !model.is_null()) {
    fresh.model_->load_state(model);
    fresh.fitted_ = j.value("fitted", false);
    fresh.dirty_ = j.value("dirty", true);
  }
  *this = std::move(fresh);
}

}  // namespace icme::ple
