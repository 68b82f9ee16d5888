#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "icme/ple/emitter.hpp"
#include "support.hpp"

using namespace icme;
using namespace icme::ple;

namespace {

qd::Container filled(std::size_t occupied, std::uint64_t seed) {
  qd::Container c;
  std::mt19937_64 rng(seed);
  tsupport::fill_container(c, occupied, rng);
  return c;
}

EmitterConfig custom(ModelKind model, SamplerKind sampler, FeatureKind features = FeatureKind::kNone) {
  nlohmann::json j{{"name", "custom"},
                   {"model", std::string(to_string(model))},
                   {"sampler", std::string(to_string(sampler))},
                   {"features", std::string(to_string(features))}};
  return EmitterConfig::from_json(j);
}

}  // namespace

TEST(EmitterConfig, PresetsValidateAndRoundTrip) {
  for (const auto& name : EmitterConfig::preset_names()) {
    const auto c = EmitterConfig::preset(name);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(EmitterConfig::from_json(c.to_json()).to_json(), c.to_json());
    EXPECT_EQ(EmitterConfig::from_json({{"name", name}}).to_json(), c.to_json());
  }
  EXPECT_TRUE(EmitterConfig::preset("null").is_null());
  const auto best = EmitterConfig::preset("best_ple");
  EXPECT_EQ(best.model, ModelKind::kNeural);
  EXPECT_EQ(best.sampler, SamplerKind::kBoltzmann);
  EXPECT_EQ(best.features, FeatureKind::kAxesOnly);
  const auto greedy = EmitterConfig::preset("greedy");
  EXPECT_EQ(greedy.window, std::optional<std::size_t>(1));
  EXPECT_EQ(greedy.model, ModelKind::kTabular);
  EXPECT_EQ(EmitterConfig::from_json({{"name", "best_ple"}, {"window", 3}}).window, std::optional<std::size_t>(3));
  EXPECT_EQ(EmitterConfig::from_json({{"name", "best_ple"}, {"window", "inf"}}).window, std::nullopt);
}

TEST(EmitterConfig, RejectsInconsistentCombinations) {
  EXPECT_THROW(custom(ModelKind::kLinear, SamplerKind::kThompson, FeatureKind::kBc), std::invalid_argument);
  EXPECT_THROW(custom(ModelKind::kNone, SamplerKind::kBoltzmann), std::invalid_argument);
  EXPECT_THROW(custom(ModelKind::kTabular, SamplerKind::kNone), std::invalid_argument);
  EXPECT_THROW(custom(ModelKind::kRidge, SamplerKind::kGreedy, FeatureKind::kNone), std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json({{"name", "mystery"}}), std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json({{"name", "best_ple"}, {"tau0", 0.0}}), std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json({{"name", "best_ple"}, {"epsilon0", 1.5}}), std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json({{"name", "best_ple"}, {"window", -1}}), std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json({{"name", "best_ple"}, {"params", {{"optimizer", "lbfgs"}}}}),
               std::invalid_argument);
  EXPECT_THROW(EmitterConfig::from_json(nlohmann::json::array()), std::invalid_argument);
  EXPECT_NO_THROW(custom(ModelKind::kTabular, SamplerKind::kThompson));
}

TEST(Emitter, NullEmitterIsNeverInvoked) {
  Emitter e(EmitterConfig::preset("null"), 100);
  Rng rng(1);
  EXPECT_THROW(e.emit(filled(5, 1), rng), std::logic_error);
}

TEST(Emitter, EmptyContainerIsRejected) {
  Emitter e(EmitterConfig::preset("random"), 100);
  Rng rng(1);
  EXPECT_THROW(e.emit(qd::Container{}, rng), std::invalid_argument);
}

TEST(Emitter, RandomIsUniformOverOccupiedBins) {
  const auto c = filled(20, 2);
  const auto occ = c.occupied_bins();
  Emitter e(EmitterConfig::preset("random"), 100);
  Rng rng(3);
  std::map<BinIndex, int> counts;
  const int n = 40000;
  for (int k = 0; k < n; ++k) counts[e.emit(c, rng)]++;
  ASSERT_EQ(counts.size(), occ.size());
  const double expect = static_cast<double>(n) / static_cast<double>(occ.size());
  double chi2 = 0.0;
  for (const auto& b : occ) chi2 += std::pow(counts[b] - expect, 2) / expect;
  // 99.9th percentile of chi-square with (bins - 1) degrees of freedom is
  // below 2.5 * dof for dof >= 15.
  EXPECT_LT(chi2, 2.5 * static_cast<double>(occ.size() - 1));
}

TEST(Emitter, GreedyFollowsTheLastSelection) {
  const auto c = filled(12, 4);
  const auto occ = c.occupied_bins();
  Emitter e(EmitterConfig::preset("greedy"), 100);
  Rng rng(5);
  e.update(c, occ[7], {}, 0);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(e.emit(c, rng), occ[7]);
  e.update(c, occ[2], {}, 1);
  EXPECT_EQ(e.emit(c, rng), occ[2]);
  EXPECT_EQ(e.history().size(), 1u);
  EXPECT_THROW(e.update(c, {99, 99, 0}, {}, 2), std::invalid_argument);
}

TEST(Emitter, ThompsonUpdatesThePosterior) {
  const auto c = filled(6, 6);
  const auto occ = c.occupied_bins();
  Emitter e(custom(ModelKind::kTabular, SamplerKind::kThompson), 100);
  e.update(c, occ[1], {}, 0);
  EXPECT_EQ(e.posterior().at(occ[1]), (std::pair{2.0, 2.0}));
  EXPECT_EQ(e.posterior().at(occ[0]), (std::pair{1.0, 2.0}));
  // Strong evidence makes the selected bin win almost always.
  for (int k = 0; k < 60; ++k) e.update(c, occ[1], {}, k + 1);
  Rng rng(7);
  int hits = 0;
  for (int k = 0; k < 200; ++k) hits += e.emit(c, rng) == occ[1];
  EXPECT_GT(hits, 190);
}

TEST(Emitter, RegressionModelIsRefittedLazily) {
  const auto c = filled(15, 8);
  const auto occ = c.occupied_bins();
  Emitter e(custom(ModelKind::kLinear, SamplerKind::kGreedy, FeatureKind::kBc), 100);
  Rng rng(9);
  const auto before = e.logits(c, rng);
  EXPECT_EQ(e.fits(), 0u);
  for (double v : before.values) EXPECT_DOUBLE_EQ(v, before.values.front());
  e.update(c, occ[3], {}, 0);
  e.logits(c, rng);
  e.logits(c, rng);
  EXPECT_EQ(e.fits(), 1u);
  e.update(c, occ[4], {}, 1);
  e.emit(c, rng);
  EXPECT_EQ(e.fits(), 2u);
  ASSERT_NE(e.model(), nullptr);
}

TEST(Emitter, SamplerStateDecaysAndResets) {
  const auto c = filled(10, 10);
  auto cfg = EmitterConfig::preset("best_ple");
  cfg.model = ModelKind::kTabular;
  cfg.features = FeatureKind::kNone;
  Emitter e(cfg, 100);
  Rng rng(11);
  e.update(c, c.occupied_bins()[0], {}, 0);
  for (int k = 0; k < 5; ++k) e.emit(c, rng);
  EXPECT_NEAR(e.tau(), cfg.tau0 * std::pow(1 - cfg.tau_decay, 5), 1e-12);
  e.reset();
  EXPECT_EQ(e.tau(), cfg.tau0);
  EXPECT_TRUE(e.history().empty());

  auto eps = cfg;
  eps.sampler = SamplerKind::kEpsGreedy;
  Emitter g(eps, 100);
  for (int k = 0; k < 7; ++k) g.emit(c, rng);
  EXPECT_NEAR(g.epsilon(), eps.epsilon0 * std::pow(1 - eps.epsilon_decay, 7), 1e-12);
}

TEST(Emitter, StateRoundTripReproducesLogits) {
  const auto c = filled(25, 12);
  const auto occ = c.occupied_bins();
  for (auto cfg : {custom(ModelKind::kDlTabular, SamplerKind::kBoltzmann),
                   custom(ModelKind::kRidge, SamplerKind::kEpsGreedy, FeatureKind::kSolutionAxes),
                   custom(ModelKind::kTabular, SamplerKind::kThompson), EmitterConfig::preset("best_ple")}) {
    Emitter e(cfg, 100);
    Rng rng(13);
    e.update(c, occ[1], {}, 0);
    e.update(c, occ[5], {{occ[1], 0.5}}, 1);
    e.update(c, occ[5], {{occ[5], 1.0}}, 2);
    e.emit(c, rng);
    Emitter back(EmitterConfig::preset("null"), 100);
    back.load_state(nlohmann::json::parse(e.state_json().dump()));
    EXPECT_EQ(back.config().to_json(), cfg.to_json());
    EXPECT_EQ(back.history().size(), 3u);
    EXPECT_EQ(back.epsilon(), e.epsilon());
    EXPECT_EQ(back.tau(), e.tau());
    EXPECT_EQ(back.posterior().to_json(), e.posterior().to_json());
    // Models with carried parameters restore them exactly; the others refit.
    if (!e.state_json().at("model").is_null()) EXPECT_EQ(back.state_json(), e.state_json());
    Rng r1(1), r2(1);
    const auto a = e.logits(c, r1), b = back.logits(c, r2);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
  }
}

TEST(Emitter, NormalisationRescalesRegressionScores) {
  const auto c = filled(20, 14);
  const auto occ = c.occupied_bins();
  auto raw_cfg = custom(ModelKind::kLinear, SamplerKind::kBoltzmann, FeatureKind::kBc);
  EXPECT_TRUE(raw_cfg.normalise);
  raw_cfg.normalise = false;
  auto norm_cfg = raw_cfg;
  norm_cfg.normalise = true;
  Emitter raw(raw_cfg, 100), norm(norm_cfg, 100);
  for (int k = 0; k < 4; ++k) {
    raw.update(c, occ[static_cast<std::size_t>(k)], {}, k);
    norm.update(c, occ[static_cast<std::size_t>(k)], {}, k);
  }
  Rng r1(3), r2(3);
  const auto a = raw.logits(c, r1), b = norm.logits(c, r2);
  ASSERT_EQ(a.size(), b.size());
  const double top = *std::max_element(a.values.begin(), a.values.end());
  ASSERT_GT(top, 0.0);
  EXPECT_DOUBLE_EQ(*std::max_element(b.values.begin(), b.values.end()), 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.values[i], a.values[i] / top, 1e-12);
  // Tabular scores keep their time-averaged scale.
  Emitter tab(custom(ModelKind::kTabular, SamplerKind::kBoltzmann), 100);
  tab.update(c, occ[0], {}, 0);
  tab.update(c, occ[1], {}, 1);
  EXPECT_DOUBLE_EQ(tab.logits(c, r1).at(occ[0]), 0.5);
}

TEST(Emitter, NeuralBoltzmannFavoursTheSelectedBin) {
  const auto c = filled(30, 15);
  const auto occ = c.occupied_bins();
  const BinIndex a = occ[4];
  Emitter e(EmitterConfig::preset("best_ple"), 100);
  for (int k = 0; k < 10; ++k) e.update(c, a, {}, k);
  Rng rng(16);
  int hits = 0;
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) hits += e.emit(c, rng) == a;
  EXPECT_GT(static_cast<double>(hits) / draws, 1.0 / static_cast<double>(occ.size()));
}

TEST(Features, DimensionsAndScaling) {
  qd::Container c;
  std::mt19937_64 rng(14);
  Solution s = tsupport::make_solution(1, {1.2, 9.55}, rng, false);
  s.descriptors = {0.25, 0.5, 3.0, 5.5};
  s.axes = {8.0, 4.0, 2.0};
  s.genotype = evo::Genotype(std::string(30, 'B'));
  const BinIndex b = c.insert(s);
  const qd::Bin& bin = c.at(b);
  const auto centre = bin.bounds.centre();
  const double cx = (centre.x - 1.0) / 4.0, cy = (centre.y - 1.0) / 9.0;
  for (auto k : {FeatureKind::kNone, FeatureKind::kBc, FeatureKind::kSolution, FeatureKind::kAxesOnly,
                 FeatureKind::kSolutionAxes}) {
    EXPECT_EQ(extract_features(c, bin, k, 120).size(), feature_dim(k));
    EXPECT_EQ(feature_kind_from_string(to_string(k)), k);
  }
  const auto bc = extract_features(c, bin, FeatureKind::kBc, 120);
  EXPECT_DOUBLE_EQ(bc[0], cx);
  EXPECT_DOUBLE_EQ(bc[1], cy);
  const auto ax = extract_features(c, bin, FeatureKind::kAxesOnly, 120);
  EXPECT_DOUBLE_EQ(ax[2], 0.8);
  EXPECT_DOUBLE_EQ(ax[3], 0.4);
  EXPECT_DOUBLE_EQ(ax[4], 0.2);
  const auto sf = extract_features(c, bin, FeatureKind::kSolutionAxes, 120);
  EXPECT_DOUBLE_EQ(sf[0], 0.25);
  EXPECT_DOUBLE_EQ(sf[1], 0.5);
  EXPECT_DOUBLE_EQ(sf[2], 0.5);
  EXPECT_DOUBLE_EQ(sf[3], 0.5);
  EXPECT_DOUBLE_EQ(sf[6], 0.25);
  EXPECT_DOUBLE_EQ(sf[7], 0.8);
  // Infeasible-only bins use their least violating member.
  Solution bad = s;
  bad.feasible = false;
  bad.violation = 1.0;
  bad.axes = {5.0, 1.0, 1.0};
  const BinIndex bb = c.insert(bad);
  if (bb != b) EXPECT_DOUBLE_EQ(extract_features(c, c.at(bb), FeatureKind::kAxesOnly, 120)[2], 0.5);
  EXPECT_THROW(feature_kind_from_string("pixels"), std::invalid_argument);
}
