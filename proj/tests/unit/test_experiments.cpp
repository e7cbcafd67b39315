#include <gtest/gtest.h>

#include <cmath>

#include "mgcool/errors.hpp"
#include "mgcool/experiments.hpp"

using namespace mgcool;
using namespace mgcool::experiments;

namespace {

SweepPlan small_plan() {
  SweepPlan plan;
  plan.parameter = "omega";
  plan.grid = {2.0, 2.8};
  plan.base.set_gamma(5.0);
  plan.base.eta = plan.base.eta_eff = 0.1;
  plan.base.order = model::ExpansionOrder::second;
  plan.base.n_max = 12;
  plan.settings.samples = 400;
  return plan;
}

}  // namespace

TEST(Sweep, Validation) {
  SweepPlan plan = small_plan();
  plan.parameter = "n_max";
  EXPECT_THROW(plan.validate(), ConfigError);
  plan = small_plan();
  plan.grid.clear();
  EXPECT_THROW(plan.validate(), ConfigError);
  plan = small_plan();
  plan.grid = {1.0, 1.0};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan = small_plan();
  plan.parameter = "delta";
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.delta_at_resonance = false;
  EXPECT_NO_THROW(plan.validate());
  plan.settings.samples = 0;
  EXPECT_THROW(plan.validate(), ConfigError);
}

TEST(Sweep, PointsFollowResonanceAndEtaTie) {
  SweepPlan plan = small_plan();
  EXPECT_NEAR(plan.point(1).delta, -6.84, 1e-14);
  plan.parameter = "eta";
  plan.grid = {0.05, 0.2};
  EXPECT_EQ(plan.point(1).eta_eff, 0.2);
  plan.tie_eta_eff = false;
  EXPECT_EQ(plan.point(1).eta_eff, 0.1);
}

TEST(Sweep, RecordsFailuresInGridOrder) {
  SweepPlan plan = small_plan();
  plan.parameter = "gamma";
  plan.grid = {-1.0, 5.0};
  const auto out = run_sweep(plan);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_FALSE(out[0].ok);
  EXPECT_EQ(out[0].error.rfind("ConfigError", 0), 0u) << out[0].error;
  EXPECT_TRUE(std::isnan(out[0].W_fit));
  EXPECT_TRUE(out[1].ok) << out[1].error;
  EXPECT_EQ(out[1].params.gamma(), 5.0);
}

TEST(Sweep, ParallelRunIsBitIdentical) {
  const SweepPlan plan = small_plan();
  const auto a = run_sweep(plan, 1);
  const auto b = run_sweep(plan, 2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_TRUE(a[k].ok) << a[k].error;
    EXPECT_EQ(a[k].W_fit, b[k].W_fit);
    EXPECT_EQ(a[k].n_final, b[k].n_final);
    EXPECT_GT(a[k].W_fit, 0.0);
    EXPECT_NEAR(a[k].W_formula, rates::rate_formula(a[k].params), 0.0);
  }
}

TEST(Optimizer, RejectsBadBracket) {
  const SweepPlan plan = small_plan();
  EXPECT_THROW(optimize_omega(plan.base, plan.settings, 2.0, 1.0), ConfigError);
  EXPECT_THROW(optimize_omega(plan.base, plan.settings, 0.0, 1.0), ConfigError);
}

TEST(Optimizer, MaximumOutsideBracket) {
  // W still rises at Omega = 2 for gamma = 5
  const SweepPlan plan = small_plan();
  EXPECT_THROW(optimize_omega(plan.base, plan.settings, 1.5, 2.0, 0.2), BracketError);
}

TEST(PowerLaw, RecoversExponent) {
  std::vector<double> x, y;
  for (double v : {0.02, 0.05, 0.1, 0.2}) {
    x.push_back(v);
    y.push_back(3.0 * std::pow(v, 1.3));
  }
  const PowerLaw f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 1.3, 1e-12);
  EXPECT_NEAR(f.prefactor, 3.0, 1e-11);
  x.push_back(0.3);
  y.push_back(kNaN);
  EXPECT_NEAR(fit_power_law(x, y).exponent, 1.3, 1e-12);
  EXPECT_THROW(fit_power_law({1.0}, {1.0}), FitError);
  EXPECT_THROW(fit_power_law({1.0, 2.0}, {1.0}), FitError);
}

TEST(Presets, NamesRoundTrip) {
  for (PresetId id : all_presets()) EXPECT_EQ(parse_preset(to_string(id)), id);
  EXPECT_EQ(all_presets().size(), 8u);
  EXPECT_THROW(parse_preset("fig99"), ConfigError);
}

TEST(Presets, OptimalRunParameters) {
  const auto a = optimal_run_params(0.5);
  EXPECT_EQ(a.omega, 0.85);
  EXPECT_EQ(a.delta, 0.28);
  const auto b = optimal_run_params(5.0);
  EXPECT_EQ(b.omega, 2.8);
  EXPECT_EQ(b.delta, -6.84);
  EXPECT_EQ(b.eta, 0.1);
  EXPECT_THROW(optimal_run_params(1.0), ConfigError);
  EXPECT_NEAR(multimode_params(0).delta, -6.84, 1e-14);
  EXPECT_NEAR(multimode_params(1).delta, (3.0 - 7.84) / std::sqrt(3.0), 1e-12);
  EXPECT_THROW(multimode_params(3), ConfigError);
}

TEST(Presets, GradientTable) {
  const PresetResult r = run_preset(PresetId::table1_gradients);
  const auto& t = r.table;
  ASSERT_EQ(t.size(), 4u);
  const auto g = t.column("gradient_T_per_m");
  const auto eta = t.column("eta");
  // tests/oracles/derive.py
  const double g_ref[] = {607.58722434088956, 1215.1744486817791, 564.73472489115427, 1129.4694497823085};
  const double eta_ref[] = {0.13055490961388315, 0.092316261905173564, 0.25170169531972012, 0.17797997559672439};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(g[k] / g_ref[k], 1.0, 1e-6) << k;
    EXPECT_NEAR(eta[k] / eta_ref[k], 1.0, 1e-6) << k;
  }
  EXPECT_EQ(t.comments.front(), "preset=table1_gradients");
  EXPECT_EQ(t.comments.back().rfind("config_hash=", 0), 0u);
}
