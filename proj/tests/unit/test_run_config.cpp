#include <gtest/gtest.h>

#include <algorithm>

#include "sae/run_config.hpp"

using namespace sae;

TEST(RunConfig, ParsesCommentsAndDefaults) {
  const auto cfg = RunConfigFile::parse_string(
      "# a study\n"
      "scenario = ve_skew\n"
      "\n"
      "case = II   # half the subareas\n"
      "seed = 12\n");
  EXPECT_EQ(cfg.get("scenario"), "ve_skew");
  EXPECT_EQ(cfg.get("case"), "II");
  const auto s = to_run_settings(cfg);
  EXPECT_EQ(s.study.scenario.name, "ve_skew");
  EXPECT_EQ(s.study.scenario.model.subarea_effect.shape(), 1.0);
  EXPECT_EQ(s.study.sampling.design.subareas_in(0), 5u);
  EXPECT_EQ(s.study.replicates, 200u);
  EXPECT_EQ(s.study.censuses, 100u);
  EXPECT_EQ(s.study.seed, 12u);
  EXPECT_EQ(s.study.estimators.size(), 3u);
  EXPECT_EQ(s.study.scenario.alphas, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.study.scenario.poverty_line, PovertyLinePolicy::FixedReference);
  EXPECT_EQ(s.study.sample_policy, SamplePolicy::Redraw);
  EXPECT_EQ(s.out_dir, "out");
}

TEST(RunConfig, MissingSeedNamesKey) {
  const auto cfg = RunConfigFile::parse_string("scenario = e_skew\n");
  try {
    (void)to_run_settings(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "seed");
  }
}

TEST(RunConfig, UnknownKeyAndSyntax) {
  try {
    (void)RunConfigFile::parse_string("seed = 1\nsigma_w = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sigma_w");
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW((void)RunConfigFile::parse_string("seed 1\n"), ConfigError);
  EXPECT_THROW((void)RunConfigFile::parse_string("seed = 1\nseed = 2\n"), ConfigError);
  RunConfigFile cfg;
  EXPECT_THROW(cfg.set("novalue"), ConfigError);
  EXPECT_THROW(cfg.set("bogus=1"), ConfigError);
}

TEST(RunConfig, OverridesWin) {
  auto cfg = RunConfigFile::parse_string("seed = 1\nI = 200\nB = 100\n");
  cfg.set("I=10");
  cfg.set("seed=99");
  cfg.set("estimators=ELL,ELL1");
  const auto s = to_run_settings(cfg);
  EXPECT_EQ(s.study.replicates, 10u);
  EXPECT_EQ(s.study.censuses, 100u);
  EXPECT_EQ(s.study.seed, 99u);
  EXPECT_EQ(s.study.estimators, (std::vector<EstimatorKind>{EstimatorKind::ELL, EstimatorKind::ELL1_onefold}));
  // Entries keep one value per key.
  EXPECT_EQ(std::count_if(cfg.entries().begin(), cfg.entries().end(), [](auto& e) { return e.first == "I"; }), 1);
}

TEST(RunConfig, CustomScenarioAndDesign) {
  const auto cfg = RunConfigFile::parse_string(
      "scenario = custom\nlambda_e = 2\nsigma_u = 0.3\nbeta = 1, 0.5, -0.5\n"
      "areas = 5\nsubareas = 4\nunits = 8\ncase = custom\nm_d = 2\nn_dj = 3\n"
      "alphas = 0,1,2\nseed = 3\npoverty_line = per-population\nsample_policy = fixed\n"
      "subarea_pool = per-area\nworkers = 2\nout = results\n");
  const auto s = to_run_settings(cfg);
  EXPECT_EQ(s.study.scenario.name, "custom");
  EXPECT_EQ(s.study.scenario.model.unit_error.shape(), 2.0);
  EXPECT_EQ(s.study.scenario.model.area_effect.target_sd(), 0.3);
  EXPECT_EQ(s.study.scenario.model.beta, Eigen::Vector3d(1.0, 0.5, -0.5));
  EXPECT_EQ(s.study.scenario.layout, PopulationLayout::balanced(5, 4, 8));
  EXPECT_EQ(s.study.sampling.design.subareas_in(0), 2u);
  EXPECT_EQ(s.study.sampling.design.units_in(0), 3u);
  EXPECT_EQ(s.study.scenario.alphas, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(s.study.scenario.poverty_line, PovertyLinePolicy::PerPopulation);
  EXPECT_EQ(s.study.sample_policy, SamplePolicy::Fixed);
  EXPECT_EQ(s.study.subarea_pool, SubareaPool::PerArea);
  EXPECT_EQ(s.workers, 2u);
  EXPECT_EQ(s.out_dir, "results");
}

TEST(RunConfig, RejectsBadValues) {
  auto bad = [](const std::string& extra) {
    return [extra] { (void)to_run_settings(RunConfigFile::parse_string("seed = 1\n" + extra)); };
  };
  EXPECT_THROW(bad("I = 0\n")(), ConfigError);
  EXPECT_THROW(bad("B = two\n")(), ConfigError);
  EXPECT_THROW(bad("alphas = 0,3\n")(), ConfigError);
  EXPECT_THROW(bad("estimators = ELL,EB\n")(), ConfigError);
  EXPECT_THROW(bad("case = custom\n")(), ConfigError);
  EXPECT_THROW(bad("case = III\n")(), ConfigError);
  EXPECT_THROW(bad("scenario = lognormal\n")(), ConfigError);
  EXPECT_THROW(bad("sigma_e = -1\n")(), ConfigError);
  EXPECT_THROW(bad("beta = 1,2\n")(), ConfigError);
  EXPECT_THROW(bad("m_d = 11\n")(), ConfigError);
  EXPECT_THROW(bad("poverty_line = yearly\n")(), ConfigError);
  EXPECT_THROW((void)to_run_settings(RunConfigFile::parse_string("seed = -4\n")), ConfigError);
}

TEST(RunConfig, KnownKeysCoverDocumentation) {
  const auto& keys = RunConfigFile::known_keys();
  for (const char* k : {"scenario", "lambda_u", "lambda_v", "lambda_e", "sigma_u", "sigma_v", "sigma_e", "beta",
                        "areas", "subareas", "units", "case", "m_d", "n_dj", "I", "B", "estimators", "alphas", "seed",
                        "poverty_line", "poverty_fraction", "sample_policy", "subarea_pool", "workers", "out"})
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
}
