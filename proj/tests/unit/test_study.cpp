#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "common/property_checks.hpp"
#include "sae/error.hpp"
#include "sae/report.hpp"
#include "sae/study.hpp"

using namespace sae;

namespace {

// Outcome for a study with one estimator and one alpha.
ReplicateOutcome mock_outcome(const std::vector<double>& area_truth,
                              const std::vector<double>& area_est, const std::vector<double>& sub_truth,
                              const std::vector<double>& sub_est, std::vector<char> sampled) {
  ReplicateOutcome o;
  o.truth.area = {area_truth};
  o.truth.subarea = {sub_truth};
  FgtEstimates est;
  est.area_estimate = {area_est};
  est.subarea_estimate = {sub_est};
  o.estimates = {est};
  o.subarea_sampled = std::move(sampled);
  return o;
}

}  // namespace

TEST(Presets, ScenarioParameters) {
  const auto n = ScenarioSpec::preset("all_normal");
  const auto e = ScenarioSpec::preset("e_skew");
  const auto ve = ScenarioSpec::preset("ve_skew");
  for (const auto* s : {&n, &e, &ve}) {
    EXPECT_EQ(s->model.area_effect.shape(), 0.0);
    EXPECT_EQ(s->model.area_effect.target_sd(), 0.5);
    EXPECT_EQ(s->model.subarea_effect.target_sd(), 0.25);
    EXPECT_EQ(s->model.unit_error.target_sd(), 0.5);
    EXPECT_EQ(s->model.beta, Eigen::Vector3d(3.0, 0.03, -0.04));
    EXPECT_EQ(s->layout, PopulationLayout::balanced(40, 10, 50));
  }
  EXPECT_EQ(n.model.subarea_effect.shape(), 0.0);
  EXPECT_EQ(n.model.unit_error.shape(), 0.0);
  EXPECT_EQ(e.model.subarea_effect.shape(), 0.0);
  EXPECT_EQ(e.model.unit_error.shape(), 3.0);
  EXPECT_EQ(ve.model.subarea_effect.shape(), 1.0);
  EXPECT_EQ(ve.model.unit_error.shape(), 3.0);
  EXPECT_THROW(ScenarioSpec::preset("lognormal"), InvalidInput);

  EXPECT_EQ(SamplingCase::preset("I").design.subareas_in(0), 10u);
  EXPECT_EQ(SamplingCase::preset("I").design.units_in(0), 10u);
  EXPECT_EQ(SamplingCase::preset("II").design.subareas_in(0), 5u);
  EXPECT_EQ(SamplingCase::preset("II").design.units_in(0), 20u);
  EXPECT_THROW(SamplingCase::preset("III"), InvalidInput);
}

TEST(Accumulator, HandMockedTwoReplicates) {
  const auto layout = PopulationLayout::balanced(1, 1, 2);
  StudyAccumulator acc(layout, {EstimatorKind::MELL2}, {0});
  acc.add(mock_outcome({0.4}, {0.3}, {0.4}, {0.4}, {1}));
  acc.add(mock_outcome({0.4}, {0.5}, {0.4}, {0.4}, {1}));
  const auto m = std::move(acc).finish();
  EXPECT_EQ(m.replicates, 2u);
  EXPECT_NEAR(m.area[0][0][0].bias(), 0.0, 1e-15);
  EXPECT_NEAR(m.area[0][0][0].mse(), 0.01, 1e-15);
  EXPECT_EQ(m.subarea[0][0][0].mse(), 0.0);
}

TEST(Accumulator, TruthMockGivesZero) {
  const auto layout = PopulationLayout::balanced(3, 2, 4);
  StudyAccumulator acc(layout, {EstimatorKind::ELL, EstimatorKind::MELL1}, {0, 1});
  ReplicateOutcome o;
  o.truth.area = {{0.1, 0.2, 0.3}, {0.01, 0.02, 0.03}};
  o.truth.subarea = {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  FgtEstimates est;
  est.area_estimate = o.truth.area;
  est.subarea_estimate = o.truth.subarea;
  o.estimates = {est, est};
  o.subarea_sampled = {1, 0, 1, 0, 1, 1};
  acc.add(o);
  const auto m = std::move(acc).finish();
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t a = 0; a < 2; ++a)
      for (auto g : {Group::Area, Group::Subarea, Group::SampledSubarea, Group::NonsampledSubarea}) {
        EXPECT_EQ(m.average_mse(e, a, g), 0.0);
        EXPECT_EQ(m.average_bias(e, a, g), 0.0);
      }
}

TEST(Accumulator, SplitBySamplingStatus) {
  const auto layout = PopulationLayout::balanced(1, 2, 3);
  StudyAccumulator acc(layout, {EstimatorKind::MELL2}, {0});
  // Subareas alternate status; sampled error 0, non-sampled error 1.
  acc.add(mock_outcome({0}, {0}, {0.0, 0.0}, {0.0, 1.0}, {1, 0}));
  acc.add(mock_outcome({0}, {0}, {0.0, 0.0}, {1.0, 0.0}, {0, 1}));
  acc.add(mock_outcome({0}, {0}, {0.0, 0.0}, {0.0, 1.0}, {1, 0}));
  const auto m = std::move(acc).finish();
  EXPECT_EQ(m.average_mse(0, 0, Group::SampledSubarea), 0.0);
  EXPECT_EQ(m.average_mse(0, 0, Group::NonsampledSubarea), 1.0);
  EXPECT_EQ(m.average_bias(0, 0, Group::NonsampledSubarea), 1.0);
  EXPECT_EQ(m.group_size(0, 0, Group::SampledSubarea), 3u);
  EXPECT_EQ(m.group_size(0, 0, Group::NonsampledSubarea), 3u);
  EXPECT_EQ(m.sampled_count, (std::vector<std::size_t>{2, 1}));
}

TEST(Accumulator, ShapeMismatch) {
  const auto layout = PopulationLayout::balanced(1, 2, 3);
  StudyAccumulator acc(layout, {EstimatorKind::MELL2}, {0});
  EXPECT_THROW(acc.add(mock_outcome({0}, {0}, {0.0, 0.0}, {0.0, 0.0}, {1})), InvalidInput);
}

TEST(Study, CaseOneHasNoNonsampledSubareas) {
  auto cfg = sae::testing::small_study_config(3);
  cfg.sampling.design = SamplingDesign::uniform(6, 5);
  cfg.replicates = 3;
  cfg.censuses = 4;
  const auto m = run_study(cfg);
  EXPECT_EQ(m.group_size(0, 0, Group::NonsampledSubarea), 0u);
  EXPECT_EQ(m.group_size(0, 0, Group::SampledSubarea), 3u * 36u);
  for (auto c : m.sampled_count) EXPECT_EQ(c, 3u);
}

TEST(Study, HalfSampledRate) {
  auto cfg = sae::testing::small_study_config(4);
  cfg.replicates = 60;
  cfg.censuses = 2;
  cfg.estimators = {EstimatorKind::MELL2};
  const auto m = run_study(cfg);
  double mean = 0.0;
  for (auto c : m.sampled_count) {
    EXPECT_GE(c, 15u);
    EXPECT_LE(c, 45u);
    mean += static_cast<double>(c);
  }
  mean /= static_cast<double>(m.sampled_count.size());
  EXPECT_NEAR(mean, 30.0, 2.0);
  EXPECT_EQ(m.group_size(0, 0, Group::SampledSubarea) + m.group_size(0, 0, Group::NonsampledSubarea), 60u * 36u);
}

TEST(Study, GroupAverageConsistency) {
  const auto m = run_study(sae::testing::small_study_config(5));
  for (std::size_t e = 0; e < m.estimators.size(); ++e)
    for (std::size_t a = 0; a < m.alphas.size(); ++a) {
      double s = 0.0;
      for (const auto& sums : m.area[e][a]) s += sums.mse();
      EXPECT_NEAR(m.average_mse(e, a, Group::Area), s / 6.0, 1e-12);
      double sub = 0.0;
      for (const auto& sums : m.subarea[e][a]) sub += sums.mse();
      EXPECT_NEAR(m.average_mse(e, a, Group::Subarea), sub / 36.0, 1e-12);
      double pooled = 0.0;
      std::size_t count = 0;
      for (const auto& sp : m.split[e][a]) {
        pooled += sp[1].squared;
        count += sp[1].count;
      }
      EXPECT_NEAR(m.average_mse(e, a, Group::NonsampledSubarea), pooled / static_cast<double>(count), 1e-12);
      EXPECT_GE(m.average_mse(e, a, Group::Area), 0.0);
    }
}

TEST(Study, ByteIdenticalAcrossRunsAndWorkers) {
  EXPECT_EQ(sae::testing::check_worker_determinism(6), "");
  auto cfg = sae::testing::small_study_config(6);
  const auto a = run_study(cfg);
  const auto b = run_study(cfg);
  EXPECT_EQ(sae::testing::compare_metrics(a, b), "");
  std::ostringstream ta;
  std::ostringstream tb;
  write_tables_csv(ta, emit_tables(a, "custom", "small"));
  write_tables_csv(tb, emit_tables(b, "custom", "small"));
  EXPECT_EQ(ta.str(), tb.str());
}

TEST(Study, PoliciesAreHonoured) {
  auto cfg = sae::testing::small_study_config(7);
  cfg.replicates = 5;
  cfg.censuses = 3;
  cfg.sample_policy = SamplePolicy::Fixed;
  const auto fixed = run_study(cfg);
  for (auto c : fixed.sampled_count) EXPECT_TRUE(c == 0 || c == 5);

  cfg.sample_policy = SamplePolicy::Redraw;
  cfg.scenario.poverty_line = PovertyLinePolicy::PerPopulation;
  const auto ctx = prepare_study(cfg);
  EXPECT_FALSE(ctx.reference_line.has_value());
  EXPECT_NO_THROW(run_study(cfg));
  cfg.scenario.poverty_line = PovertyLinePolicy::FixedReference;
  EXPECT_TRUE(prepare_study(cfg).reference_line.has_value());
}

TEST(Study, ReplicateErrorsAreTagged) {
  auto cfg = sae::testing::small_study_config(8);
  cfg.scenario.layout = PopulationLayout::balanced(2, 2, 1);
  cfg.sampling.design = SamplingDesign::uniform(1, 1);
  try {
    run_study(cfg);
    FAIL();
  } catch (const ReplicateError& e) {
    EXPECT_EQ(e.replicate(), 0u);
    EXPECT_NE(std::string(e.what()).find("replicate 1"), std::string::npos);
  }
}

TEST(Study, ConfigValidation) {
  auto cfg = sae::testing::small_study_config(9);
  cfg.replicates = 0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = sae::testing::small_study_config(9);
  cfg.censuses = 0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = sae::testing::small_study_config(9);
  cfg.sampling.design = SamplingDesign::uniform(7, 1);
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

TEST(Report, Scaling) {
  const auto layout = PopulationLayout::balanced(1, 1, 1);
  StudyAccumulator acc(layout, {EstimatorKind::ELL}, {0});
  acc.add(mock_outcome({0.0}, {std::sqrt(0.055744)}, {0.0}, {-0.031}, {1}));
  const auto m = std::move(acc).finish();
  const auto rows = emit_boxplot_data(m, "I", "e_skew");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].mse_x1e4, 557.44, 1e-9);
  EXPECT_EQ(rows[0].group, Group::Area);
  EXPECT_NEAR(rows[1].bias_x100, -3.1, 1e-12);
  EXPECT_EQ(rows[1].area, 1u);
  EXPECT_EQ(rows[1].subarea, 1u);
  const auto table = emit_tables(m, "I", "e_skew");
  EXPECT_NEAR(table.front().avg_mse_x1e4, 557.44, 1e-9);
  EXPECT_EQ(table.front().indicator, "inc");
  EXPECT_EQ(indicator_name(1), "gap");
  EXPECT_EQ(indicator_name(2), "sev");
}

TEST(Report, BoxplotRowCountCaseOne) {
  const auto layout = PopulationLayout::balanced(40, 10, 50);
  StudyAccumulator acc(layout, {EstimatorKind::ELL, EstimatorKind::MELL1, EstimatorKind::MELL2}, {0, 1});
  ReplicateOutcome o;
  o.truth.area.assign(2, std::vector<double>(40, 0.1));
  o.truth.subarea.assign(2, std::vector<double>(400, 0.1));
  FgtEstimates est;
  est.area_estimate = o.truth.area;
  est.subarea_estimate = o.truth.subarea;
  o.estimates = {est, est, est};
  o.subarea_sampled.assign(400, 1);
  acc.add(o);
  const auto rows = emit_boxplot_data(std::move(acc).finish(), "I", "e_skew");
  std::size_t sub = 0;
  std::size_t area = 0;
  for (const auto& r : rows) (r.group == Group::Area ? area : sub) += 1;
  EXPECT_EQ(sub, 3u * 2u * 400u);
  EXPECT_EQ(area, 3u * 2u * 40u);
}

TEST(Report, TablesFromEntitiesMatchDirectTables) {
  const auto m = run_study(sae::testing::small_study_config(10));
  const auto rows = emit_boxplot_data(m, "custom", "small");
  std::stringstream ss;
  write_entities_csv(ss, rows);
  const auto back = read_entities_csv(ss);
  const auto direct = emit_tables(m, "custom", "small");
  const auto rebuilt = tables_from_entities(back);
  ASSERT_EQ(direct.size(), rebuilt.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_EQ(direct[i].group, rebuilt[i].group);
    EXPECT_EQ(direct[i].estimator, rebuilt[i].estimator);
    EXPECT_EQ(direct[i].indicator, rebuilt[i].indicator);
    EXPECT_NEAR(direct[i].avg_mse_x1e4, rebuilt[i].avg_mse_x1e4, 1e-9 * std::max(1.0, direct[i].avg_mse_x1e4));
    EXPECT_NEAR(direct[i].avg_bias_x100, rebuilt[i].avg_bias_x100, 1e-9);
  }
  // Every group appears for every estimator and alpha: area, subarea, sampled, non-sampled.
  EXPECT_EQ(direct.size(), 4u * 2u * 4u);
}

TEST(Report, EntitiesCsvRejectsBadRows) {
  std::istringstream bad_header("case,scenario\n");
  EXPECT_THROW(read_entities_csv(bad_header), InvalidInput);
  std::istringstream bad_value(
      "case,scenario,estimator,alpha,d,j_or_blank,mse_x1e4,bias_x100,group,replicates\n"
      "I,e_skew,ELL,0,1,,oops,0,area,200\n");
  try {
    read_entities_csv(bad_value);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(Report, GroupNames) {
  for (auto g : {Group::Area, Group::Subarea, Group::SampledSubarea, Group::NonsampledSubarea})
    EXPECT_EQ(parse_group(to_string(g)), g);
  EXPECT_THROW(parse_group("district"), InvalidInput);
}
