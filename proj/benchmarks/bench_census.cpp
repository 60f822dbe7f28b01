#include <benchmark/benchmark.h>

#include <memory>

#include "sae/census.hpp"
#include "sae/model_fit.hpp"
#include "sae/population.hpp"
#include "sae/sampling.hpp"
#include "sae/study.hpp"

namespace {

// One fitted Case I or Case II sample on the full 40 x 10 x 50 layout.
struct Fixture {
  std::shared_ptr<const sae::CovariateCensus> census;
  sae::Population population;
  sae::SampleIndex index;
  sae::SampleData sample;
  sae::OlsFit fit;
  sae::RandomEffectEstimates effects;
  sae::OneFoldEffects onefold;
  std::vector<sae::FgtParams> params;

  explicit Fixture(const std::string& case_name)
      : census(make_census()),
        population(make_population(census)),
        index(make_index(case_name)),
        sample(sae::extract_sample(population, index)),
        fit(sae::fit_ols(sample)),
        effects(sae::decompose_residuals(fit, sample)),
        onefold(sae::decompose_onefold(fit, sample)),
        params(sae::make_fgt_params(sae::poverty_line(population), {0, 1})) {}

  static std::shared_ptr<const sae::CovariateCensus> make_census() {
    auto rng = sae::RngStream(1).substream(sae::StreamPurpose::Covariates);
    return std::make_shared<const sae::CovariateCensus>(
        sae::generate_covariates(sae::PopulationLayout::balanced(40, 10, 50), rng));
  }
  static sae::Population make_population(std::shared_ptr<const sae::CovariateCensus> c) {
    auto rng = sae::RngStream(1).substream(sae::StreamPurpose::Population);
    return sae::generate_population(std::move(c), sae::ScenarioSpec::preset("e_skew").model, rng);
  }
  sae::SampleIndex make_index(const std::string& case_name) const {
    auto rng = sae::RngStream(1).substream(sae::StreamPurpose::Sample);
    return sae::draw_sample(census->layout(), sae::SamplingCase::preset(case_name).design, rng);
  }
};

const Fixture& case_fixture(int which) {
  static const Fixture one("I");
  static const Fixture two("II");
  return which == 1 ? one : two;
}

void BM_Census(benchmark::State& state, sae::EstimatorKind kind, int which) {
  const Fixture& f = case_fixture(which);
  const sae::CensusSimulator sim(*f.census, f.index, f.fit, f.effects, &f.onefold);
  const sae::RngStream rng(2);
  const auto censuses = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto run = sim.simulate(kind, f.params, censuses, rng);
    benchmark::DoNotOptimize(run);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20000);
}

void BM_FitAndDecompose(benchmark::State& state) {
  const Fixture& f = case_fixture(2);
  for (auto _ : state) {
    auto fit = sae::fit_ols(f.sample);
    auto re = sae::decompose_residuals(fit, f.sample);
    benchmark::DoNotOptimize(re);
  }
}

void BM_GeneratePopulation(benchmark::State& state) {
  const Fixture& f = case_fixture(1);
  const auto model = sae::ScenarioSpec::preset("ve_skew").model;
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto rng = sae::RngStream(3).substream(i++);
    auto pop = sae::generate_population(f.census, model, rng);
    benchmark::DoNotOptimize(pop);
  }
}

void BM_Replicate(benchmark::State& state) {
  sae::StudyConfig cfg;
  cfg.censuses = static_cast<std::size_t>(state.range(0));
  const auto ctx = sae::prepare_study(cfg);
  std::size_t i = 0;
  for (auto _ : state) {
    auto out = sae::run_replicate(cfg, ctx, i++);
    benchmark::DoNotOptimize(out);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Census, ell_case1, sae::EstimatorKind::ELL, 1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Census, mell1_case1, sae::EstimatorKind::MELL1, 1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Census, mell2_case2, sae::EstimatorKind::MELL2, 2)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Census, ell1_case2, sae::EstimatorKind::ELL1_onefold, 2)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitAndDecompose)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GeneratePopulation)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Replicate)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
