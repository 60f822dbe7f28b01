#include "sae/study.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace sae {

ScenarioSpec ScenarioSpec::preset(const std::string& name) {
  double lambda_v = 0.0;
  double lambda_e = 0.0;
  if (name == "all_normal") {
  } else if (name == "e_skew") {
    lambda_e = 3.0;
  } else if (name == "ve_skew") {
    lambda_v = 1.0;
    lambda_e = 3.0;
  } else {
    throw InvalidInput("unknown scenario '" + name + "' (expected all_normal, e_skew or ve_skew)");
  }
  Eigen::VectorXd beta(3);
  beta << 3.0, 0.03, -0.04;
  ScenarioSpec spec{name,
                    ModelParams{beta, SkewNormalSpec(0.0, 0.5), SkewNormalSpec(lambda_v, 0.25),
                                SkewNormalSpec(lambda_e, 0.5)},
                    PopulationLayout::balanced(40, 10, 50)};
  return spec;
}

SamplingCase SamplingCase::preset(const std::string& name) {
  if (name == "I") return {"I", SamplingDesign::uniform(10, 10)};
  if (name == "II") return {"II", SamplingDesign::uniform(5, 20)};
  throw InvalidInput("unknown sampling case '" + name + "' (expected I or II)");
}

void StudyConfig::validate() const {
  if (replicates == 0) throw InvalidInput("replicate count I must be at least 1");
  if (censuses == 0) throw InvalidInput("census count B must be at least 1");
  if (estimators.empty()) throw InvalidInput("no estimators selected");
  if (scenario.alphas.empty()) throw InvalidInput("no FGT alphas selected");
  for (int a : scenario.alphas) {
    if (a < 0 || a > 2) throw InvalidInput("FGT alpha must be 0, 1 or 2");
  }
  if (!(scenario.poverty_fraction > 0.0)) throw InvalidInput("poverty fraction must be positive");
  if (static_cast<std::size_t>(scenario.model.beta.size()) != 3) {
    throw InvalidInput("the study covariate generator produces p = 3; beta must have 3 entries");
  }
  sampling.design.validate(scenario.layout);
}

std::string_view to_string(Group group) {
  switch (group) {
    case Group::Area:
      return "area";
    case Group::Subarea:
      return "subarea";
    case Group::SampledSubarea:
      return "sampled_subarea";
    case Group::NonsampledSubarea:
      return "nonsampled_subarea";
  }
  return "?";
}

Group parse_group(std::string_view name) {
  for (auto g : {Group::Area, Group::Subarea, Group::SampledSubarea, Group::NonsampledSubarea}) {
    if (name == to_string(g)) return g;
  }
  throw InvalidInput("unknown group '" + std::string(name) + "'");
}

std::size_t StudyMetrics::estimator_index(EstimatorKind kind) const {
  const auto it = std::find(estimators.begin(), estimators.end(), kind);
  if (it == estimators.end()) throw InvalidInput("estimator " + std::string(to_string(kind)) + " not in study");
  return static_cast<std::size_t>(it - estimators.begin());
}

std::size_t StudyMetrics::alpha_index(int alpha) const {
  const auto it = std::find(alphas.begin(), alphas.end(), alpha);
  if (it == alphas.end()) throw InvalidInput("alpha " + std::to_string(alpha) + " not in study");
  return static_cast<std::size_t>(it - alphas.begin());
}

namespace {

template <class Value>
double entity_mean(const std::vector<ErrorSums>& sums, Value value) {
  if (sums.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : sums) s += value(e);
  return s / static_cast<double>(sums.size());
}

ErrorSums pooled(const std::vector<std::array<ErrorSums, 2>>& split, std::size_t status) {
  ErrorSums out;
  for (const auto& pair : split) {
    out.error += pair[status].error;
    out.squared += pair[status].squared;
    out.count += pair[status].count;
  }
  return out;
}

}  // namespace

double StudyMetrics::average_mse(std::size_t e, std::size_t a, Group group) const {
  switch (group) {
    case Group::Area:
      return entity_mean(area[e][a], [](const ErrorSums& s) { return s.mse(); });
    case Group::Subarea:
      return entity_mean(subarea[e][a], [](const ErrorSums& s) { return s.mse(); });
    case Group::SampledSubarea:
      return pooled(split[e][a], 0).mse();
    case Group::NonsampledSubarea:
      return pooled(split[e][a], 1).mse();
  }
  return 0.0;
}

double StudyMetrics::average_bias(std::size_t e, std::size_t a, Group group) const {
  switch (group) {
    case Group::Area:
      return entity_mean(area[e][a], [](const ErrorSums& s) { return s.bias(); });
    case Group::Subarea:
      return entity_mean(subarea[e][a], [](const ErrorSums& s) { return s.bias(); });
    case Group::SampledSubarea:
      return pooled(split[e][a], 0).bias();
    case Group::NonsampledSubarea:
      return pooled(split[e][a], 1).bias();
  }
  return 0.0;
}

std::size_t StudyMetrics::group_size(std::size_t e, std::size_t a, Group group) const {
  switch (group) {
    case Group::Area:
      return area[e][a].size();
    case Group::Subarea:
      return subarea[e][a].size();
    case Group::SampledSubarea:
      return pooled(split[e][a], 0).count;
    case Group::NonsampledSubarea:
      return pooled(split[e][a], 1).count;
  }
  return 0;
}

StudyAccumulator::StudyAccumulator(PopulationLayout layout, std::vector<EstimatorKind> estimators,
                                   std::vector<int> alphas) {
  metrics_.layout = std::move(layout);
  metrics_.estimators = std::move(estimators);
  metrics_.alphas = std::move(alphas);
  const std::size_t ne = metrics_.estimators.size();
  const std::size_t na = metrics_.alphas.size();
  const std::size_t areas = metrics_.layout.num_areas();
  const std::size_t subs = metrics_.layout.total_subareas();
  metrics_.area.assign(ne, std::vector<std::vector<ErrorSums>>(na, std::vector<ErrorSums>(areas)));
  metrics_.subarea.assign(ne, std::vector<std::vector<ErrorSums>>(na, std::vector<ErrorSums>(subs)));
  metrics_.split.assign(ne, std::vector<std::vector<std::array<ErrorSums, 2>>>(
                                na, std::vector<std::array<ErrorSums, 2>>(subs)));
  metrics_.sampled_count.assign(subs, 0);
}

void StudyAccumulator::add(const ReplicateOutcome& outcome) {
  auto& m = metrics_;
  const std::size_t areas = m.layout.num_areas();
  const std::size_t subs = m.layout.total_subareas();
  if (outcome.estimates.size() != m.estimators.size() || outcome.truth.area.size() != m.alphas.size() ||
      outcome.subarea_sampled.size() != subs) {
    throw InvalidInput("replicate outcome does not match the study shape");
  }
  for (std::size_t s = 0; s < subs; ++s) m.sampled_count[s] += outcome.subarea_sampled[s] ? 1 : 0;
  for (std::size_t e = 0; e < m.estimators.size(); ++e) {
    const auto& est = outcome.estimates[e];
    for (std::size_t a = 0; a < m.alphas.size(); ++a) {
      for (std::size_t d = 0; d < areas; ++d) {
        m.area[e][a][d].add(est.area_estimate[a][d] - outcome.truth.area[a][d]);
      }
      for (std::size_t s = 0; s < subs; ++s) {
        const double err = est.subarea_estimate[a][s] - outcome.truth.subarea[a][s];
        m.subarea[e][a][s].add(err);
        m.split[e][a][s][outcome.subarea_sampled[s] ? 0 : 1].add(err);
      }
    }
  }
  ++m.replicates;
}

StudyMetrics StudyAccumulator::finish() && { return std::move(metrics_); }

std::vector<FgtParams> make_fgt_params(double z, const std::vector<int>& alphas, double c) {
  std::vector<FgtParams> params;
  params.reserve(alphas.size());
  for (int a : alphas) params.emplace_back(z, a, c);
  return params;
}

StudyContext prepare_study(const StudyConfig& config) {
  config.validate();
  const RngStream master(config.seed);
  StudyContext ctx;
  auto cov_rng = master.substream(StreamPurpose::Covariates);
  ctx.census = std::make_shared<const CovariateCensus>(generate_covariates(config.scenario.layout, cov_rng));
  if (config.scenario.poverty_line == PovertyLinePolicy::FixedReference) {
    auto ref_rng = master.substream(StreamPurpose::ReferencePopulation);
    const auto reference = generate_population(ctx.census, config.scenario.model, ref_rng);
    ctx.reference_line = poverty_line(reference, config.scenario.poverty_fraction);
  }
  if (config.sample_policy == SamplePolicy::Fixed) {
    auto sample_rng = master.substream(StreamPurpose::Sample);
    ctx.fixed_sample = draw_sample(config.scenario.layout, config.sampling.design, sample_rng);
  }
  return ctx;
}

ReplicateOutcome run_replicate(const StudyConfig& config, const StudyContext& ctx, std::size_t replicate) {
  const auto& layout = config.scenario.layout;
  const RngStream rep =
      RngStream(config.seed).substream({static_cast<std::uint64_t>(StreamPurpose::Replicate), replicate});

  auto pop_rng = rep.substream(StreamPurpose::Population);
  const Population pop = generate_population(ctx.census, config.scenario.model, pop_rng);
  const double z =
      ctx.reference_line ? *ctx.reference_line : poverty_line(pop, config.scenario.poverty_fraction);
  const auto params = make_fgt_params(z, config.scenario.alphas);

  ReplicateOutcome out;
  out.truth = compute_fgt(pop.y, layout, params);

  std::optional<SampleIndex> drawn;
  if (!ctx.fixed_sample) {
    auto sample_rng = rep.substream(StreamPurpose::Sample);
    drawn = draw_sample(layout, config.sampling.design, sample_rng);
  }
  const SampleIndex& index = ctx.fixed_sample ? *ctx.fixed_sample : *drawn;
  out.subarea_sampled.resize(layout.total_subareas());
  for (std::size_t s = 0; s < layout.total_subareas(); ++s) out.subarea_sampled[s] = index.is_sampled_subarea(s);

  const SampleData sample = extract_sample(pop, index);
  const OlsFit fit = fit_ols(sample);
  const RandomEffectEstimates effects = decompose_residuals(fit, sample);
  const bool need_onefold = std::find(config.estimators.begin(), config.estimators.end(),
                                      EstimatorKind::ELL1_onefold) != config.estimators.end();
  std::optional<OneFoldEffects> onefold;
  if (need_onefold) onefold = decompose_onefold(fit, sample);

  const CensusSimulator sim(*ctx.census, index, fit, effects, onefold ? &*onefold : nullptr,
                            CensusOptions{config.subarea_pool, 1});
  const RngStream census_rng = rep.substream(StreamPurpose::Census);
  out.estimates.reserve(config.estimators.size());
  for (const auto kind : config.estimators) {
    out.estimates.push_back(run_estimator(kind, sim, params, config.censuses, census_rng));
  }
  return out;
}

StudyMetrics run_study(const StudyConfig& config, const StudyHooks& hooks) {
  const StudyContext ctx = prepare_study(config);
  const std::size_t total = config.replicates;
  std::vector<std::optional<ReplicateOutcome>> outcomes(total);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        outcomes[i] = run_replicate(config, ctx, i);
      } catch (const Error& e) {
        std::lock_guard lock(mutex);
        if (!error) error = std::make_exception_ptr(ReplicateError(i, e.what()));
        next = total;
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = total;
      }
      const std::size_t finished = ++done;
      if (hooks.progress) {
        std::lock_guard lock(mutex);
        hooks.progress(finished, total);
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, config.workers), total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  StudyAccumulator acc(config.scenario.layout, config.estimators, config.scenario.alphas);
  for (auto& o : outcomes) {
    acc.add(*o);
    o.reset();
  }
  return std::move(acc).finish();
}

}  // namespace sae
