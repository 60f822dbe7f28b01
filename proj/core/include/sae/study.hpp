#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sae/census.hpp"
#include "sae/distributions.hpp"
#include "sae/error.hpp"
#include "sae/population.hpp"
#include "sae/sampling.hpp"

namespace sae {

enum class PovertyLinePolicy { FixedReference, PerPopulation };
enum class SamplePolicy { Redraw, Fixed };

/// Population-generating scenario.
struct ScenarioSpec {
  std::string name = "custom";
  ModelParams model;
  PopulationLayout layout;
  std::vector<int> alphas{0, 1};
  PovertyLinePolicy poverty_line = PovertyLinePolicy::FixedReference;
  double poverty_fraction = 0.6;

  /// all_normal, e_skew or ve_skew on the 40 x 10 x 50 layout with
  /// beta = (3, 0.03, -0.04) and sds (0.5, 0.25, 0.5). Throws InvalidInput for other names.
  static ScenarioSpec preset(const std::string& name);
};

/// Named sampling case: "I" (m_d = 10, n_dj = 10), "II" (m_d = 5, n_dj = 20) or "custom".
struct SamplingCase {
  std::string name = "custom";
  SamplingDesign design;

  static SamplingCase preset(const std::string& name);
};

struct StudyConfig {
  ScenarioSpec scenario = ScenarioSpec::preset("e_skew");
  SamplingCase sampling = SamplingCase::preset("I");
  std::size_t replicates = 200;
  std::size_t censuses = 100;
  std::vector<EstimatorKind> estimators{EstimatorKind::ELL, EstimatorKind::MELL1, EstimatorKind::MELL2};
  std::uint64_t seed = 1;
  unsigned workers = 1;
  SubareaPool subarea_pool = SubareaPool::Pooled;
  SamplePolicy sample_policy = SamplePolicy::Redraw;

  /// Throws InvalidInput on an infeasible design or empty counts.
  void validate() const;
};

/// A module error raised while processing one replicate.
class ReplicateError : public Error {
 public:
  ReplicateError(std::size_t replicate, const std::string& what)
      : Error(what + " (replicate " + std::to_string(replicate + 1) + ")"), replicate_(replicate) {}
  [[nodiscard]] std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

/// Entity groups reported in the tables.
enum class Group { Area, Subarea, SampledSubarea, NonsampledSubarea };
std::string_view to_string(Group group);
Group parse_group(std::string_view name);

/// Truths, estimates and sample membership of one replicate.
struct ReplicateOutcome {
  FgtMeasures truth;                    ///< [alpha][entity]
  std::vector<FgtEstimates> estimates;  ///< one per estimator, in StudyConfig order
  std::vector<char> subarea_sampled;    ///< per flat subarea
};

/// Running sums of errors and squared errors in one entity/group.
struct ErrorSums {
  double error = 0.0;
  double squared = 0.0;
  std::size_t count = 0;

  void add(double e) {
    error += e;
    squared += e * e;
    ++count;
  }
  [[nodiscard]] double bias() const { return count ? error / static_cast<double>(count) : 0.0; }
  [[nodiscard]] double mse() const { return count ? squared / static_cast<double>(count) : 0.0; }
};

/**
 * Empirical bias and MSE per (estimator, alpha, entity). Subarea sums are also
 * split by whether the subarea was sampled in the replicate (index 0: sampled,
 * 1: not sampled); the sampled/non-sampled group averages pool those sums.
 */
struct StudyMetrics {
  std::vector<EstimatorKind> estimators;
  std::vector<int> alphas;
  PopulationLayout layout;
  std::size_t replicates = 0;

  std::vector<std::vector<std::vector<ErrorSums>>> area;                   ///< [e][a][d]
  std::vector<std::vector<std::vector<ErrorSums>>> subarea;                ///< [e][a][s]
  std::vector<std::vector<std::vector<std::array<ErrorSums, 2>>>> split;  ///< [e][a][s][status]
  std::vector<std::size_t> sampled_count;                                  ///< replicates in which s was sampled

  /// Group average of per-entity MSE (Area, Subarea) or pooled MSE (sampled and non-sampled subareas).
  [[nodiscard]] double average_mse(std::size_t e, std::size_t a, Group group) const;
  [[nodiscard]] double average_bias(std::size_t e, std::size_t a, Group group) const;
  /// Number of (replicate, subarea) contributions in a subarea group or number of entities.
  [[nodiscard]] std::size_t group_size(std::size_t e, std::size_t a, Group group) const;

  [[nodiscard]] std::size_t estimator_index(EstimatorKind kind) const;
  [[nodiscard]] std::size_t alpha_index(int alpha) const;
};

/// Accumulates replicate outcomes; add() must be called in replicate order for bit-identical sums.
class StudyAccumulator {
 public:
  StudyAccumulator(PopulationLayout layout, std::vector<EstimatorKind> estimators, std::vector<int> alphas);

  void add(const ReplicateOutcome& outcome);
  [[nodiscard]] StudyMetrics finish() &&;
  [[nodiscard]] const StudyMetrics& metrics() const noexcept { return metrics_; }

 private:
  StudyMetrics metrics_;
};

/// Poverty lines for a replicate, one FgtParams per alpha.
std::vector<FgtParams> make_fgt_params(double z, const std::vector<int>& alphas, double c = 0.0);

struct StudyHooks {
  /// Called after each replicate finishes (from worker threads).
  std::function<void(std::size_t done, std::size_t total)> progress;
};

StudyMetrics run_study(const StudyConfig& config, const StudyHooks& hooks = {});

/// Replicate pipeline pieces, exposed for tests and the CLI.
struct StudyContext {
  std::shared_ptr<const CovariateCensus> census;
  std::optional<double> reference_line;   ///< set under FixedReference
  std::optional<SampleIndex> fixed_sample;
};
StudyContext prepare_study(const StudyConfig& config);
ReplicateOutcome run_replicate(const StudyConfig& config, const StudyContext& context, std::size_t replicate);

}  // namespace sae
