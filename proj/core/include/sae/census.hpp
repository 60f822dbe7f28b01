#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sae/distributions.hpp"
#include "sae/model_fit.hpp"
#include "sae/population.hpp"
#include "sae/rng.hpp"
#include "sae/sampling.hpp"

namespace sae {

/// Simulated-census schemes.
///   ELL    y* = x'b*  + u*_d + v*_dj + e*
///   MELL1  y* = x'b^  + u^_d + v*_dj + e*
///   MELL2  y* = x'b^  + u^_d + (v^_dj if sampled else v*_dj) + e*
///   ELL1   y* = x'b*  + u*_t + e*      (one-fold, subarea t as the cluster)
enum class EstimatorKind { ELL, MELL1, MELL2, ELL1_onefold };

std::string_view to_string(EstimatorKind kind);
/// Accepts ELL, MELL1, MELL2, ELL1 (case-insensitive). Throws InvalidInput otherwise.
EstimatorKind parse_estimator(std::string_view name);

/// Where v* is drawn from: all estimated subarea effects, or only those of the same area.
enum class SubareaPool { Pooled, PerArea };

/// Per-census measures, laid out [alpha][census][entity].
class CensusRun {
 public:
  CensusRun(std::size_t alphas, std::size_t censuses, std::size_t areas, std::size_t subareas);

  [[nodiscard]] std::size_t alphas() const noexcept { return alphas_; }
  [[nodiscard]] std::size_t censuses() const noexcept { return censuses_; }
  [[nodiscard]] std::size_t areas() const noexcept { return areas_; }
  [[nodiscard]] std::size_t subareas() const noexcept { return subareas_; }

  double& area(std::size_t a, std::size_t b, std::size_t d) {
    return area_[(a * censuses_ + b) * areas_ + d];
  }
  [[nodiscard]] double area(std::size_t a, std::size_t b, std::size_t d) const {
    return area_[(a * censuses_ + b) * areas_ + d];
  }
  double& subarea(std::size_t a, std::size_t b, std::size_t s) {
    return subarea_[(a * censuses_ + b) * subareas_ + s];
  }
  [[nodiscard]] double subarea(std::size_t a, std::size_t b, std::size_t s) const {
    return subarea_[(a * censuses_ + b) * subareas_ + s];
  }
  /// Measures of census b for alpha a.
  [[nodiscard]] std::span<const double> area_row(std::size_t a, std::size_t b) const {
    return {area_.data() + (a * censuses_ + b) * areas_, areas_};
  }
  [[nodiscard]] std::span<const double> subarea_row(std::size_t a, std::size_t b) const {
    return {subarea_.data() + (a * censuses_ + b) * subareas_, subareas_};
  }

 private:
  std::size_t alphas_;
  std::size_t censuses_;
  std::size_t areas_;
  std::size_t subareas_;
  std::vector<double> area_;
  std::vector<double> subarea_;
};

/// Point estimates (mean over censuses) and naive MSEs, indexed [alpha][entity].
struct FgtEstimates {
  EstimatorKind kind = EstimatorKind::ELL;
  std::vector<FgtParams> params;
  std::vector<std::vector<double>> area_estimate;
  std::vector<std::vector<double>> area_mse;
  std::vector<std::vector<double>> subarea_estimate;
  std::vector<std::vector<double>> subarea_mse;
};

/// Naive MSE B^{-1} sum_b (F*(b) - mean)^2 for every area and subarea; zero when B = 1.
struct NaiveMse {
  std::vector<std::vector<double>> area;
  std::vector<std::vector<double>> subarea;
};
NaiveMse naive_mse(const CensusRun& run);

/// Mean over censuses and naive MSE.
FgtEstimates summarize(EstimatorKind kind, std::span<const FgtParams> params, const CensusRun& run);

/// Explicit draws for one census, as indices into the empirical pools.
/// `beta` is used only by ELL and ELL1; `subarea_pick` indexes the v^ pool
/// (two-fold, or the area's own pool under SubareaPool::PerArea) or the
/// cluster pool (ELL1); `unit_pick[u]` indexes the unit-error pool.
struct CensusDraw {
  Eigen::VectorXd beta;
  std::vector<std::size_t> area_pick;
  std::vector<std::size_t> subarea_pick;
  std::vector<std::size_t> unit_pick;
};

struct CensusOptions {
  SubareaPool subarea_pool = SubareaPool::Pooled;
  unsigned workers = 1;
};

/**
 * Generates simulated censuses from one fitted sample.
 *
 * Each census b reads its own stream rng/{b}; within it, beta* uses
 * {Beta}, u*_d uses {AreaEffect, d}, v*_dj uses {SubareaEffect, s} and the
 * unit errors of subarea s use {UnitError, s}. Because MELL1 and MELL2 share
 * these paths, they produce identical values on non-sampled subareas, and
 * results do not depend on the worker count.
 *
 * Units are processed subarea by subarea; simulated values are never stored.
 */
class CensusSimulator {
 public:
  /// `onefold` is required only for ELL1_onefold. Arguments must outlive the simulator.
  CensusSimulator(const CovariateCensus& census, const SampleIndex& index, const OlsFit& fit,
                  const RandomEffectEstimates& effects, const OneFoldEffects* onefold = nullptr,
                  CensusOptions options = {});

  /// Throws Unsupported when `kind` cannot be applied to this sample.
  void check_supported(EstimatorKind kind) const;

  [[nodiscard]] CensusRun simulate(EstimatorKind kind, std::span<const FgtParams> params, std::size_t censuses,
                                   const RngStream& rng) const;
  [[nodiscard]] CensusRun simulate(EstimatorKind kind, std::span<const FgtParams> params,
                                   std::span<const CensusDraw> draws) const;

  /// All simulated log-welfare values of census b (diagnostics and tests).
  [[nodiscard]] std::vector<double> simulated_values(EstimatorKind kind, std::size_t b,
                                                     const RngStream& rng) const;

  [[nodiscard]] const CovariateCensus& census() const noexcept { return census_; }

 private:
  template <class Drawer, class Sink>
  void run_census(EstimatorKind kind, Drawer& drawer, Sink& sink) const;

  const CovariateCensus& census_;
  const SampleIndex& index_;
  const OlsFit& fit_;
  const RandomEffectEstimates& effects_;
  const OneFoldEffects* onefold_;
  CensusOptions options_;
  std::vector<double> eta_hat_;
  std::optional<MvnFactor> beta_factor_;
  std::vector<std::vector<double>> area_v_pool_;
};

/// Simulates `censuses` censuses and summarizes them.
FgtEstimates run_estimator(EstimatorKind kind, const CensusSimulator& simulator, std::span<const FgtParams> params,
                           std::size_t censuses, const RngStream& rng);

/// Debug dump with columns kind,alpha,b,d,j,value (1-based labels, j blank for area rows).
void write_census_run_csv(std::ostream& out, EstimatorKind kind, std::span<const FgtParams> params,
                          const CensusRun& run, const PopulationLayout& layout);

}  // namespace sae
