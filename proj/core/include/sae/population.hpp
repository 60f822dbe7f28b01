#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sae/distributions.hpp"
#include "sae/rng.hpp"

namespace sae {

/**
 * Index structure of a two-level finite population: D areas, M_d subareas in
 * area d, N_dj units in subarea (d, j). Indices are zero-based.
 *
 * Units are stored contiguously in (d, j, k) order; subareas get a flat
 * index in (d, j) order. Both offsets are precomputed.
 */
class PopulationLayout {
 public:
  PopulationLayout() = default;
  /// units[d][j] = N_dj. Throws InvalidInput on any empty level.
  explicit PopulationLayout(std::vector<std::vector<std::size_t>> units);
  /// Balanced layout: every area has `subareas` subareas of `units` units.
  static PopulationLayout balanced(std::size_t areas, std::size_t subareas, std::size_t units);

  [[nodiscard]] std::size_t num_areas() const noexcept { return units_.size(); }
  [[nodiscard]] std::size_t num_subareas(std::size_t d) const { return units_[d].size(); }
  [[nodiscard]] std::size_t total_subareas() const noexcept { return subarea_begin_.back(); }
  [[nodiscard]] std::size_t subarea_size(std::size_t d, std::size_t j) const { return units_[d][j]; }
  [[nodiscard]] std::size_t area_size(std::size_t d) const { return area_size_[d]; }
  [[nodiscard]] std::size_t total_units() const noexcept { return unit_offset_.back(); }

  /// Flat index of subarea (d, j).
  [[nodiscard]] std::size_t subarea_index(std::size_t d, std::size_t j) const {
    return subarea_begin_[d] + j;
  }
  /// First flat subarea index of area d.
  [[nodiscard]] std::size_t area_subarea_begin(std::size_t d) const { return subarea_begin_[d]; }
  /// Offset of the first unit of the flat subarea s; unit_offset(s + 1) ends it.
  [[nodiscard]] std::size_t unit_offset(std::size_t flat_subarea) const {
    return unit_offset_[flat_subarea];
  }
  [[nodiscard]] std::size_t unit_offset(std::size_t d, std::size_t j) const {
    return unit_offset_[subarea_index(d, j)];
  }
  /// Size of flat subarea s.
  [[nodiscard]] std::size_t flat_subarea_size(std::size_t s) const {
    return unit_offset_[s + 1] - unit_offset_[s];
  }
  /// Area that owns flat subarea s.
  [[nodiscard]] std::size_t area_of(std::size_t flat_subarea) const { return area_of_[flat_subarea]; }

  [[nodiscard]] const std::vector<std::vector<std::size_t>>& units() const noexcept { return units_; }

  friend bool operator==(const PopulationLayout& a, const PopulationLayout& b) {
    return a.units_ == b.units_;
  }

 private:
  std::vector<std::vector<std::size_t>> units_;
  std::vector<std::size_t> area_size_;
  std::vector<std::size_t> subarea_begin_{0};
  std::vector<std::size_t> unit_offset_{0};
  std::vector<std::size_t> area_of_;
};

/// Census covariates: one p-vector per unit, row-major in layout unit order.
class CovariateCensus {
 public:
  CovariateCensus(PopulationLayout layout, std::size_t p, std::vector<double> x);

  [[nodiscard]] const PopulationLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::size_t num_covariates() const noexcept { return p_; }
  [[nodiscard]] std::span<const double> row(std::size_t unit) const {
    return {x_.data() + unit * p_, p_};
  }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return x_; }

  /// x_u^T beta for every unit.
  [[nodiscard]] std::vector<double> linear_predictor(const Eigen::VectorXd& beta) const;

 private:
  PopulationLayout layout_;
  std::size_t p_;
  std::vector<double> x_;
};

/// Intercept plus two Bernoulli covariates:
/// x1 ~ B(1, 0.2 + 0.4 d/D + 0.4 j/M_d) and x2 ~ B(1, 0.2) with 1-based d, j.
CovariateCensus generate_covariates(const PopulationLayout& layout, RngStream& rng);

struct ModelParams {
  Eigen::VectorXd beta;
  SkewNormalSpec area_effect;
  SkewNormalSpec subarea_effect;
  SkewNormalSpec unit_error;
};

/// Log-welfare y = x^T beta + u_d + v_dj + e_djk and welfare E = exp(y).
struct Population {
  std::shared_ptr<const CovariateCensus> census;
  std::vector<double> y;
  std::vector<double> welfare;
  std::vector<double> true_u;
  std::vector<double> true_v;

  [[nodiscard]] const PopulationLayout& layout() const { return census->layout(); }
};

Population generate_population(std::shared_ptr<const CovariateCensus> census, const ModelParams& params,
                               RngStream& rng);

/// Builds a population from given log-welfare values (effects unknown).
Population population_from_values(std::shared_ptr<const CovariateCensus> census, std::vector<double> y);

/// fraction * median(welfare). Even counts use the midpoint of the two central values.
double poverty_line(std::span<const double> welfare, double fraction = 0.6);
double poverty_line(const Population& population, double fraction = 0.6);

/// Poverty line z > 0, FGT exponent alpha in {0, 1, 2} and welfare shift c.
class FgtParams {
 public:
  FgtParams(double z, int alpha, double c = 0.0);

  [[nodiscard]] double z() const noexcept { return z_; }
  [[nodiscard]] int alpha() const noexcept { return alpha_; }
  [[nodiscard]] double c() const noexcept { return c_; }

  friend bool operator==(const FgtParams&, const FgtParams&) = default;

 private:
  double z_;
  int alpha_;
  double c_;
};

/// h_alpha(y) = ((z - E) / z)^alpha * 1{E < z} with E = exp(y) - c.
double fgt_unit(double y, const FgtParams& fgt) noexcept;

/// Evaluates h_alpha for several parameter sets at once.
///
/// Skips the exponential for units well above every poverty threshold; the
/// returned values are identical to calling fgt_unit one parameter at a time.
class FgtEvaluator {
 public:
  explicit FgtEvaluator(std::span<const FgtParams> params);

  [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }
  [[nodiscard]] const std::vector<FgtParams>& params() const noexcept { return params_; }

  /// Adds h_alpha(y) for every parameter set into acc[0..size).
  void accumulate(double y, double* acc) const noexcept {
    if (y >= max_cutoff_) return;
    for (std::size_t a = 0; a < params_.size(); ++a) {
      if (y < cutoff_[a]) acc[a] += fgt_unit(y, params_[a]);
    }
  }

 private:
  std::vector<FgtParams> params_;
  std::vector<double> cutoff_;
  double max_cutoff_;
};

/// Subarea value: mean of its unit values.
double fgt_subarea(std::span<const double> unit_values);

/// Area value sum_j N_dj F_dj / N_d from the subarea values of area d.
double fgt_area(std::span<const double> subarea_values, const PopulationLayout& layout, std::size_t d);

/// Area and subarea FGT measures for each parameter set.
/// area[a][d] and subarea[a][flat subarea index].
struct FgtMeasures {
  std::vector<std::vector<double>> area;
  std::vector<std::vector<double>> subarea;
};

FgtMeasures compute_fgt(std::span<const double> y, const PopulationLayout& layout,
                        std::span<const FgtParams> params);

/// Columnar CSV with header d,j,k,x2..xp,y (1-based labels; x1 is the intercept).
void write_population_csv(std::ostream& out, const Population& population);
/// Inverse of write_population_csv; rows must be sorted by (d, j, k) with k contiguous.
/// Throws InvalidInput naming the row on malformed input.
Population read_population_csv(std::istream& in);

}  // namespace sae
