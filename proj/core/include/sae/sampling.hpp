#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sae/population.hpp"
#include "sae/rng.hpp"

namespace sae {

/// Two-stage design: m_d subareas per area, then n_dj units per sampled subarea.
/// Each vector holds either one value for all areas or one value per area.
struct SamplingDesign {
  std::vector<std::size_t> subareas_per_area;
  std::vector<std::size_t> units_per_subarea;

  static SamplingDesign uniform(std::size_t m, std::size_t n) { return {{m}, {n}}; }

  [[nodiscard]] std::size_t subareas_in(std::size_t d) const;
  [[nodiscard]] std::size_t units_in(std::size_t d) const;

  /// Throws InvalidInput unless 1 <= m_d <= M_d and 1 <= n_dj <= N_dj for every subarea.
  void validate(const PopulationLayout& layout) const;
};

/**
 * Membership of a two-stage sample. Subarea lists per area and unit lists per
 * sampled subarea are sorted; membership queries are O(1).
 */
class SampleIndex {
 public:
  SampleIndex(PopulationLayout layout, std::vector<std::vector<std::size_t>> subareas,
              std::vector<std::vector<std::size_t>> units);

  /// Every unit of the layout.
  static SampleIndex census(const PopulationLayout& layout);

  [[nodiscard]] const PopulationLayout& layout() const noexcept { return layout_; }
  /// Sorted zero-based subarea labels j sampled in area d.
  [[nodiscard]] const std::vector<std::size_t>& sampled_subareas(std::size_t d) const {
    return subareas_[d];
  }
  /// Sorted zero-based unit labels k sampled in flat subarea s (empty if not sampled).
  [[nodiscard]] const std::vector<std::size_t>& sampled_units(std::size_t flat_subarea) const {
    return units_[flat_subarea];
  }
  [[nodiscard]] bool is_sampled_subarea(std::size_t flat_subarea) const {
    return subarea_member_[flat_subarea] != 0;
  }
  [[nodiscard]] bool is_sampled_unit(std::size_t unit) const { return unit_member_[unit] != 0; }
  [[nodiscard]] std::size_t sample_size() const noexcept { return sample_size_; }
  [[nodiscard]] std::size_t num_sampled_subareas() const noexcept { return num_sampled_subareas_; }

 private:
  PopulationLayout layout_;
  std::vector<std::vector<std::size_t>> subareas_;
  std::vector<std::vector<std::size_t>> units_;
  std::vector<char> subarea_member_;
  std::vector<char> unit_member_;
  std::size_t sample_size_ = 0;
  std::size_t num_sampled_subareas_ = 0;
};

/// Sorted simple random sample without replacement of k labels from [0, n).
std::vector<std::size_t> srswor(std::size_t n, std::size_t k, RngStream& rng);

SampleIndex draw_sample(const PopulationLayout& layout, const SamplingDesign& design, RngStream& rng);

/**
 * Observations for sampled units, in (d, j, k) order. `area` and `subarea`
 * hold the zero-based area label and flat subarea label of each row; `unit`
 * is the population unit index (when known).
 */
struct SampleData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::vector<std::size_t> area;
  std::vector<std::size_t> subarea;
  std::vector<std::size_t> unit;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
  /// Throws InvalidInput unless dimensions agree and rows are grouped by (area, subarea).
  void validate() const;
};

SampleData extract_sample(const Population& population, const SampleIndex& index);

}  // namespace sae
