#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sae/rng.hpp"

namespace sae {

/**
 * Skew normal SN(location, scale^2, shape) calibrated so that the variate has
 * mean zero and standard deviation `target_sd`.
 *
 * With delta = shape / sqrt(1 + shape^2):
 *   scale    = target_sd / sqrt(1 - 2 delta^2 / pi)
 *   location = -scale * delta * sqrt(2 / pi)
 * A shape of zero is exactly N(0, target_sd^2).
 */
class SkewNormalSpec {
 public:
  SkewNormalSpec(double shape, double target_sd);

  [[nodiscard]] double shape() const noexcept { return shape_; }
  [[nodiscard]] double target_sd() const noexcept { return target_sd_; }
  [[nodiscard]] double delta() const noexcept { return delta_; }
  [[nodiscard]] double location() const noexcept { return location_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }

  /// Closed-form moments of SN(location, scale^2, shape).
  [[nodiscard]] double mean() const noexcept;
  [[nodiscard]] double variance() const noexcept;
  [[nodiscard]] double skewness() const noexcept;

  /// One draw: location + scale * (delta |Z0| + sqrt(1 - delta^2) Z1).
  double draw(RngStream& rng) const noexcept;

  friend bool operator==(const SkewNormalSpec&, const SkewNormalSpec&) = default;

 private:
  double shape_;
  double target_sd_;
  double delta_;
  double scale_;
  double location_;
};

std::vector<double> sample_skew_normal(const SkewNormalSpec& spec, std::size_t n, RngStream& rng);

/**
 * Lower-triangular factor L with L L^T = cov, for drawing multivariate
 * normals. Plain Cholesky is tried first; on failure a diagonal jitter of
 * 1e-12 * trace / p is added once. Zero and rank-deficient PSD matrices are
 * handled by an LDL^T fallback. Throws NumericError otherwise.
 */
class MvnFactor {
 public:
  explicit MvnFactor(const Eigen::MatrixXd& cov);

  [[nodiscard]] const Eigen::MatrixXd& lower() const noexcept { return lower_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return lower_.rows(); }

  Eigen::VectorXd draw(const Eigen::VectorXd& mean, RngStream& rng) const;

 private:
  Eigen::MatrixXd lower_;
};

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng);

/// n uniform-with-replacement draws from `values`. Throws InvalidInput when empty.
std::vector<double> empirical_draw(std::span<const double> values, std::size_t n, RngStream& rng);

/// Returns 1 with probability p. Throws InvalidParameter unless 0 <= p <= 1.
int sample_bernoulli(double p, RngStream& rng);

}  // namespace sae
