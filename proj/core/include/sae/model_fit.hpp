#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "sae/sampling.hpp"

namespace sae {

/// Ordinary least squares fit with homoskedastic coefficient covariance.
struct OlsFit {
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd cov_beta;   ///< sigma2_hat * (X^T X)^{-1}
  Eigen::VectorXd residuals;  ///< y - X beta_hat, aligned with the sample rows
  double sigma2_hat = 0.0;    ///< ||r||^2 / (n - p)
};

/// Solves min ||y - X b|| by column-pivoted Householder QR.
/// Throws InvalidInput when n <= p and SingularDesign when the smallest |R_ii|
/// falls below 1e-10 times the largest.
OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
OlsFit fit_ols(const SampleData& sample);

/**
 * Residual decomposition of a two-fold fit:
 *   u_hat[a]  mean residual of sampled area a
 *   v_hat[s]  mean residual of sampled subarea s minus u_hat of its area
 *   e_hat[i]  residual of row i minus its subarea mean
 * Areas and subareas appear in sample order.
 */
struct RandomEffectEstimates {
  std::vector<std::size_t> area_label;       ///< zero-based area of each u_hat entry
  std::vector<double> u_hat;
  std::vector<std::size_t> subarea_label;    ///< flat subarea label of each v_hat entry
  std::vector<std::size_t> subarea_area;     ///< position in u_hat of the owning area
  std::vector<std::size_t> subarea_count;    ///< n_dj
  std::vector<double> v_hat;
  std::vector<double> e_hat;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  /// Position of area d in u_hat, or npos if the area is not sampled.
  [[nodiscard]] std::size_t area_slot(std::size_t d) const;
  /// Position of flat subarea s in v_hat, or npos if not sampled.
  [[nodiscard]] std::size_t subarea_slot(std::size_t s) const;

  std::vector<std::size_t> area_lookup;     ///< area label -> slot (npos when absent)
  std::vector<std::size_t> subarea_lookup;  ///< flat subarea label -> slot
};

RandomEffectEstimates decompose_residuals(const OlsFit& fit, const SampleData& sample);

/// One-fold variant: every sampled subarea is a single cluster t with
/// u_hat[t] = cluster residual mean and e_hat = residual - u_hat[t].
struct OneFoldEffects {
  std::vector<std::size_t> cluster_label;  ///< flat subarea label of each cluster
  std::vector<std::size_t> cluster_count;
  std::vector<double> u_hat;
  std::vector<double> e_hat;
};

struct OneFoldFit {
  OlsFit ols;
  OneFoldEffects effects;
};

OneFoldFit fit_onefold(const SampleData& sample);
OneFoldEffects decompose_onefold(const OlsFit& fit, const SampleData& sample);

}  // namespace sae
