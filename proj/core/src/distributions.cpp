#include "sae/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sae/error.hpp"

namespace sae {
namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

SkewNormalSpec::SkewNormalSpec(double shape, double target_sd) : shape_(shape), target_sd_(target_sd) {
  if (!(target_sd > 0.0) || !std::isfinite(target_sd)) {
    throw InvalidParameter("skew normal target_sd must be positive and finite, got " +
                           std::to_string(target_sd));
  }
  if (!std::isfinite(shape)) throw InvalidParameter("skew normal shape must be finite");
  delta_ = shape / std::sqrt(1.0 + shape * shape);
  scale_ = target_sd / std::sqrt(1.0 - 2.0 * delta_ * delta_ / std::numbers::pi);
  location_ = -scale_ * delta_ * kSqrt2OverPi;
}

double SkewNormalSpec::mean() const noexcept { return location_ + scale_ * delta_ * kSqrt2OverPi; }

double SkewNormalSpec::variance() const noexcept {
  return scale_ * scale_ * (1.0 - 2.0 * delta_ * delta_ / std::numbers::pi);
}

double SkewNormalSpec::skewness() const noexcept {
  const double m = delta_ * kSqrt2OverPi;
  return 0.5 * (4.0 - std::numbers::pi) * m * m * m / std::pow(1.0 - m * m, 1.5);
}

double SkewNormalSpec::draw(RngStream& rng) const noexcept {
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  return location_ + scale_ * (delta_ * std::abs(z0) + std::sqrt(1.0 - delta_ * delta_) * z1);
}

std::vector<double> sample_skew_normal(const SkewNormalSpec& spec, std::size_t n, RngStream& rng) {
  std::vector<double> out(n);
  for (auto& x : out) x = spec.draw(rng);
  return out;
}

MvnFactor::MvnFactor(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw InvalidInput("covariance matrix must be square");
  const Eigen::Index p = cov.rows();
  if (p == 0) return;
  if (!cov.isApprox(cov.transpose(), 1e-10) && !(cov - cov.transpose()).isZero(1e-14)) {
    throw InvalidInput("covariance matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    lower_ = llt.matrixL();
    return;
  }
  const double trace = cov.trace();
  if (trace > 0.0) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += 1e-12 * trace / static_cast<double>(p);
    Eigen::LLT<Eigen::MatrixXd> retry(jittered);
    if (retry.info() == Eigen::Success) {
      lower_ = retry.matrixL();
      return;
    }
  }
  // Singular PSD (including the zero matrix): L = P^T L_ldl sqrt(D).
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double tol = 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -tol).any()) {
    throw NumericError("covariance matrix is not positive semidefinite");
  }
  const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd l = ldlt.matrixL();
  l = l * d.asDiagonal();
  lower_ = ldlt.transpositionsP().transpose() * l;
}

Eigen::VectorXd MvnFactor::draw(const Eigen::VectorXd& mean, RngStream& rng) const {
  if (mean.size() != dim()) throw InvalidInput("mean and covariance dimensions differ");
  Eigen::VectorXd z(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) z[i] = rng.normal();
  return mean + lower_ * z;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
  return MvnFactor(cov).draw(mean, rng);
}

std::vector<double> empirical_draw(std::span<const double> values, std::size_t n, RngStream& rng) {
  if (values.empty()) throw InvalidInput("empirical_draw: empty value pool");
  std::vector<double> out(n);
  for (auto& x : out) x = values[rng.uniform_index(values.size())];
  return out;
}

int sample_bernoulli(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidParameter("bernoulli probability must lie in [0, 1], got " + std::to_string(p));
  }
  return rng.uniform() < p ? 1 : 0;
}

}  // namespace sae
