#include "sae/model_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sae/error.hpp"

namespace sae {

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw InvalidInput("fit_ols: y and X have different row counts");
  if (p == 0) throw InvalidInput("fit_ols: no covariates");
  if (n <= p) {
    throw InvalidInput("fit_ols: need more observations than covariates (n = " + std::to_string(n) +
                       ", p = " + std::to_string(p) + ")");
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd diag = qr.matrixR().diagonal().cwiseAbs().head(p);
  if (!(diag.minCoeff() >= 1e-10 * diag.maxCoeff()) || diag.maxCoeff() == 0.0) {
    throw SingularDesign("fit_ols: design matrix is rank deficient");
  }

  OlsFit fit;
  fit.beta_hat = qr.solve(y);
  fit.residuals = y - x * fit.beta_hat;
  fit.sigma2_hat = fit.residuals.squaredNorm() / static_cast<double>(n - p);

  // X P = Q R  =>  (X^T X)^{-1} = P R^{-1} R^{-T} P^T.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();
  fit.cov_beta = fit.sigma2_hat * 0.5 * (xtx_inv + xtx_inv.transpose());
  return fit;
}

OlsFit fit_ols(const SampleData& sample) {
  sample.validate();
  return fit_ols(sample.x, sample.y);
}

std::size_t RandomEffectEstimates::area_slot(std::size_t d) const {
  return d < area_lookup.size() ? area_lookup[d] : npos;
}

std::size_t RandomEffectEstimates::subarea_slot(std::size_t s) const {
  return s < subarea_lookup.size() ? subarea_lookup[s] : npos;
}

RandomEffectEstimates decompose_residuals(const OlsFit& fit, const SampleData& sample) {
  sample.validate();
  const std::size_t n = sample.size();
  if (static_cast<std::size_t>(fit.residuals.size()) != n) {
    throw InvalidInput("decompose_residuals: fit and sample sizes differ");
  }
  if (n == 0) throw InvalidInput("decompose_residuals: empty sample");
  RandomEffectEstimates est;
  std::vector<double> subarea_mean;
  std::vector<double> area_sum;
  std::vector<std::size_t> area_count;

  for (std::size_t i = 0; i < n;) {
    const std::size_t d = sample.area[i];
    if (est.area_label.empty() || est.area_label.back() != d) {
      est.area_label.push_back(d);
      area_sum.push_back(0.0);
      area_count.push_back(0);
    }
    const std::size_t s = sample.subarea[i];
    std::size_t end = i;
    double sum = 0.0;
    while (end < n && sample.subarea[end] == s) sum += fit.residuals[static_cast<Eigen::Index>(end++)];
    const std::size_t count = end - i;
    est.subarea_label.push_back(s);
    est.subarea_area.push_back(est.area_label.size() - 1);
    est.subarea_count.push_back(count);
    subarea_mean.push_back(sum / static_cast<double>(count));
    area_sum.back() += sum;
    area_count.back() += count;
    i = end;
  }

  est.u_hat.resize(est.area_label.size());
  for (std::size_t a = 0; a < est.u_hat.size(); ++a) {
    est.u_hat[a] = area_sum[a] / static_cast<double>(area_count[a]);
  }
  est.v_hat.resize(est.subarea_label.size());
  est.e_hat.resize(n);
  std::size_t row = 0;
  for (std::size_t t = 0; t < est.subarea_label.size(); ++t) {
    est.v_hat[t] = subarea_mean[t] - est.u_hat[est.subarea_area[t]];
    for (std::size_t k = 0; k < est.subarea_count[t]; ++k, ++row) {
      est.e_hat[row] = fit.residuals[static_cast<Eigen::Index>(row)] - subarea_mean[t];
    }
  }

  const std::size_t max_area = *std::max_element(est.area_label.begin(), est.area_label.end());
  est.area_lookup.assign(max_area + 1, RandomEffectEstimates::npos);
  for (std::size_t a = 0; a < est.area_label.size(); ++a) est.area_lookup[est.area_label[a]] = a;
  const std::size_t max_sub = est.subarea_label.back();
  est.subarea_lookup.assign(max_sub + 1, RandomEffectEstimates::npos);
  for (std::size_t t = 0; t < est.subarea_label.size(); ++t) est.subarea_lookup[est.subarea_label[t]] = t;
  return est;
}

OneFoldEffects decompose_onefold(const OlsFit& fit, const SampleData& sample) {
  sample.validate();
  const std::size_t n = sample.size();
  if (static_cast<std::size_t>(fit.residuals.size()) != n) {
    throw InvalidInput("decompose_onefold: fit and sample sizes differ");
  }
  OneFoldEffects eff;
  eff.e_hat.resize(n);
  for (std::size_t i = 0; i < n;) {
    const std::size_t s = sample.subarea[i];
    std::size_t end = i;
    double sum = 0.0;
    while (end < n && sample.subarea[end] == s) sum += fit.residuals[static_cast<Eigen::Index>(end++)];
    const double mean = sum / static_cast<double>(end - i);
    eff.cluster_label.push_back(s);
    eff.cluster_count.push_back(end - i);
    eff.u_hat.push_back(mean);
    for (std::size_t r = i; r < end; ++r) eff.e_hat[r] = fit.residuals[static_cast<Eigen::Index>(r)] - mean;
    i = end;
  }
  return eff;
}

OneFoldFit fit_onefold(const SampleData& sample) {
  OneFoldFit out{fit_ols(sample), {}};
  out.effects = decompose_onefold(out.ols, sample);
  return out;
}

}  // namespace sae
