#include "wellposed/fisher.hpp"

#include <cmath>

namespace wellposed {

namespace {
constexpr double kSpectrumClampTol = 1e-12;
constexpr double kTwoPiE = 2.0 * M_PI * M_E;
}  // namespace

Matrix fisher_gaussian_general(const std::vector<Vector>& mu_partials,
                               const std::vector<Matrix>& sigma_partials,
                               const Matrix& sigma) {
  if (mu_partials.size() != sigma_partials.size()) {
    throw DimensionMismatch("mu and sigma partial lists differ in length");
  }
  const auto n_params = static_cast<Eigen::Index>(mu_partials.size());
  const auto d = sigma.rows();
  for (const auto& dm : mu_partials) {
    if (dm.size() != d) throw DimensionMismatch("mu partial has wrong length");
  }
  for (const auto& ds : sigma_partials) {
    if (ds.rows() != d || ds.cols() != d) {
      throw DimensionMismatch("sigma partial has wrong shape");
    }
  }
  require_spd(sigma, "sigma");
  const Matrix sigma_inv = sigma.llt().solve(Matrix::Identity(d, d));

  Matrix fi(n_params, n_params);
  for (Eigen::Index i = 0; i < n_params; ++i) {
    const Matrix si = sigma_inv * sigma_partials[static_cast<size_t>(i)];
    for (Eigen::Index j = i; j < n_params; ++j) {
      const Matrix sj = sigma_inv * sigma_partials[static_cast<size_t>(j)];
      double v = mu_partials[static_cast<size_t>(i)].dot(
          sigma_inv * mu_partials[static_cast<size_t>(j)]);
      v += 0.5 * (si * sj).trace();
      fi(i, j) = v;
      fi(j, i) = v;
    }
  }
  return fi;
}

double fisher_signal_tau2(int q, double tau2) {
  if (tau2 <= 0.0) throw NotPositiveDefinite("tau2", tau2);
  return 0.5 * q / (tau2 * tau2);
}

Matrix psi_matrix(const Matrix& h, const Matrix& sigma) {
  if (sigma.rows() != h.rows()) {
    throw DimensionMismatch("sigma must be q x q with q = rows(H)");
  }
  const Matrix w = inv_sqrt_sym(sigma, "sigma");
  const Matrix wh = w * h;
  return wh * wh.transpose();
}

Vector clamp_spectrum(Vector values) {
  if (values.size() == 0) return values;
  const double cutoff = kSpectrumClampTol * std::max(values[0], 0.0);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < cutoff) values[i] = 0.0;
  }
  return values;
}

Vector psi_eigenvalues(const Matrix& h, const Matrix& sigma) {
  return clamp_spectrum(eig_sym(psi_matrix(h, sigma)).values);
}

double fisher_observed_tau2_from_spectrum(const Vector& psi_eigs, double tau2) {
  if (tau2 <= 0.0) throw NotPositiveDefinite("tau2", tau2);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < psi_eigs.size(); ++i) {
    const double r = psi_eigs[i] / (1.0 + tau2 * psi_eigs[i]);
    sum += r * r;
  }
  return 0.5 * sum;
}

double fisher_observed_tau2(const Matrix& h, const Matrix& sigma, double tau2) {
  return fisher_observed_tau2_from_spectrum(psi_eigenvalues(h, sigma), tau2);
}

FisherBlocks fisher_blocks_linear(const Matrix& h, const Matrix& sigma, double tau2,
                                  bool for_signal) {
  const auto q = h.rows();
  const auto p = h.cols();
  if (q > p) throw DimensionMismatch("fisher_blocks_linear assumes q <= p");
  if (numeric_rank(h) < q) {
    throw RankDeficient("H must have full rank q for the Fisher blocks");
  }
  const Matrix hht = h * h.transpose();
  const Matrix hht_inv = hht.llt().solve(Matrix::Identity(q, q));

  FisherBlocks out;
  if (for_signal) {
    out.mean_block = (1.0 / tau2) * h.transpose() * hht_inv * h;
    out.var_block = fisher_signal_tau2(static_cast<int>(q), tau2);
  } else {
    const Matrix inner = Matrix::Identity(q, q) + sigma * hht_inv / tau2;
    const Matrix inner_inv = inner.partialPivLu().solve(Matrix::Identity(q, q));
    out.mean_block = (1.0 / tau2) * h.transpose() * hht_inv * inner_inv * h;
    out.var_block = fisher_observed_tau2(h, sigma, tau2);
  }
  return out;
}

double entropy_gaussian(const Matrix& gamma) {
  const auto d = gamma.rows();
  const EigenDecomposition ed = eig_sym(gamma);
  if (ed.values[d - 1] <= 0.0) {
    throw NotPositiveDefinite("gamma", ed.values[d - 1]);
  }
  return 0.5 * (d * std::log(kTwoPiE) + ed.values.array().log().sum());
}

double entropy_gaussian_1d(double variance) {
  if (variance <= 0.0) throw NotPositiveDefinite("variance", variance);
  return 0.5 * std::log(kTwoPiE * variance);
}

}  // namespace wellposed
