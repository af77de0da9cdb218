#pragma once

#include <vector>

#include "wellposed/linalg.hpp"

namespace wellposed {

/// Block-diagonal Fisher information for theta = (mu, tau2).
struct FisherBlocks {
  Matrix mean_block;  // p x p, information about mu
  double var_block;   // information about tau2

  double trace() const { return mean_block.trace() + var_block; }
};

/// General Gaussian Fisher information matrix from parameter partials:
/// (i,j) = dmu_i' Sigma^{-1} dmu_j + 1/2 Tr(Sigma^{-1} dSigma_i Sigma^{-1} dSigma_j).
Matrix fisher_gaussian_general(const std::vector<Vector>& mu_partials,
                               const std::vector<Matrix>& sigma_partials,
                               const Matrix& sigma);

/// Information about tau2 carried by the noiseless signal HX: q / (2 tau^4).
double fisher_signal_tau2(int q, double tau2);

/// Psi = Sigma^{-1/2} H H' Sigma^{-1/2}, the noise-whitened signal Gram matrix.
Matrix psi_matrix(const Matrix& h, const Matrix& sigma);

/// Eigenvalues of Psi, descending, with values below 1e-12 * max clamped to zero.
Vector psi_eigenvalues(const Matrix& h, const Matrix& sigma);
Vector clamp_spectrum(Vector values);

/// Information about tau2 carried by the noisy observable:
/// 1/2 sum_i (lambda_i / (1 + tau2 lambda_i))^2 over the Psi spectrum.
double fisher_observed_tau2(const Matrix& h, const Matrix& sigma, double tau2);
double fisher_observed_tau2_from_spectrum(const Vector& psi_eigs, double tau2);

/// Full (mu, tau2) information blocks of the signal (for_signal) or observable.
FisherBlocks fisher_blocks_linear(const Matrix& h, const Matrix& sigma, double tau2,
                                  bool for_signal);

/// Differential entropy of N(mu, gamma): 1/2 (d ln(2 pi e) + ln det gamma).
double entropy_gaussian(const Matrix& gamma);
double entropy_gaussian_1d(double variance);

}  // namespace wellposed
