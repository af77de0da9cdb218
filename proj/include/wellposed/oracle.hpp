#pragma once

#include <cstdint>

#include "wellposed/forward.hpp"
#include "wellposed/model.hpp"
#include "wellposed/rng.hpp"

namespace wellposed {

struct OracleResult {
  double estimate = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

struct SobolEstimate {
  double s_x = 0.0;
  double s_eps = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

/// Monte-Carlo first-order Sobol indices of the additive scalar model
/// Y* = g(X) + eps, using Var[E(Y*|X)] = Var[g(X)].
SobolEstimate mc_sobol_indices(const ForwardModel& forward, const InputModel& input,
                               const NoiseModel& noise, int n, std::uint64_t seed);

/// Central second difference of -1/2 ln det(tau2 HH' + Sigma); an independent
/// route to the observed-information value. Default step h = 1e-4 * tau2.
double fd_fisher_tau2(const Matrix& h, const Matrix& sigma, double tau2, double step = 0.0);

/// Sample variance of the analytic tau2-score over draws of Y*; the CLT check
/// of the closed form.
OracleResult score_variance_fi(const Matrix& h, const Matrix& sigma, double tau2, int n,
                               std::uint64_t seed);

/// (1/n) sum g(x_i) g(x_i)' over x_i ~ N(0, gamma).
Matrix mc_second_moment(const Evaluator& g, const Matrix& gamma, int q, int n,
                        std::uint64_t seed);

struct TraceBoundResult {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds = false;
};

/// Sandwich min(d) Tr(A) <= Tr(DA) <= max(d) Tr(A) for D = diag(d), A SPD.
TraceBoundResult trace_bound_check(const Vector& d_values, const Matrix& a);

}  // namespace wellposed
