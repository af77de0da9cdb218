#pragma once

#include <cstdint>
#include <vector>

#include "wellposed/conditions.hpp"
#include "wellposed/forward.hpp"

namespace wellposed {

enum class LinearizeStrategy { taylor, mse, kl };

struct LinearizedModel {
  Matrix h_x0;    // q x p
  Vector x0;      // linearization point (taylor) or zero for the fitted strategies
  Vector offset;  // g(x0) - H_x0 x0 (taylor) or the fitted intercept u (mse)
  LinearizeStrategy strategy = LinearizeStrategy::taylor;
};

struct SurrogateQuality {
  double mse = 0.0;          // residual estimate, mse strategy
  double kl_residual = 0.0;  // ||H Gamma H' - M2||_F, kl strategy
  double fi_signal = 0.0;
};

/// Central-difference Jacobian, columnwise steps h_i = step * max(1, |x0_i|).
Matrix jacobian_fd(const Evaluator& g, const Vector& x0, double step = 1e-5);

/// First-order surrogate at x0; the shifted observable Y* - g(x0) + H x0 is
/// treated as N(H mu, tau2 H H' + Sigma).
LinearizedModel taylor_linearize(const Evaluator& g, const Vector& x0,
                                 double step = 1e-5);

struct LinearizedVerdicts {
  ConditionVerdict sufficient;
  ConditionVerdict necessary;
};

/// Sufficient and necessary Fisher conditions evaluated on the Jacobian at x0.
LinearizedVerdicts wellposed_linearized(const Evaluator& g, const Vector& x0,
                                        double tau2, const Matrix& sigma, double c,
                                        double fd_step = 1e-5);

struct LinearizationPointResult {
  Vector x0_star;
  std::vector<double> objective_trace;  // best objective after each evaluation
  double objective = 0.0;
};

/// Derivative-free search (Nelder-Mead with restarts from x_init and mu) for the
/// linearization point whose surrogate carries the most information about theta,
/// scalarized as Tr(mean block) + var block of the observed-model Fisher blocks.
LinearizationPointResult optimize_linearization_point(const Evaluator& g,
                                                      const ValidatedSpec& spec,
                                                      const Vector& x_init, int budget);

struct MseFitResult {
  Matrix h;
  Vector u;
  SurrogateQuality quality;
  ConditionVerdict fisher_feasibility;  // exact condition on the fitted H, post hoc
};

/// Least-squares linear surrogate from Monte-Carlo cross moments and analytic Gamma.
MseFitResult mse_linear_approx(const Evaluator& g, const Vector& mu, const Matrix& gamma,
                               const Matrix& sigma, double tau2_for_check, double c,
                               int n_samples, std::uint64_t seed);

struct KlFitResult {
  Matrix h;
  Matrix m2;  // estimated second moment of g(X)
  SurrogateQuality quality;
};

/// Moment-matched surrogate with H Gamma H' equal to the estimated E[g(X) g(X)'];
/// requires mu = 0 and uses the canonical Cholesky construction for determinism.
KlFitResult kl_optimal_fit(const Evaluator& g, const Vector& mu, const Matrix& gamma,
                           int q, int n_samples, std::uint64_t seed);

/// Frobenius residual of the moment-matching first-order condition.
double kl_optimal_check(const Matrix& h, const Matrix& gamma, const Matrix& m2);

struct ThetaTransform {
  Matrix theta;  // tau * H
  Matrix phi;    // Sigma^{-1/2} Theta Theta' Sigma^{-1/2}
  ConditionVerdict reduced_verdict;
};

/// Isotropic reduction Theta = tau H, Phi = tau^2 Psi; the reduced verdict
/// (sqrt(c)-1) min lambda^Phi > 1 matches the sufficient condition on H.
ThetaTransform theta_transform(double tau2, const Matrix& h, const Matrix& sigma,
                               double c);

}  // namespace wellposed
