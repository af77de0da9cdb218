#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wellposed/fisher.hpp"
#include "wellposed/model.hpp"

namespace wellposed {

enum class VerdictKind { exact, sufficient, necessary };

/// One well-posedness inequality: holds iff margin = lhs - rhs is positive
/// (or nonnegative for the single non-strict condition).
struct ConditionVerdict {
  std::string name;
  VerdictKind kind = VerdictKind::exact;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool holds = false;
  bool strict = true;
  std::string equation;  // source equation label for traceability
  std::string note;
};

ConditionVerdict make_verdict(std::string name, VerdictKind kind, double lhs,
                              double rhs, std::string equation, bool strict = true);

enum class Overall { well_posed, ill_posed, inconclusive };

struct WellPosednessReport {
  std::vector<ConditionVerdict> verdicts;
  Overall overall = Overall::inconclusive;
  std::vector<std::string> notes;
  std::optional<IdentifiabilityVerdict> identifiability;
  std::optional<double> cond_number;
  std::optional<double> sobol_x;    // S_X when the scalar Sobol verdict applies
  std::optional<double> sobol_eps;  // S_eps likewise
};

struct SobolScalarVerdict {
  ConditionVerdict verdict;
  double s_x = 0.0;
  double s_eps = 0.0;
};

/// Scalar-output Sobol verdict: a' Gamma a > sigma2.
SobolScalarVerdict sobol_wellposed_scalar(const Vector& a, const Matrix& gamma,
                                          double sigma2);

/// Entropic verdict, equivalent to the Sobol one for scalar linear models.
ConditionVerdict entropy_wellposed_scalar(const Vector& a, const Matrix& gamma,
                                          double sigma2);

/// Sobol verdict through the central-difference gradient of g at mu.
SobolScalarVerdict sobol_wellposed_linearized(const Evaluator& g, const Vector& mu,
                                              const Matrix& gamma, double sigma2,
                                              double fd_step = 1e-5);

/// Exact Fisher-sense condition: sum_i 1/(1 + (tau2 lambda_i^Psi)^-1)^2 > q/c.
ConditionVerdict fisher_condition_exact(const Matrix& h, const Matrix& sigma,
                                        double tau2, double c);
ConditionVerdict fisher_condition_exact_from_spectrum(const Vector& psi_eigs,
                                                      double tau2, double c);

/// Commuting HH' and Sigma: sum_i (tau2 l_i^{HH'} / (tau2 l_i^{HH'} + l_i^Sigma))^2 > q/c.
ConditionVerdict fisher_condition_commuting(const Matrix& h, const Matrix& sigma,
                                            double tau2, double c);

struct IsotropicVerdicts {
  ConditionVerdict spectrum_sum;                   // always present
  std::optional<ConditionVerdict> equal_spectrum;  // shortcut when all eigenvalues equal
};

/// Isotropic noise Sigma = sigma2 I; emits the equal-spectrum shortcut when it applies.
IsotropicVerdicts fisher_condition_isotropic(const Matrix& h, double sigma2, double tau2,
                                             double c);

/// Sufficient: (sqrt(c) - 1) tau2 > 1 / min lambda_i^Psi.
ConditionVerdict sufficient_condition(const Matrix& h, const Matrix& sigma, double tau2,
                                      double c);

/// Necessary: (sqrt(c) - 1) tau2 > 1 / max lambda_i^Psi.
ConditionVerdict necessary_condition(const Matrix& h, const Matrix& sigma, double tau2,
                                     double c);

/// Sufficient, spectrum-free: (sqrt(c) - cond(HH')) tau2 >= max l^Sigma / min l^{HH'}.
ConditionVerdict sufficient_condition_condnum(const Matrix& h, const Matrix& sigma,
                                              double tau2, double c);

/// General-covariance sufficient condition: (sqrt(c)-1) min l^Gamma > 1 / min l^Psi.
ConditionVerdict general_gamma_condition(const Matrix& h, const Matrix& sigma,
                                         const Matrix& gamma, double c);

/// Default Fisher fraction constant.
double default_c();

struct IwSampleResult {
  std::vector<Matrix> samples;
  double acceptance_rate = 0.0;
  std::int64_t total_draws = 0;
};

/// Draws from Inverse-Wishart(lambda_scale, nu) conditioned on a' Gamma a > sigma2,
/// by rejection on Bartlett-sampled Wishart draws.
IwSampleResult constrained_iw_prior_sample(const Matrix& lambda_scale, double nu,
                                           const Vector& a, double sigma2, int n,
                                           std::uint64_t seed,
                                           std::int64_t max_draws = 1000000);

struct ReportOptions {
  enum class Linearize { none, at_point, optimize };
  Linearize linearize = Linearize::none;
  std::optional<Vector> x0;  // defaults to mu for at_point
  double fd_step = 1e-5;
  int opt_budget = 200;
};

/// Aggregated report over every applicable condition.
WellPosednessReport full_report(const ValidatedSpec& spec,
                                const ReportOptions& options = {});

const char* to_string(Overall overall);
const char* to_string(VerdictKind kind);

}  // namespace wellposed
