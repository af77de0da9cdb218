#include "wellposed/conditions.hpp"

#include <cmath>
#include <limits>

#include "wellposed/linearize.hpp"
#include "wellposed/rng.hpp"

namespace wellposed {

namespace {

constexpr double kCommuteTol = 1e-8;        // relative
constexpr double kEqualSpectrumTol = 1e-10;  // relative

Vector min_max_guard(const Vector& psi_eigs) {
  if (psi_eigs.size() == 0 || psi_eigs[psi_eigs.size() - 1] <= 0.0) {
    throw RankDeficient("Psi has a zero eigenvalue; H is rank deficient");
  }
  return psi_eigs;
}

}  // namespace

ConditionVerdict make_verdict(std::string name, VerdictKind kind, double lhs,
                              double rhs, std::string equation, bool strict) {
  ConditionVerdict v;
  v.name = std::move(name);
  v.kind = kind;
  v.lhs = lhs;
  v.rhs = rhs;
  v.margin = lhs - rhs;
  v.strict = strict;
  v.holds = strict ? (v.margin > 0.0) : (v.margin >= 0.0);
  v.equation = std::move(equation);
  return v;
}

SobolScalarVerdict sobol_wellposed_scalar(const Vector& a, const Matrix& gamma,
                                          double sigma2) {
  if (gamma.rows() != a.size() || gamma.cols() != a.size()) {
    throw DimensionMismatch("gamma must be p x p with p = len(a)");
  }
  const double signal_var = a.dot(gamma * a);
  SobolScalarVerdict out;
  out.verdict = make_verdict("sobol_scalar", VerdictKind::exact, signal_var, sigma2, "(5)");
  const double total = signal_var + sigma2;
  out.s_x = total > 0.0 ? signal_var / total : 0.0;
  out.s_eps = total > 0.0 ? sigma2 / total : 0.0;
  return out;
}

ConditionVerdict entropy_wellposed_scalar(const Vector& a, const Matrix& gamma,
                                          double sigma2) {
  if (gamma.rows() != a.size() || gamma.cols() != a.size()) {
    throw DimensionMismatch("gamma must be p x p with p = len(a)");
  }
  const double signal_var = a.dot(gamma * a);
  const double lhs =
      signal_var > 0.0 ? entropy_gaussian_1d(signal_var)
                       : -std::numeric_limits<double>::infinity();
  const double rhs = entropy_gaussian_1d(sigma2);
  return make_verdict("entropy_scalar", VerdictKind::exact, lhs, rhs, "(4)");
}

SobolScalarVerdict sobol_wellposed_linearized(const Evaluator& g, const Vector& mu,
                                              const Matrix& gamma, double sigma2,
                                              double fd_step) {
  const Matrix jac = jacobian_fd(
      [&g](const Vector& x) { return g(x); }, mu, fd_step);
  if (jac.rows() != 1) {
    throw DimensionMismatch("sobol_wellposed_linearized requires scalar output");
  }
  const Vector grad = jac.row(0).transpose();
  if (!grad.allFinite()) {
    throw NonFiniteGradient("gradient of g at E(X) is not finite");
  }
  SobolScalarVerdict out = sobol_wellposed_scalar(grad, gamma, sigma2);
  out.verdict.name = "sobol_linearized";
  out.verdict.equation = "(6)";
  return out;
}

ConditionVerdict fisher_condition_exact_from_spectrum(const Vector& psi_eigs,
                                                      double tau2, double c) {
  if (!(c > 1.0)) throw InvalidC("c must exceed 1");
  min_max_guard(psi_eigs);
  const auto q = psi_eigs.size();
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    const double r = 1.0 / (1.0 + 1.0 / (tau2 * psi_eigs[i]));
    lhs += r * r;
  }
  return make_verdict("fisher_exact", VerdictKind::exact, lhs,
                      static_cast<double>(q) / c, "(15)");
}

ConditionVerdict fisher_condition_exact(const Matrix& h, const Matrix& sigma,
                                        double tau2, double c) {
  return fisher_condition_exact_from_spectrum(psi_eigenvalues(h, sigma), tau2, c);
}

ConditionVerdict fisher_condition_commuting(const Matrix& h, const Matrix& sigma,
                                            double tau2, double c) {
  if (!(c > 1.0)) throw InvalidC("c must exceed 1");
  const Matrix hht = h * h.transpose();
  const Matrix commutator = hht * sigma - sigma * hht;
  const double rel =
      commutator.norm() / std::max(hht.norm() * sigma.norm(), 1e-300);
  if (rel > kCommuteTol) throw NotCommuting(rel);

  // Co-diagonalize: eigenbasis of HH', rotated inside repeated-eigenvalue
  // blocks to diagonalize Sigma there. Pairs lambda_i^{HH'} with the
  // Sigma eigenvalue sharing its eigenvector, not with the sorted order.
  EigenDecomposition ed = eig_sym(hht);
  const auto q = hht.rows();
  const double scale = std::max(std::abs(ed.values[0]), 1e-300);
  Eigen::Index start = 0;
  while (start < q) {
    Eigen::Index end = start + 1;
    while (end < q && std::abs(ed.values[start] - ed.values[end]) <= kEqualSpectrumTol * scale) {
      ++end;
    }
    if (end - start > 1) {
      const Matrix block = ed.vectors.middleCols(start, end - start);
      const EigenDecomposition sub = eig_sym(block.transpose() * sigma * block);
      ed.vectors.middleCols(start, end - start) = block * sub.vectors;
    }
    start = end;
  }
  const Vector sigma_diag = (ed.vectors.transpose() * sigma * ed.vectors).diagonal();

  const Vector hht_eigs = clamp_spectrum(ed.values);
  if (hht_eigs[q - 1] <= 0.0) {
    throw RankDeficient("HH' has a zero eigenvalue");
  }
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    const double r = tau2 * hht_eigs[i] / (tau2 * hht_eigs[i] + sigma_diag[i]);
    lhs += r * r;
  }
  return make_verdict("fisher_commuting", VerdictKind::exact, lhs,
                      static_cast<double>(q) / c, "(9)");
}

IsotropicVerdicts fisher_condition_isotropic(const Matrix& h, double sigma2, double tau2,
                                             double c) {
  if (!(c > 1.0)) throw InvalidC("c must exceed 1");
  if (sigma2 <= 0.0) throw NotPositiveDefinite("sigma2", sigma2);
  const auto q = h.rows();
  const Vector hht_eigs = clamp_spectrum(eig_sym(h * h.transpose()).values);
  if (hht_eigs[q - 1] <= 0.0) {
    throw RankDeficient("HH' has a zero eigenvalue");
  }
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    const double r = tau2 * hht_eigs[i] / (tau2 * hht_eigs[i] + sigma2);
    lhs += r * r;
  }
  IsotropicVerdicts out;
  out.spectrum_sum = make_verdict("fisher_isotropic", VerdictKind::exact, lhs,
                                  static_cast<double>(q) / c, "(10)");

  const double spread = hht_eigs[0] - hht_eigs[q - 1];
  if (spread <= kEqualSpectrumTol * hht_eigs[0]) {
    const double lambda = hht_eigs[0];
    out.equal_spectrum =
        make_verdict("fisher_isotropic_equal_spectrum", VerdictKind::exact,
                     (std::sqrt(c) - 1.0) * tau2, sigma2 / lambda, "(11)");
  }
  return out;
}

ConditionVerdict sufficient_condition(const Matrix& h, const Matrix& sigma, double tau2,
                                      double c) {
  const Vector eigs = min_max_guard(psi_eigenvalues(h, sigma));
  return make_verdict("fisher_sufficient", VerdictKind::sufficient,
                      (std::sqrt(c) - 1.0) * tau2, 1.0 / eigs[eigs.size() - 1], "(17)");
}

ConditionVerdict necessary_condition(const Matrix& h, const Matrix& sigma, double tau2,
                                     double c) {
  const Vector eigs = min_max_guard(psi_eigenvalues(h, sigma));
  return make_verdict("fisher_necessary", VerdictKind::necessary,
                      (std::sqrt(c) - 1.0) * tau2, 1.0 / eigs[0], "(18)");
}

ConditionVerdict sufficient_condition_condnum(const Matrix& h, const Matrix& sigma,
                                              double tau2, double c) {
  const Vector hht_eigs = clamp_spectrum(eig_sym(h * h.transpose()).values);
  const auto q = hht_eigs.size();
  if (hht_eigs[q - 1] <= 0.0) {
    throw RankDeficient("HH' has a zero eigenvalue");
  }
  const Vector sigma_eigs = eig_sym(sigma).values;
  const double cond = hht_eigs[0] / hht_eigs[q - 1];
  const double coeff = std::sqrt(c) - cond;
  ConditionVerdict v =
      make_verdict("fisher_sufficient_condnum", VerdictKind::sufficient, coeff * tau2,
                   sigma_eigs[0] / hht_eigs[q - 1], "(12)", /*strict=*/false);
  if (coeff <= 0.0) {
    v.holds = false;
    v.note = "vacuous: sqrt(c) does not exceed cond(HH')";
  }
  return v;
}

ConditionVerdict general_gamma_condition(const Matrix& h, const Matrix& sigma,
                                         const Matrix& gamma, double c) {
  require_spd(gamma, "gamma");
  const Vector psi_eigs = min_max_guard(psi_eigenvalues(h, sigma));
  const Vector gamma_eigs = eig_sym(gamma).values;
  return make_verdict("fisher_general_gamma", VerdictKind::sufficient,
                      (std::sqrt(c) - 1.0) * gamma_eigs[gamma_eigs.size() - 1],
                      1.0 / psi_eigs[psi_eigs.size() - 1], "(19)");
}

double default_c() { return 4.0; }

IwSampleResult constrained_iw_prior_sample(const Matrix& lambda_scale, double nu,
                                           const Vector& a, double sigma2, int n,
                                           std::uint64_t seed, std::int64_t max_draws) {
  const auto p = lambda_scale.rows();
  if (n < 1) throw DimensionMismatch("n must be at least 1");
  if (a.size() != p) throw DimensionMismatch("a must have length p");
  if (!(nu > p - 1)) {
    throw Error("inverse-Wishart needs nu > p - 1; got nu = " + std::to_string(nu));
  }
  require_spd(lambda_scale, "lambda_scale");
  const Matrix lambda_inv =
      lambda_scale.llt().solve(Matrix::Identity(p, p));
  const Matrix l = cholesky_lower(lambda_inv, "lambda_scale^{-1}");

  Pcg32 rng(seed);
  IwSampleResult out;
  out.samples.reserve(static_cast<size_t>(n));
  while (static_cast<int>(out.samples.size()) < n && out.total_draws < max_draws) {
    ++out.total_draws;
    // Bartlett factor of Wishart(lambda_scale^{-1}, nu); Gamma = W^{-1}.
    Matrix bart = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      bart(i, i) = std::sqrt(rng.chi_squared(nu - static_cast<double>(i)));
      for (Eigen::Index j = 0; j < i; ++j) bart(i, j) = rng.normal();
    }
    const Matrix la = l * bart;
    const Matrix w = la * la.transpose();
    const Matrix gamma = w.llt().solve(Matrix::Identity(p, p));
    if (a.dot(gamma * a) > sigma2) {
      out.samples.push_back(0.5 * (gamma + gamma.transpose()));
    }
  }
  if (static_cast<int>(out.samples.size()) < n) {
    throw AcceptanceTooLow("accepted only " + std::to_string(out.samples.size()) +
                           " of " + std::to_string(n) + " requested draws within " +
                           std::to_string(out.total_draws) + " attempts");
  }
  out.acceptance_rate = static_cast<double>(n) / static_cast<double>(out.total_draws);
  return out;
}

namespace {

struct EffectiveLinear {
  Matrix h;
  bool available = false;
  bool linearized = false;
  std::string note;
};

EffectiveLinear effective_linear_map(const ValidatedSpec& spec,
                                     const ReportOptions& options,
                                     std::vector<std::string>& notes) {
  EffectiveLinear out;
  const ForwardModel& fwd = spec.spec.forward;
  if (fwd.is_linear()) {
    out.h = fwd.linear_matrix();
    out.available = true;
    return out;
  }
  if (options.linearize == ReportOptions::Linearize::none) {
    notes.push_back(
        "forward model is a black box and no linearization was requested; "
        "Fisher-family conditions unavailable");
    return out;
  }
  const Evaluator g = [&fwd](const Vector& x) { return fwd(x); };
  Vector x0 = options.x0.value_or(spec.spec.input.mu);
  if (options.linearize == ReportOptions::Linearize::optimize) {
    const auto opt = optimize_linearization_point(g, spec, x0, options.opt_budget);
    x0 = opt.x0_star;
    notes.push_back("linearization point optimized over " +
                    std::to_string(opt.objective_trace.size()) + " evaluations");
  }
  const LinearizedModel lin = taylor_linearize(g, x0, options.fd_step);
  out.h = lin.h_x0;
  out.available = true;
  out.linearized = true;
  notes.push_back("verdicts computed on the Taylor surrogate at the linearization point");
  return out;
}

}  // namespace

WellPosednessReport full_report(const ValidatedSpec& spec, const ReportOptions& options) {
  WellPosednessReport report;
  const InputModel& input = spec.spec.input;
  const NoiseModel& noise = spec.spec.noise;
  const double c = spec.spec.c;

  const EffectiveLinear lin = effective_linear_map(spec, options, report.notes);
  if (!lin.available) {
    report.overall = Overall::inconclusive;
    return report;
  }
  const Matrix& h = lin.h;

  report.identifiability =
      identifiability_check(h, input.p, noise.q, spec.spec.n_obs.value_or(1));
  if (!report.identifiability->injective) {
    report.notes.push_back("H is not injective (rank " +
                           std::to_string(report.identifiability->rank) + " < p = " +
                           std::to_string(input.p) + "); F is not identifiable");
  }
  if (!report.identifiability->count_ok) {
    report.notes.push_back("p > n_obs * q; too few observations for identifiability");
  }
  try {
    report.cond_number = condition_number(h);
  } catch (const RankDeficient&) {
    report.notes.push_back("H is rank deficient; condition number undefined");
  }

  bool rank_deficient = false;

  if (noise.q == 1) {
    const Vector a = h.row(0).transpose();
    const double sigma2 = noise.sigma(0, 0);
    const SobolScalarVerdict sobol = sobol_wellposed_scalar(a, input.gamma, sigma2);
    report.verdicts.push_back(sobol.verdict);
    report.sobol_x = sobol.s_x;
    report.sobol_eps = sobol.s_eps;
    report.verdicts.push_back(entropy_wellposed_scalar(a, input.gamma, sigma2));
  } else {
    report.notes.push_back(
        "Sobol/entropy conditions are defined for scalar output only; "
        "relying on the Fisher family for q > 1");
  }

  if (input.isotropic_tau2) {
    const double tau2 = *input.isotropic_tau2;
    try {
      report.verdicts.push_back(fisher_condition_exact(h, noise.sigma, tau2, c));
      report.verdicts.push_back(sufficient_condition(h, noise.sigma, tau2, c));
      report.verdicts.push_back(necessary_condition(h, noise.sigma, tau2, c));
      report.verdicts.push_back(sufficient_condition_condnum(h, noise.sigma, tau2, c));
      if (noise.isotropic_sigma2) {
        const IsotropicVerdicts iso =
            fisher_condition_isotropic(h, *noise.isotropic_sigma2, tau2, c);
        report.verdicts.push_back(iso.spectrum_sum);
        if (iso.equal_spectrum) report.verdicts.push_back(*iso.equal_spectrum);
      } else {
        try {
          report.verdicts.push_back(
              fisher_condition_commuting(h, noise.sigma, tau2, c));
        } catch (const NotCommuting&) {
          // Specialization does not apply; the exact condition already covers it.
        }
      }
    } catch (const RankDeficient& e) {
      rank_deficient = true;
      report.notes.push_back(std::string("Fisher conditions unavailable: ") + e.what());
    }
  } else {
    try {
      report.verdicts.push_back(
          general_gamma_condition(h, noise.sigma, input.gamma, c));
      report.notes.push_back(
          "gamma is not isotropic: only the sufficient general-covariance "
          "condition applies to the Fisher sense");
    } catch (const RankDeficient& e) {
      rank_deficient = true;
      report.notes.push_back(std::string("Fisher conditions unavailable: ") + e.what());
    }
  }

  int exact_count = 0;
  bool all_exact_hold = true;
  for (const auto& v : report.verdicts) {
    if (v.kind == VerdictKind::exact) {
      ++exact_count;
      all_exact_hold = all_exact_hold && v.holds;
    }
  }
  if (exact_count == 0 || rank_deficient) {
    report.overall = Overall::inconclusive;
  } else {
    report.overall = all_exact_hold ? Overall::well_posed : Overall::ill_posed;
  }
  return report;
}

const char* to_string(Overall overall) {
  switch (overall) {
    case Overall::well_posed: return "well_posed";
    case Overall::ill_posed: return "ill_posed";
    case Overall::inconclusive: return "inconclusive";
  }
  return "unknown";
}

const char* to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::exact: return "exact";
    case VerdictKind::sufficient: return "sufficient";
    case VerdictKind::necessary: return "necessary";
  }
  return "unknown";
}

}  // namespace wellposed
