#include "wellposed/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wellposed/rng.hpp"

namespace wellposed {

Matrix jacobian_fd(const Evaluator& g, const Vector& x0, double step) {
  if (step <= 0.0) throw Error("finite-difference step must be positive");
  const Vector g0 = g(x0);
  const auto q = g0.size();
  const auto p = x0.size();
  Matrix jac(q, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double h = step * std::max(1.0, std::abs(x0[i]));
    Vector xp = x0;
    Vector xm = x0;
    xp[i] += h;
    xm[i] -= h;
    jac.col(i) = (g(xp) - g(xm)) / (2.0 * h);
  }
  if (!jac.allFinite()) {
    throw NonFiniteEntry("finite-difference Jacobian contains non-finite entries");
  }
  return jac;
}

LinearizedModel taylor_linearize(const Evaluator& g, const Vector& x0, double step) {
  LinearizedModel out;
  out.h_x0 = jacobian_fd(g, x0, step);
  out.x0 = x0;
  out.offset = g(x0) - out.h_x0 * x0;
  out.strategy = LinearizeStrategy::taylor;
  if (!out.offset.allFinite()) {
    throw NonFiniteEntry("surrogate offset is not finite");
  }
  return out;
}

LinearizedVerdicts wellposed_linearized(const Evaluator& g, const Vector& x0,
                                        double tau2, const Matrix& sigma, double c,
                                        double fd_step) {
  const LinearizedModel lin = taylor_linearize(g, x0, fd_step);
  LinearizedVerdicts out;
  out.sufficient = sufficient_condition(lin.h_x0, sigma, tau2, c);
  out.sufficient.equation = "(20)";
  out.necessary = necessary_condition(lin.h_x0, sigma, tau2, c);
  out.necessary.equation = "(21)";
  return out;
}

namespace {

// One objective evaluation; -inf marks a degenerate Jacobian at that point.
double surrogate_information(const Evaluator& g, const Vector& x0, const Matrix& sigma,
                             double tau2, double fd_step) {
  try {
    const Matrix jac = jacobian_fd(g, x0, fd_step);
    return fisher_blocks_linear(jac, sigma, tau2, /*for_signal=*/false).trace();
  } catch (const RankDeficient&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const NonFiniteEntry&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

LinearizationPointResult optimize_linearization_point(const Evaluator& g,
                                                      const ValidatedSpec& spec,
                                                      const Vector& x_init, int budget) {
  if (budget < 1) throw Error("optimization budget must be at least 1");
  if (!spec.spec.input.isotropic_tau2) {
    throw NotIsotropic("linearization-point optimization needs gamma = tau2 I");
  }
  const double tau2 = *spec.spec.input.isotropic_tau2;
  const Matrix& sigma = spec.spec.noise.sigma;
  const auto p = x_init.size();
  const double fd_step = 1e-5;

  LinearizationPointResult result;
  result.objective = -std::numeric_limits<double>::infinity();
  result.x0_star = x_init;
  int evals_left = budget;

  auto evaluate = [&](const Vector& x) {
    const double f = surrogate_information(g, x, sigma, tau2, fd_step);
    --evals_left;
    if (f > result.objective) {
      result.objective = f;
      result.x0_star = x;
    }
    result.objective_trace.push_back(result.objective);
    return f;
  };

  std::vector<Vector> starts{x_init};
  if ((spec.spec.input.mu - x_init).norm() > 0.0) starts.push_back(spec.spec.input.mu);

  for (const Vector& start : starts) {
    if (evals_left <= 0) break;

    // Nelder-Mead simplex, maximizing.
    std::vector<Vector> simplex;
    std::vector<double> values;
    simplex.push_back(start);
    values.push_back(evaluate(start));
    for (Eigen::Index i = 0; i < p && evals_left > 0; ++i) {
      Vector v = start;
      v[i] += 0.05 * std::max(1.0, std::abs(start[i]));
      simplex.push_back(v);
      values.push_back(evaluate(v));
    }
    if (simplex.size() < static_cast<size_t>(p) + 1) break;

    auto order = [&]() {
      std::vector<size_t> idx(simplex.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(),
                [&](size_t a, size_t b) { return values[a] > values[b]; });
      std::vector<Vector> s2;
      std::vector<double> v2;
      for (size_t i : idx) {
        s2.push_back(simplex[i]);
        v2.push_back(values[i]);
      }
      simplex.swap(s2);
      values.swap(v2);
    };

    while (evals_left > 0) {
      order();
      const size_t worst = simplex.size() - 1;
      Vector centroid = Vector::Zero(p);
      for (size_t i = 0; i < worst; ++i) centroid += simplex[i];
      centroid /= static_cast<double>(worst);

      const Vector reflected = centroid + (centroid - simplex[worst]);
      const double fr = evaluate(reflected);
      if (fr > values[0] && evals_left > 0) {
        const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
        const double fe = evaluate(expanded);
        if (fe > fr) {
          simplex[worst] = expanded;
          values[worst] = fe;
        } else {
          simplex[worst] = reflected;
          values[worst] = fr;
        }
      } else if (fr > values[worst - 1]) {
        simplex[worst] = reflected;
        values[worst] = fr;
      } else if (evals_left > 0) {
        const Vector contracted = centroid + 0.5 * (simplex[worst] - centroid);
        const double fc = evaluate(contracted);
        if (fc > values[worst]) {
          simplex[worst] = contracted;
          values[worst] = fc;
        } else {
          for (size_t i = 1; i <= worst && evals_left > 0; ++i) {
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
            values[i] = evaluate(simplex[i]);
          }
        }
      }
    }
  }

  if (!std::isfinite(result.objective)) {
    throw AllPointsDegenerate(
        "every evaluated linearization point had a rank-deficient Jacobian");
  }
  return result;
}

MseFitResult mse_linear_approx(const Evaluator& g, const Vector& mu, const Matrix& gamma,
                               const Matrix& sigma, double tau2_for_check, double c,
                               int n_samples, std::uint64_t seed) {
  const auto p = mu.size();
  if (n_samples < 10 * p) {
    throw Error("mse_linear_approx needs at least 10*p samples");
  }
  const Matrix chol = cholesky_lower(gamma, "gamma");
  Pcg32 rng(seed);

  std::vector<Vector> xs;
  std::vector<Vector> ys;
  xs.reserve(static_cast<size_t>(n_samples));
  ys.reserve(static_cast<size_t>(n_samples));
  Vector y_mean;
  for (int k = 0; k < n_samples; ++k) {
    Vector x = sample_gaussian(rng, mu, chol);
    Vector y = g(x);
    if (!y.allFinite()) throw EvaluatorFailure("forward model returned non-finite output");
    if (k == 0) y_mean = Vector::Zero(y.size());
    y_mean += y;
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
  y_mean /= static_cast<double>(n_samples);

  const auto q = y_mean.size();
  // Cross moments against the analytic mean keep the estimator variance down;
  // the inverse uses the analytic gamma, not the sample covariance.
  Matrix cross = Matrix::Zero(q, p);
  for (int k = 0; k < n_samples; ++k) {
    cross += (ys[static_cast<size_t>(k)] - y_mean) *
             (xs[static_cast<size_t>(k)] - mu).transpose();
  }
  cross /= static_cast<double>(n_samples);
  const Matrix gamma_inv = gamma.llt().solve(Matrix::Identity(p, p));

  MseFitResult out;
  out.h = cross * gamma_inv;
  out.u = y_mean - out.h * mu;

  double mse = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    mse += (ys[static_cast<size_t>(k)] - out.h * xs[static_cast<size_t>(k)] - out.u)
               .squaredNorm();
  }
  out.quality.mse = mse / static_cast<double>(n_samples);
  out.quality.fi_signal = fisher_signal_tau2(static_cast<int>(q), tau2_for_check);

  try {
    out.fisher_feasibility =
        fisher_condition_exact(out.h, sigma, tau2_for_check, c);
    out.fisher_feasibility.note = "post-hoc feasibility of the fitted surrogate";
  } catch (const RankDeficient& e) {
    out.fisher_feasibility = ConditionVerdict{};
    out.fisher_feasibility.name = "fisher_exact";
    out.fisher_feasibility.equation = "(15)";
    out.fisher_feasibility.holds = false;
    out.fisher_feasibility.note = std::string("surrogate is rank deficient: ") + e.what();
  }
  return out;
}

KlFitResult kl_optimal_fit(const Evaluator& g, const Vector& mu, const Matrix& gamma,
                           int q, int n_samples, std::uint64_t seed) {
  if (mu.cwiseAbs().maxCoeff() != 0.0) {
    throw MuNotZero("the moment-matching fit assumes mu = 0");
  }
  const auto p = gamma.rows();
  if (q > p) throw DimensionMismatch("kl_optimal_fit assumes q <= p");

  Pcg32 rng(seed);
  const Matrix chol = cholesky_lower(gamma, "gamma");
  Matrix m2 = Matrix::Zero(q, q);
  for (int k = 0; k < n_samples; ++k) {
    const Vector y = g(sample_gaussian(rng, Vector::Zero(p), chol));
    if (!y.allFinite()) throw EvaluatorFailure("forward model returned non-finite output");
    if (y.size() != q) throw DimensionMismatch("forward model output has wrong length");
    m2 += y * y.transpose();
  }
  m2 /= static_cast<double>(n_samples);
  m2 = 0.5 * (m2 + m2.transpose());

  Eigen::LLT<Matrix> m2_llt(m2);
  if (m2_llt.info() != Eigen::Success) {
    throw M2NotPD("estimated second moment of g(X) is not positive definite");
  }
  const Matrix l = m2_llt.matrixL();
  const Matrix g_chol = cholesky_lower(gamma, "gamma");
  // H = [L | 0] G^{-1} gives H Gamma H' = L L' = M2 exactly.
  Matrix l_padded = Matrix::Zero(q, p);
  l_padded.leftCols(q) = l;
  KlFitResult out;
  out.h = g_chol.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(l_padded);
  out.m2 = m2;
  out.quality.kl_residual = kl_optimal_check(out.h, gamma, m2);
  return out;
}

double kl_optimal_check(const Matrix& h, const Matrix& gamma, const Matrix& m2) {
  if (h.cols() != gamma.rows() || h.rows() != m2.rows()) {
    throw DimensionMismatch("kl_optimal_check: inconsistent shapes");
  }
  return (h * gamma * h.transpose() - m2).norm();
}

ThetaTransform theta_transform(double tau2, const Matrix& h, const Matrix& sigma,
                               double c) {
  if (tau2 <= 0.0) throw NotIsotropic("theta_transform needs gamma = tau2 I, tau2 > 0");
  ThetaTransform out;
  out.theta = std::sqrt(tau2) * h;
  out.phi = psi_matrix(out.theta, sigma);
  const Vector phi_eigs = clamp_spectrum(eig_sym(out.phi).values);
  if (phi_eigs[phi_eigs.size() - 1] <= 0.0) {
    throw RankDeficient("Phi has a zero eigenvalue");
  }
  out.reduced_verdict =
      make_verdict("theta_reduced_sufficient", VerdictKind::sufficient,
                   (std::sqrt(c) - 1.0) * phi_eigs[phi_eigs.size() - 1], 1.0, "(17)");
  return out;
}

}  // namespace wellposed
