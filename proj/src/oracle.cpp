#include "wellposed/oracle.hpp"

#include <cmath>

#include "wellposed/fisher.hpp"

namespace wellposed {

namespace {

double sample_variance(const std::vector<double>& xs) {
  const auto n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(n - 1);
}

double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    const EigenDecomposition ed = eig_sym(m);
    throw NotPositiveDefinite("tau2 HH' + Sigma", ed.values[ed.values.size() - 1]);
  }
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

SobolEstimate mc_sobol_indices(const ForwardModel& forward, const InputModel& input,
                               const NoiseModel& noise, int n, std::uint64_t seed) {
  if (noise.q != 1) {
    throw DimensionMismatch("Sobol indices are computed for scalar output only");
  }
  Pcg32 rng(seed);
  const Matrix x_chol = cholesky_lower(input.gamma, "gamma");
  const double eps_sd = std::sqrt(noise.sigma(0, 0));

  std::vector<double> signal(static_cast<size_t>(n));
  std::vector<double> eps(static_cast<size_t>(n));
  std::vector<double> total(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vector x = sample_gaussian(rng, input.mu, x_chol);
    const Vector y = forward(x);
    const double e = eps_sd * rng.normal();
    signal[static_cast<size_t>(k)] = y[0];
    eps[static_cast<size_t>(k)] = e;
    total[static_cast<size_t>(k)] = y[0] + e;
  }

  SobolEstimate out;
  out.n_samples = n;
  out.seed = seed;
  const double var_total = sample_variance(total);
  if (var_total <= 0.0) {
    out.s_x = 0.0;
    out.s_eps = 0.0;
    out.std_error = 0.0;
    return out;
  }
  out.s_x = sample_variance(signal) / var_total;
  out.s_eps = sample_variance(eps) / var_total;

  // Batch-mean standard error of S_X over 20 blocks.
  const int n_batches = 20;
  const int per = n / n_batches;
  if (per >= 2) {
    std::vector<double> batch_sx;
    for (int b = 0; b < n_batches; ++b) {
      std::vector<double> sig(signal.begin() + static_cast<long>(b) * per,
                              signal.begin() + static_cast<long>(b + 1) * per);
      std::vector<double> tot(total.begin() + static_cast<long>(b) * per,
                              total.begin() + static_cast<long>(b + 1) * per);
      const double vt = sample_variance(tot);
      if (vt > 0.0) batch_sx.push_back(sample_variance(sig) / vt);
    }
    if (batch_sx.size() >= 2) {
      out.std_error =
          std::sqrt(sample_variance(batch_sx) / static_cast<double>(batch_sx.size()));
    }
  }
  return out;
}

double fd_fisher_tau2(const Matrix& h, const Matrix& sigma, double tau2, double step) {
  const double hh = step > 0.0 ? step : 1e-4 * tau2;
  if (tau2 - hh <= 0.0) {
    throw NotPositiveDefinite("tau2 - h", tau2 - hh);
  }
  const Matrix hht = h * h.transpose();
  auto f = [&](double t) { return -0.5 * log_det_spd(t * hht + sigma); };
  return (f(tau2 + hh) - 2.0 * f(tau2) + f(tau2 - hh)) / (hh * hh);
}

OracleResult score_variance_fi(const Matrix& h, const Matrix& sigma, double tau2, int n,
                               std::uint64_t seed) {
  const auto q = h.rows();
  const Matrix cov = tau2 * h * h.transpose() + sigma;
  const Matrix cov_inv = cov.llt().solve(Matrix::Identity(q, q));
  const Matrix hht = h * h.transpose();
  // Score in tau2: s(y) = 1/2 (y' C^{-1} HH' C^{-1} y - Tr(C^{-1} HH')).
  const Matrix quad = cov_inv * hht * cov_inv;
  const double trace_term = (cov_inv * hht).trace();
  const Matrix chol = cholesky_lower(cov, "observable covariance");

  Pcg32 rng(seed);
  std::vector<double> scores(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vector y = sample_gaussian(rng, Vector::Zero(q), chol);
    scores[static_cast<size_t>(k)] = 0.5 * (y.dot(quad * y) - trace_term);
  }

  const double mean = [&] {
    double m = 0.0;
    for (double s : scores) m += s;
    return m / static_cast<double>(n);
  }();
  const double var = sample_variance(scores);
  double m4 = 0.0;
  for (double s : scores) {
    const double d = s - mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(n);

  OracleResult out;
  out.estimate = var;
  out.std_error = std::sqrt(std::max(m4 - var * var, 0.0) / static_cast<double>(n));
  out.n_samples = n;
  out.seed = seed;
  return out;
}

Matrix mc_second_moment(const Evaluator& g, const Matrix& gamma, int q, int n,
                        std::uint64_t seed) {
  Pcg32 rng(seed);
  const auto p = gamma.rows();
  const Matrix chol = cholesky_lower(gamma, "gamma");
  Matrix m2 = Matrix::Zero(q, q);
  for (int k = 0; k < n; ++k) {
    const Vector y = g(sample_gaussian(rng, Vector::Zero(p), chol));
    if (!y.allFinite()) throw EvaluatorFailure("forward model returned non-finite output");
    if (y.size() != q) throw DimensionMismatch("forward model output has wrong length");
    m2 += y * y.transpose();
  }
  m2 /= static_cast<double>(n);
  return 0.5 * (m2 + m2.transpose());
}

TraceBoundResult trace_bound_check(const Vector& d_values, const Matrix& a) {
  if (a.rows() != d_values.size() || a.cols() != d_values.size()) {
    throw DimensionMismatch("A must be square with the dimension of d");
  }
  TraceBoundResult out;
  const double tr_a = a.trace();
  out.lower = d_values.minCoeff() * tr_a;
  out.upper = d_values.maxCoeff() * tr_a;
  out.value = (d_values.asDiagonal() * a).trace();
  // Tolerate rounding at the boundary (d = const makes all three coincide).
  const double slack = 1e-12 * std::max(std::abs(out.upper), 1.0);
  out.holds = (out.lower <= out.value + slack) && (out.value <= out.upper + slack);
  return out;
}

}  // namespace wellposed
