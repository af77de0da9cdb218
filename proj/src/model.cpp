#include "wellposed/model.hpp"

namespace wellposed {

InputModel InputModel::isotropic(Vector mu, double tau2) {
  InputModel m;
  m.p = static_cast<int>(mu.size());
  m.mu = std::move(mu);
  m.gamma = tau2 * Matrix::Identity(m.p, m.p);
  m.isotropic_tau2 = tau2;
  return m;
}

InputModel InputModel::full(Vector mu, Matrix gamma) {
  InputModel m;
  m.p = static_cast<int>(mu.size());
  m.mu = std::move(mu);
  m.gamma = std::move(gamma);
  return m;
}

NoiseModel NoiseModel::isotropic(int q, double sigma2) {
  NoiseModel m;
  m.q = q;
  m.sigma = sigma2 * Matrix::Identity(q, q);
  m.isotropic_sigma2 = sigma2;
  return m;
}

NoiseModel NoiseModel::full(Matrix sigma) {
  NoiseModel m;
  m.q = static_cast<int>(sigma.rows());
  m.sigma = std::move(sigma);
  return m;
}

ValidatedSpec validate_spec(ProblemSpec raw) {
  const int p = raw.input.p;
  const int q = raw.noise.q;
  if (p <= 0 || q <= 0) {
    throw DimensionMismatch("dimensions must be positive (p=" + std::to_string(p) +
                            ", q=" + std::to_string(q) + ")");
  }
  if (raw.input.mu.size() != p) {
    throw DimensionMismatch("mu has length " + std::to_string(raw.input.mu.size()) +
                            ", expected p=" + std::to_string(p));
  }
  if (raw.input.gamma.rows() != p || raw.input.gamma.cols() != p) {
    throw DimensionMismatch("gamma must be p x p");
  }
  if (raw.noise.sigma.rows() != q || raw.noise.sigma.cols() != q) {
    throw DimensionMismatch("sigma must be q x q");
  }

  raw.input.gamma = require_symmetric(raw.input.gamma, "gamma");
  require_spd(raw.input.gamma, "gamma");
  if (raw.input.isotropic_tau2) {
    if (*raw.input.isotropic_tau2 <= 0.0) {
      throw NotPositiveDefinite("gamma (isotropic tau2)", *raw.input.isotropic_tau2);
    }
    raw.input.gamma = *raw.input.isotropic_tau2 * Matrix::Identity(p, p);
  }
  raw.noise.sigma = require_symmetric(raw.noise.sigma, "sigma");
  require_spd(raw.noise.sigma, "sigma");
  if (raw.noise.isotropic_sigma2) {
    if (*raw.noise.isotropic_sigma2 <= 0.0) {
      throw NotPositiveDefinite("sigma (isotropic sigma2)", *raw.noise.isotropic_sigma2);
    }
    raw.noise.sigma = *raw.noise.isotropic_sigma2 * Matrix::Identity(q, q);
  }

  if (raw.forward.is_linear()) {
    const Matrix& h = raw.forward.linear_matrix();
    if (h.rows() != q || h.cols() != p) {
      throw DimensionMismatch("H must be q x p; got " + std::to_string(h.rows()) + "x" +
                              std::to_string(h.cols()));
    }
    if (q <= p && numeric_rank(h) < q) {
      throw RankDeficient("H has rank " + std::to_string(numeric_rank(h)) +
                          " < q = " + std::to_string(q));
    }
  }

  if (!(raw.c > 1.0)) {
    throw InvalidC("the Fisher fraction constant c must exceed 1; got " +
                   std::to_string(raw.c));
  }
  if (raw.n_obs && *raw.n_obs <= 0) {
    throw DimensionMismatch("n_obs must be positive");
  }
  if (raw.oracle.n_samples <= 0) {
    throw DimensionMismatch("oracle sample count must be positive");
  }
  return ValidatedSpec{std::move(raw)};
}

IdentifiabilityVerdict identifiability_check(const Matrix& h, int p, int q, int n_obs) {
  IdentifiabilityVerdict v;
  v.rank = numeric_rank(h);
  v.injective = (v.rank == p);
  v.count_ok = (p <= n_obs * q);
  return v;
}

}  // namespace wellposed
