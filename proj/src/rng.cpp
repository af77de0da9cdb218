#include "wellposed/rng.hpp"

#include <cmath>

namespace wellposed {

double Pcg32::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Pcg32::gamma(double shape) {
  if (shape < 1.0) {
    // Boost to shape + 1 and rescale.
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Vector sample_gaussian(Pcg32& rng, const Vector& mean, const Matrix& cov_chol_lower) {
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + cov_chol_lower * z;
}

Matrix cholesky_lower(const Matrix& cov, const std::string& name) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    const EigenDecomposition ed = eig_sym(cov);
    throw NotPositiveDefinite(name, ed.values[ed.values.size() - 1]);
  }
  return llt.matrixL();
}

}  // namespace wellposed
