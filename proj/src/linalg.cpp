#include "wellposed/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace wellposed {

Matrix require_symmetric(const Matrix& m, const std::string& name) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(name + " is not square (" + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()) + ")");
  }
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw NotSymmetric(name + " is not symmetric (relative asymmetry " +
                       std::to_string(asym / scale) + ")");
  }
  return 0.5 * (m + m.transpose());
}

EigenDecomposition eig_sym(const Matrix& m) {
  const Matrix s = require_symmetric(m, "matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw Error("symmetric eigendecomposition failed to converge");
  }
  const auto n = s.rows();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Matrix inv_sqrt_sym(const Matrix& m, const std::string& name) {
  const EigenDecomposition ed = eig_sym(m);
  const double min_eig = ed.values[ed.values.size() - 1];
  if (min_eig <= 0.0) {
    throw NotPositiveDefinite(name, min_eig);
  }
  return ed.vectors * ed.values.cwiseSqrt().cwiseInverse().asDiagonal() *
         ed.vectors.transpose();
}

double condition_number(const Matrix& h) {
  Eigen::JacobiSVD<Matrix> svd(h);
  const Vector& sv = svd.singularValues();
  const double largest = sv[0];
  if (largest <= 0.0) {
    throw RankDeficient("matrix is zero");
  }
  const double smallest = sv[sv.size() - 1];
  if (smallest <= kRankTol * largest) {
    throw RankDeficient("smallest singular value " + std::to_string(smallest) +
                        " below rank tolerance");
  }
  return largest / smallest;
}

int numeric_rank(const Matrix& h) {
  Eigen::JacobiSVD<Matrix> svd(h);
  const Vector& sv = svd.singularValues();
  const double largest = sv[0];
  if (largest <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > kRankTol * largest) ++rank;
  }
  return rank;
}

void require_spd(const Matrix& m, const std::string& name) {
  const Matrix s = require_symmetric(m, name);
  const EigenDecomposition ed = eig_sym(s);
  const double min_eig = ed.values[ed.values.size() - 1];
  if (min_eig <= 0.0) {
    throw NotPositiveDefinite(name, min_eig);
  }
}

}  // namespace wellposed
