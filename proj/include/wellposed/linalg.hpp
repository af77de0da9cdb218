#pragma once

#include <Eigen/Dense>

#include "wellposed/errors.hpp"

namespace wellposed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRankTol = 1e-10;       // relative to largest singular value
inline constexpr double kSymmetryTol = 1e-12;   // relative
inline constexpr double kReconstructTol = 1e-10;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;  // column i pairs with values[i]

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/// Checks relative symmetry and returns the exactly symmetrized matrix.
Matrix require_symmetric(const Matrix& m, const std::string& name);

/// Symmetric eigendecomposition with descending eigenvalues.
EigenDecomposition eig_sym(const Matrix& m);

/// M^{-1/2} for a symmetric positive definite M.
Matrix inv_sqrt_sym(const Matrix& m, const std::string& name = "matrix");

/// Ratio of extreme nonzero singular values; throws RankDeficient below rank_tol.
double condition_number(const Matrix& h);

/// rank(H) with the shared singular-value cutoff.
int numeric_rank(const Matrix& h);

/// Throws NotPositiveDefinite (naming `name`) unless all eigenvalues are > 0.
void require_spd(const Matrix& m, const std::string& name);

}  // namespace wellposed
