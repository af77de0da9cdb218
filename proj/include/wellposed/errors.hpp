#pragma once

#include <stdexcept>
#include <string>

namespace wellposed {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NotSymmetric : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  NotPositiveDefinite(const std::string& what_matrix, double min_eigenvalue)
      : Error(what_matrix + " is not positive definite (smallest eigenvalue " +
              std::to_string(min_eigenvalue) + ")"),
        matrix_name(what_matrix),
        min_eig(min_eigenvalue) {}
  std::string matrix_name;
  double min_eig;
};

struct InvalidC : Error {
  using Error::Error;
};

struct RankDeficient : Error {
  using Error::Error;
};

struct NotCommuting : Error {
  explicit NotCommuting(double commutator_norm)
      : Error("matrices do not commute (relative commutator norm " +
              std::to_string(commutator_norm) + ")"),
        norm(commutator_norm) {}
  double norm;
};

struct EvaluatorFailure : Error {
  using Error::Error;
};

struct NonFiniteGradient : Error {
  using Error::Error;
};

struct NonFiniteEntry : Error {
  using Error::Error;
};

struct MuNotZero : Error {
  using Error::Error;
};

struct M2NotPD : Error {
  using Error::Error;
};

struct NotIsotropic : Error {
  using Error::Error;
};

struct AcceptanceTooLow : Error {
  using Error::Error;
};

struct AllPointsDegenerate : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace wellposed
