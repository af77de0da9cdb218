#pragma once

#include <optional>

#include "wellposed/forward.hpp"
#include "wellposed/linalg.hpp"

namespace wellposed {

/// Gaussian law of the unobserved input X ~ N(mu, gamma).
struct InputModel {
  int p = 0;
  Vector mu;
  Matrix gamma;
  std::optional<double> isotropic_tau2;  // set iff gamma == tau2 * I, by construction

  static InputModel isotropic(Vector mu, double tau2);
  static InputModel full(Vector mu, Matrix gamma);
};

/// Gaussian law of the additive noise, eps ~ N(0, sigma).
struct NoiseModel {
  int q = 0;
  Matrix sigma;
  std::optional<double> isotropic_sigma2;

  static NoiseModel isotropic(int q, double sigma2);
  static NoiseModel full(Matrix sigma);
};

struct OracleSettings {
  std::uint64_t seed = 20240101;
  int n_samples = 100000;
};

struct ProblemSpec {
  InputModel input;
  NoiseModel noise;
  ForwardModel forward;
  double c = 4.0;
  std::optional<int> n_obs;
  OracleSettings oracle;
};

/// A ProblemSpec whose invariants have been checked; immutable afterwards.
struct ValidatedSpec {
  ProblemSpec spec;

  int p() const { return spec.input.p; }
  int q() const { return spec.noise.q; }
};

/// Checks all type invariants, symmetrizes covariance inputs, and verifies
/// forward-model dimensions. Idempotent.
ValidatedSpec validate_spec(ProblemSpec raw);

struct IdentifiabilityVerdict {
  bool injective;  // rank(H) == p
  bool count_ok;   // p <= n_obs * q
  int rank;
};

IdentifiabilityVerdict identifiability_check(const Matrix& h, int p, int q, int n_obs);

}  // namespace wellposed
