#pragma once

#include <cstdint>

#include "wellposed/linalg.hpp"

namespace wellposed {

/// PCG32 (pcg_xsh_rr_64_32). Small, fast, and reproducible across platforms;
/// the stream id selects statistically independent substreams from one seed.
class Pcg32 {
 public:
  using result_type = std::uint32_t;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0u;
    next();
    state_ += seed;
    next();
  }

  std::uint32_t next() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint32_t operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }

  /// Uniform in (0, 1); never exactly 0 so logs are safe.
  double uniform() { return (static_cast<double>(next()) + 0.5) * 0x1p-32; }

  /// Standard normal via Box-Muller (one value per call, the cosine branch).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze, valid for any shape > 0.
  double gamma(double shape);

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

/// x ~ N(mean, cov) via the Cholesky factor of cov.
Vector sample_gaussian(Pcg32& rng, const Vector& mean, const Matrix& cov_chol_lower);

/// Lower Cholesky factor; throws NotPositiveDefinite on failure.
Matrix cholesky_lower(const Matrix& cov, const std::string& name = "covariance");

}  // namespace wellposed
