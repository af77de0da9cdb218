#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "wellposed/fisher.hpp"
#include "wellposed/oracle.hpp"

using namespace wellposed;
using test::random_full_rank;
using test::random_spd;

TEST_CASE("mc_sobol_indices on a' = (1, 1), gamma = I, sigma2 = 1") {
  // Var[g(X)] = 2, total variance 3: S_X = 2/3, S_eps = 1/3.
  Vector a(2);
  a << 1.0, 1.0;
  const auto est = mc_sobol_indices(ForwardModel::linear(a.transpose()),
                                    InputModel::isotropic(Vector::Zero(2), 1.0),
                                    NoiseModel::isotropic(1, 1.0), 100000, 20240101);
  CHECK(est.s_x == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  CHECK(est.s_eps == doctest::Approx(1.0 / 3.0).epsilon(0.04));
  CHECK(est.s_x + est.s_eps == doctest::Approx(1.0).epsilon(0.02));
  CHECK(est.std_error > 0.0);
  CHECK(est.std_error < 0.05);
}

TEST_CASE("mc_sobol_indices edge regimes") {
  SUBCASE("zero signal puts everything on the noise") {
    const auto est = mc_sobol_indices(ForwardModel::linear(Matrix::Zero(1, 2)),
                                      InputModel::isotropic(Vector::Zero(2), 1.0),
                                      NoiseModel::isotropic(1, 1.0), 20000, 7);
    CHECK(est.s_x < 0.01);
    CHECK(est.s_eps > 0.99);
  }

  SUBCASE("vanishing noise puts everything on the signal") {
    const auto est = mc_sobol_indices(ForwardModel::linear(Matrix::Ones(1, 1)),
                                      InputModel::isotropic(Vector::Zero(1), 1.0),
                                      NoiseModel::isotropic(1, 1e-8), 20000, 7);
    CHECK(est.s_x > 0.99);
  }

  SUBCASE("nonlinear map: Var[sin(X)] with X ~ N(0,1)") {
    // Var[sin X] = (1 - e^-2)/2 for standard normal X.
    const double var_sin = 0.5 * (1.0 - std::exp(-2.0));
    const double expected = var_sin / (var_sin + 1.0);
    const auto est = mc_sobol_indices(
        make_builtin_forward("sin1d", {}, 1, 1),
        InputModel::isotropic(Vector::Zero(1), 1.0), NoiseModel::isotropic(1, 1.0),
        100000, 20240101);
    CHECK(est.s_x == doctest::Approx(expected).epsilon(0.03));
  }
}

TEST_CASE("mc_sobol_indices is deterministic in the seed") {
  Vector a(2);
  a << 0.5, -1.0;
  const ForwardModel fwd = ForwardModel::linear(a.transpose());
  const InputModel input = InputModel::isotropic(Vector::Zero(2), 2.0);
  const NoiseModel noise = NoiseModel::isotropic(1, 0.5);
  const auto e1 = mc_sobol_indices(fwd, input, noise, 5000, 99);
  const auto e2 = mc_sobol_indices(fwd, input, noise, 5000, 99);
  const auto e3 = mc_sobol_indices(fwd, input, noise, 5000, 100);
  CHECK(e1.s_x == e2.s_x);
  CHECK(e1.std_error == e2.std_error);
  CHECK(e1.s_x != e3.s_x);
}

TEST_CASE("fd_fisher_tau2 agrees with the closed form over random instances") {
  Pcg32 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const int q = 1 + static_cast<int>(rng.next() % 4);
    const int p = q + static_cast<int>(rng.next() % 3);
    const Matrix h = random_full_rank(rng, q, p);
    const Matrix sigma = random_spd(rng, q);
    const double tau2 = 0.2 + rng.uniform() * 5.0;
    const double closed = fisher_observed_tau2(h, sigma, tau2);
    const double fd = fd_fisher_tau2(h, sigma, tau2);
    CHECK(std::abs(fd - closed) <= 1e-4 * std::abs(closed));
  }
}

TEST_CASE("fd_fisher_tau2 step override") {
  const Matrix h = Matrix::Identity(1, 1);
  const Matrix sigma = Matrix::Identity(1, 1);
  // Closed form 0.5 / (1 + tau2)^2 at tau2 = 1 is 0.125.
  CHECK(fd_fisher_tau2(h, sigma, 1.0, 1e-3) == doctest::Approx(0.125).epsilon(1e-5));
  CHECK(fd_fisher_tau2(h, sigma, 1.0, 1e-5) == doctest::Approx(0.125).epsilon(1e-4));
}

TEST_CASE("score_variance_fi brackets the closed form") {
  Pcg32 rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    const int q = 1 + static_cast<int>(rng.next() % 3);
    const Matrix h = random_full_rank(rng, q, q + 1);
    const Matrix sigma = random_spd(rng, q);
    const double tau2 = 0.3 + rng.uniform() * 3.0;
    const double closed = fisher_observed_tau2(h, sigma, tau2);
    const OracleResult mc = score_variance_fi(h, sigma, tau2, 50000, 1000 + trial);
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.estimate - closed) <= 4.0 * mc.std_error);
  }
}

TEST_CASE("score_variance_fi std error shrinks roughly as 1/sqrt(n)") {
  const Matrix h = Matrix::Identity(2, 2);
  const Matrix sigma = Matrix::Identity(2, 2);
  const OracleResult small = score_variance_fi(h, sigma, 1.0, 10000, 42);
  const OracleResult big = score_variance_fi(h, sigma, 1.0, 160000, 42);
  CHECK(big.std_error < small.std_error);
  CHECK(big.std_error == doctest::Approx(small.std_error / 4.0).epsilon(0.35));
}

TEST_CASE("mc_second_moment") {
  SUBCASE("identity map recovers gamma") {
    Pcg32 rng(63);
    const Matrix gamma = random_spd(rng, 3);
    const Evaluator g = [](const Vector& x) { return x; };
    const Matrix m2 = mc_second_moment(g, gamma, 3, 100000, 20240101);
    CHECK((m2 - gamma).norm() < 0.05 * gamma.norm());
  }

  SUBCASE("squared scalar has second moment E[x^4] = 3 gamma^2") {
    const Evaluator g = [](const Vector& x) {
      return Vector::Constant(1, x[0] * x[0]);
    };
    const double gamma_val = 1.5;
    const Matrix m2 = mc_second_moment(g, gamma_val * Matrix::Identity(1, 1), 1,
                                       200000, 20240101);
    CHECK(m2(0, 0) == doctest::Approx(3.0 * gamma_val * gamma_val).epsilon(0.05));
  }

  SUBCASE("error roughly halves when n quadruples") {
    const Evaluator g = [](const Vector& x) { return x; };
    const Matrix gamma = Matrix::Identity(2, 2);
    double errs[3];
    int idx = 0;
    for (int n : {4000, 16000, 64000}) {
      const Matrix m2 = mc_second_moment(g, gamma, 2, n, 20240101);
      errs[idx++] = (m2 - gamma).norm();
    }
    // Not strictly monotone sample-by-sample, but two doublings must win.
    CHECK(errs[2] < errs[0]);
  }

  SUBCASE("deterministic in the seed") {
    const Evaluator g = [](const Vector& x) { return x; };
    const Matrix gamma = Matrix::Identity(2, 2);
    CHECK(mc_second_moment(g, gamma, 2, 3000, 5) ==
          mc_second_moment(g, gamma, 2, 3000, 5));
  }
}

TEST_CASE("trace_bound_check sandwich") {
  SUBCASE("analytic case") {
    Vector d(2);
    d << 2.0, 5.0;
    Matrix a(2, 2);
    a << 1.0, 0.2, 0.2, 3.0;
    const auto r = trace_bound_check(d, a);
    CHECK(r.value == doctest::Approx(2.0 * 1.0 + 5.0 * 3.0));
    CHECK(r.lower == doctest::Approx(2.0 * 4.0));
    CHECK(r.upper == doctest::Approx(5.0 * 4.0));
    CHECK(r.holds);
  }

  SUBCASE("equal weights collapse the sandwich") {
    Pcg32 rng(64);
    const Matrix a = random_spd(rng, 3);
    const auto r = trace_bound_check(Vector::Constant(3, 2.5), a);
    CHECK(r.lower == doctest::Approx(r.value));
    CHECK(r.upper == doctest::Approx(r.value));
    CHECK(r.holds);
  }

  SUBCASE("holds on random SPD draws") {
    Pcg32 rng(65);
    for (int trial = 0; trial < 1000; ++trial) {
      const int d = 1 + static_cast<int>(rng.next() % 5);
      const Matrix a = random_spd(rng, d);
      Vector w(d);
      for (int i = 0; i < d; ++i) w[i] = 0.01 + rng.uniform() * 10.0;
      const auto r = trace_bound_check(w, a);
      CHECK(r.holds);
      CHECK(r.lower <= r.value + 1e-9);
      CHECK(r.value <= r.upper + 1e-9);
    }
  }
}

TEST_CASE("rng reproducibility and moments") {
  SUBCASE("same seed, same stream") {
    Pcg32 r1(12345);
    Pcg32 r2(12345);
    for (int i = 0; i < 100; ++i) CHECK(r1.next() == r2.next());
  }

  SUBCASE("normal moments") {
    Pcg32 rng(66);
    const int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      sum += z;
      sum2 += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1.0));
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
  }

  SUBCASE("chi-squared mean is the dof") {
    Pcg32 rng(67);
    const double k = 5.0;
    const int n = 50000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.chi_squared(k);
    CHECK(sum / n == doctest::Approx(k).epsilon(0.02));
  }

  SUBCASE("correlated gaussian sampling hits the target covariance") {
    Pcg32 rng(68);
    Matrix gamma(2, 2);
    gamma << 2.0, 0.8, 0.8, 1.0;
    const Matrix chol = cholesky_lower(gamma);
    const int n = 100000;
    Matrix acc = Matrix::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
      const Vector x = sample_gaussian(rng, Vector::Zero(2), chol);
      acc += x * x.transpose();
    }
    CHECK((acc / n - gamma).cwiseAbs().maxCoeff() < 0.05);
  }
}
