#include <doctest.h>

#include "test_helpers.hpp"
#include "wellposed/model.hpp"

using namespace wellposed;
using test::random_spd;

namespace {

ProblemSpec simple_spec() {
  ProblemSpec spec{InputModel::isotropic(Vector::Zero(2), 1.0),
                   NoiseModel::isotropic(1, 1.0),
                   ForwardModel::linear(Matrix::Ones(1, 2))};
  spec.c = 4.0;
  return spec;
}

}  // namespace

TEST_CASE("validate_spec accepts the identity-covariance example") {
  const ValidatedSpec v = validate_spec(simple_spec());
  CHECK(v.p() == 2);
  CHECK(v.q() == 1);
  CHECK(v.spec.input.isotropic_tau2 == 1.0);
}

TEST_CASE("validate_spec rejects an indefinite gamma and names its eigenvalue") {
  Matrix gamma(2, 2);
  gamma << 1, 2, 2, 1;  // eigenvalues 3 and -1
  ProblemSpec spec = simple_spec();
  spec.input = InputModel::full(Vector::Zero(2), gamma);
  try {
    validate_spec(spec);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.matrix_name == "gamma");
    CHECK(e.min_eig == doctest::Approx(-1.0));
  }
}

TEST_CASE("validate_spec rejects c at the boundary") {
  ProblemSpec spec = simple_spec();
  spec.c = 1.0;
  CHECK_THROWS_AS(validate_spec(spec), InvalidC);
}

TEST_CASE("validate_spec rejects mismatched dimensions") {
  ProblemSpec spec = simple_spec();
  spec.forward = ForwardModel::linear(Matrix::Ones(1, 3));
  CHECK_THROWS_AS(validate_spec(spec), DimensionMismatch);
}

TEST_CASE("validation is idempotent") {
  const ValidatedSpec once = validate_spec(simple_spec());
  const ValidatedSpec twice = validate_spec(once.spec);
  CHECK(once.spec.input.gamma == twice.spec.input.gamma);
  CHECK(once.spec.noise.sigma == twice.spec.noise.sigma);
}

TEST_CASE("condition_number") {
  CHECK(condition_number(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  CHECK(condition_number(d) == doctest::Approx(4.0));
}

TEST_CASE("condition_number of a shear matches the hand SVD") {
  // Independent oracle: eigenvalues of HH' from the quadratic formula.
  Matrix h(2, 2);
  h << 1, 1, 0, 1;
  const Matrix hht = h * h.transpose();
  const double tr = hht.trace();
  const double det = hht.determinant();
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  const double expected = std::sqrt((tr + disc) / (tr - disc));
  CHECK(condition_number(h) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(2.618).epsilon(1e-3));
}

TEST_CASE("condition_number is scale invariant") {
  Pcg32 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = test::random_full_rank(rng, 3, 5);
    const double alpha = rng.uniform() * 10.0 - 5.0;
    if (std::abs(alpha) < 1e-3) continue;
    CHECK(condition_number(alpha * h) ==
          doctest::Approx(condition_number(h)).epsilon(1e-10));
  }
}

TEST_CASE("condition_number rejects rank-deficient input") {
  Matrix h(2, 2);
  h << 1, 1, 1, 1;
  CHECK_THROWS_AS(condition_number(h), RankDeficient);
}

TEST_CASE("identifiability_check") {
  CHECK(identifiability_check(Matrix::Identity(2, 2), 2, 2, 1).injective);
  CHECK(identifiability_check(Matrix::Identity(2, 2), 2, 2, 1).count_ok);

  const Matrix wide = Matrix::Ones(1, 2);
  const auto v1 = identifiability_check(wide, 2, 1, 1);
  CHECK_FALSE(v1.injective);
  CHECK_FALSE(v1.count_ok);
  const auto v3 = identifiability_check(wide, 2, 1, 3);
  CHECK_FALSE(v3.injective);
  CHECK(v3.count_ok);
}

TEST_CASE("square invertible maps are always injective") {
  Pcg32 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.next() % 5);
    const Matrix h = random_spd(rng, d);  // SPD, hence invertible
    CHECK(identifiability_check(h, d, d, 1).injective);
  }
}

TEST_CASE("eig_sym on analytic 2x2 cases") {
  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  const EigenDecomposition ed = eig_sym(d);
  CHECK(ed.values[0] == doctest::Approx(3.0));
  CHECK(ed.values[1] == doctest::Approx(1.0));

  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const EigenDecomposition em = eig_sym(m);
  CHECK(em.values[0] == doctest::Approx(3.0));
  CHECK(em.values[1] == doctest::Approx(1.0));
}

TEST_CASE("eig_sym reconstruction property on random SPD matrices") {
  Pcg32 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng.next() % 5);
    const Matrix m = random_spd(rng, d);
    const EigenDecomposition ed = eig_sym(m);
    CHECK((ed.reconstruct() - m).norm() <= 1e-10 * m.norm());
    CHECK((ed.vectors.transpose() * ed.vectors - Matrix::Identity(d, d)).norm() <= 1e-10);
    for (int i = 1; i < d; ++i) CHECK(ed.values[i - 1] >= ed.values[i]);
  }
}

TEST_CASE("eig_sym rejects asymmetric input") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(eig_sym(m), NotSymmetric);
}

TEST_CASE("inv_sqrt_sym") {
  CHECK((inv_sqrt_sym(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const Matrix r = inv_sqrt_sym(d);
  CHECK(r(0, 0) == doctest::Approx(0.5));
  CHECK(r(1, 1) == doctest::Approx(1.0 / 3.0));

  Pcg32 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_spd(rng, 4);
    const Matrix root = inv_sqrt_sym(m);
    CHECK((root * m * root - Matrix::Identity(4, 4)).norm() <= 1e-10 * 2.0);
    CHECK((root - root.transpose()).norm() <= 1e-10 * root.norm());
  }
}

TEST_CASE("inv_sqrt_sym rejects indefinite input") {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  CHECK_THROWS_AS(inv_sqrt_sym(m), NotPositiveDefinite);
}
