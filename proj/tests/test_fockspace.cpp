#include <cmath>

#include "doctest.h"
#include "mdce/error.hpp"
#include "mdce/fockspace.hpp"

using namespace mdce;

TEST_SUITE("fockspace") {

TEST_CASE("basis ordering is j-major with m fastest") {
  const Dims d{3, 3};
  CHECK(d.total() == 18);
  CHECK(basis_index({Qubit::g, 0, 0}, d) == 0);
  CHECK(basis_index({Qubit::g, 0, 1}, d) == 1);
  CHECK(basis_index({Qubit::e, 2, 2}, d) == 17);
}

TEST_CASE("basis_index rejects labels outside the truncation") {
  const Dims d{3, 3};
  try {
    basis_index({Qubit::g, 3, 0}, d);
    FAIL("expected out_of_range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_range);
  }
  CHECK_THROWS_AS(basis_index({Qubit::e, 0, -1}, d), Error);
  CHECK_THROWS_AS(basis_label(18, d), Error);
}

TEST_CASE("basis_label inverts basis_index over every state") {
  for (const Dims d : {Dims{2, 2}, Dims{3, 5}, Dims{6, 4}}) {
    for (int k = 0; k < d.total(); ++k) CHECK(basis_index(basis_label(k, d), d) == k);
  }
}

TEST_CASE("cutoffs below two are rejected") {
  CHECK_THROWS_AS(build_operators(Dims{1, 4}), Error);
  CHECK_THROWS_AS(build_operators(Dims{4, 1}), Error);
}

TEST_CASE("ladder matrix elements") {
  const Dims d{4, 3};
  const OperatorSet ops = build_operators(d);
  for (int m = 0; m < d.n_mech; ++m) {
    const int g0 = basis_index({Qubit::g, 0, m}, d);
    const int g1 = basis_index({Qubit::g, 1, m}, d);
    const int g2 = basis_index({Qubit::g, 2, m}, d);
    CHECK(ops.a(g0, g1) == 1.0);
    CHECK(ops.a(g1, g2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(ops.a.col(g0).cwiseAbs().maxCoeff() == 0.0);
  }
  const int e11 = basis_index({Qubit::e, 1, 1}, d);
  const int g11 = basis_index({Qubit::g, 1, 1}, d);
  CHECK(ops.sigma_minus(g11, e11) == 1.0);
  CHECK(ops.b(basis_index({Qubit::e, 1, 0}, d), e11) == 1.0);
}

TEST_CASE("adjoint pairs are exact transposes") {
  const OperatorSet ops = build_operators(Dims{5, 4});
  CHECK(ops.a_dag == ops.a.transpose());
  CHECK(ops.b_dag == ops.b.transpose());
  CHECK(ops.sigma_plus == ops.sigma_minus.transpose());
}

TEST_CASE("canonical commutators hold below the truncation edge") {
  const Dims d{6, 5};
  const OperatorSet ops = build_operators(d);
  const Matrix ca = ops.a * ops.a_dag - ops.a_dag * ops.a - ops.identity();
  const Matrix cb = ops.b * ops.b_dag - ops.b_dag * ops.b - ops.identity();
  double worst_a = 0, worst_b = 0;
  for (int r = 0; r < d.total(); ++r) {
    for (int c = 0; c < d.total(); ++c) {
      const BasisLabel lr = basis_label(r, d), lc = basis_label(c, d);
      if (lr.n < d.n_cav - 1 && lc.n < d.n_cav - 1) worst_a = std::max(worst_a, std::abs(ca(r, c)));
      if (lr.m < d.n_mech - 1 && lc.m < d.n_mech - 1) worst_b = std::max(worst_b, std::abs(cb(r, c)));
    }
  }
  CHECK(worst_a < 1e-12);
  CHECK(worst_b < 1e-12);
}

TEST_CASE("sigma_+ sigma_- is an exact projector") {
  const OperatorSet ops = build_operators(Dims{3, 3});
  const Matrix& p = ops.num_qubit;
  CHECK(p * p == p);
  CHECK(p == p.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const double v = es.eigenvalues()(k);
    CHECK((v == doctest::Approx(0.0) || v == doctest::Approx(1.0)));
  }
  CHECK(p.trace() == doctest::Approx(9.0));
}

}  // TEST_SUITE
