#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mdce/error.hpp"
#include "mdce/model.hpp"

using namespace mdce;

namespace {

int idx(Qubit j, int n, int m, const Dims& d) { return basis_index({j, n, m}, d); }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("static Hamiltonian matrix elements") {
  const Dims d{4, 3};
  const OperatorSet ops = build_operators(d);
  SystemParams p;
  const Matrix h = build_static_hamiltonian(p, ops);
  CHECK(h(idx(Qubit::g, 1, 0, d), idx(Qubit::g, 1, 0, d)) == doctest::Approx(1.0));
  CHECK(h(idx(Qubit::e, 0, 0, d), idx(Qubit::g, 1, 0, d)) == doctest::Approx(0.01));
  CHECK(h(idx(Qubit::g, 0, 1, d), idx(Qubit::g, 2, 0, d)) ==
        doctest::Approx(0.03 / std::sqrt(2.0)));
  CHECK(h(idx(Qubit::e, 2, 2, d), idx(Qubit::e, 2, 2, d)) == doctest::Approx(0.7 + 2 + 0.6));
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uncoupled Hamiltonian is diagonal with bare energies") {
  const Dims d{3, 4};
  const OperatorSet ops = build_operators(d);
  SystemParams p;
  p.g = 0;
  p.lambda = 0;
  const Matrix h = build_static_hamiltonian(p, ops);
  for (int r = 0; r < d.total(); ++r) {
    for (int c = 0; c < d.total(); ++c) {
      if (r != c) CHECK(h(r, c) == 0.0);
    }
    CHECK(h(r, r) == doctest::Approx(bare_energy(basis_label(r, d), p.omega_a, 1.0, 0.3)));
  }
}

TEST_CASE("interaction terms connect only the allowed quantum-number changes") {
  const Dims d{5, 4};
  const OperatorSet ops = build_operators(d);
  auto pattern = [&](double lambda, double g) {
    SystemParams p;
    p.lambda = lambda;
    p.g = g;
    return build_interaction(p, ops);
  };
  const Matrix v_af = pattern(0.01, 0.0);
  const Matrix v_g = pattern(0.0, 0.03);
  for (int r = 0; r < d.total(); ++r) {
    for (int c = 0; c < d.total(); ++c) {
      const BasisLabel a = basis_label(r, d), b = basis_label(c, d);
      const int dn = std::abs(a.n - b.n), dm = std::abs(a.m - b.m);
      if (v_af(r, c) != 0.0) {
        CHECK(a.j != b.j);
        CHECK(dn == 1);
        CHECK(dm == 0);
      }
      if (v_g(r, c) != 0.0) {
        CHECK(a.j == b.j);
        CHECK(dm == 1);
        CHECK((dn == 0 || dn == 2));
        // the optomechanical part is proportional to the photon number
        if (dn == 0) CHECK(a.n > 0);
      }
    }
  }
  // counter-rotating terms are present
  CHECK(v_af(idx(Qubit::e, 1, 0, d), idx(Qubit::g, 0, 0, d)) != 0.0);
  CHECK(v_g(idx(Qubit::g, 2, 1, d), idx(Qubit::g, 0, 0, d)) != 0.0);
}

TEST_CASE("parameter validation") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.omega_m = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = SystemParams{};
  p.kappa = -1e-4;
  CHECK_THROWS_AS(p.validate(), Error);
  p = SystemParams{};
  CHECK(p.warnings().empty());
  p.lambda = 0.2;
  CHECK_FALSE(p.warnings().empty());
}

TEST_CASE("ultrafast Gaussian integrates to the amplitude") {
  for (double sigma : {0.5, 5.0, 50.0}) {
    const double t0 = 20 * sigma;
    const int steps = 4000;
    const double lo = t0 - 10 * sigma, h = 20 * sigma / steps;
    double sum = 0;
    for (int k = 0; k <= steps; ++k) {
      const double w = (k == 0 || k == steps) ? 1 : (k % 2 ? 4 : 2);
      sum += w * gaussian_envelope(lo + k * h, t0, sigma);
    }
    CHECK(sum * h / 3 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("drive amplitudes") {
  SystemParams p;
  p.gamma = 2.5e-4;
  const DriveConfig uf = make_ultrafast_drive(p, std::numbers::pi, 10.0, 100.0);
  const DriveAmplitudes at_peak = drive_amplitudes(100.0, uf);
  const double env = std::numbers::pi / (std::sqrt(2 * std::numbers::pi) * 10.0);
  CHECK(at_peak.mech == doctest::Approx(env * std::cos(0.3 * 100.0)));
  CHECK(at_peak.atom == doctest::Approx(env * std::cos(0.7 * 100.0)));

  const DriveConfig cw = make_continuous_drive(p, 12.0);
  CHECK(drive_amplitudes(0.0, cw).mech == doctest::Approx(12.0 * 2.5e-4));
  CHECK(drive_amplitudes(0.0, cw).atom == doctest::Approx(12.0 * 2.5e-4));

  DriveConfig atom_only = cw;
  atom_only.mech_enabled = false;
  CHECK(drive_amplitudes(3.0, atom_only).mech == 0.0);

  CHECK(drive_amplitudes(5.0, DriveConfig{}).mech == 0.0);
}

TEST_CASE("drive Hamiltonian couples the right operators") {
  const Dims d{3, 3};
  const OperatorSet ops = build_operators(d);
  SystemParams p;
  p.gamma = 1e-3;
  DriveConfig cw = make_continuous_drive(p, 2.0);
  cw.atom_enabled = false;
  const Matrix hd = build_drive_hamiltonian(0.0, cw, ops);
  CHECK(hd(idx(Qubit::g, 0, 1, d), idx(Qubit::g, 0, 0, d)) == doctest::Approx(2e-3));
  CHECK(hd(idx(Qubit::e, 0, 0, d), idx(Qubit::g, 0, 0, d)) == 0.0);
  for (double t : {0.3, 17.0, 512.25}) {
    const Matrix h = build_drive_hamiltonian(t, make_ultrafast_drive(p, 1.0, 3.0, 10.0), ops);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("drive validation") {
  DriveConfig uf;
  uf.kind = DriveKind::ultrafast_gaussian;
  uf.sigma = 0.0;
  CHECK_THROWS_AS(uf.validate(), Error);
  CHECK(drive_kind_from_string("continuous") == DriveKind::continuous);
  CHECK(to_string(DriveKind::ultrafast_gaussian) == std::string("ultrafast_gaussian"));
  CHECK_THROWS_AS(drive_kind_from_string("square"), Error);
}

}  // TEST_SUITE
