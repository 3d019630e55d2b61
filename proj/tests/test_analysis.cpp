#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mdce/analysis.hpp"
#include "mdce/error.hpp"

using namespace mdce;

namespace {

std::vector<double> tone(double w, double amp, double offset, double dt, int samples) {
  std::vector<double> v(samples);
  for (int k = 0; k < samples; ++k) v[k] = offset + amp * std::cos(w * k * dt);
  return v;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("cosine over whole periods gives one peak of height M/2") {
  const int samples = 512;
  const double dt = 0.5;
  const double bin = 2 * std::numbers::pi / (samples * dt);
  const double w0 = 12 * bin;
  const Spectrum sp = fourier_spectrum(tone(w0, 1.0, 0.3, dt, samples), dt);
  CHECK(sp.freqs.size() == samples / 2);
  CHECK(sp.bin_width() == doctest::Approx(bin));
  const auto peaks = find_peaks(sp);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].freq == doctest::Approx(w0));
  CHECK(peaks[0].magnitude == doctest::Approx(samples / 2.0).epsilon(1e-9));
  CHECK(sp.magnitude[0] < 1e-9);
}

TEST_CASE("too few samples") {
  try {
    fourier_spectrum(std::vector<double>(63, 1.0), 1.0);
    FAIL("expected invalid_argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}

TEST_CASE("single-tone peak is located within one bin at any amplitude") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> wdist(0.05, 2.5), logamp(-8, 3);
  for (int k = 0; k < 100; ++k) {
    const double w = wdist(rng), amp = std::pow(10.0, logamp(rng));
    const Spectrum sp = fourier_spectrum(tone(w, amp, 1.0, 0.5, 1000), 0.5);
    const auto peaks = find_peaks(sp);
    REQUIRE_FALSE(peaks.empty());
    CHECK(std::abs(peaks.front().freq - w) <= sp.bin_width());
  }
}

TEST_CASE("decaying envelope does not hide a slow oscillation") {
  // envelope decays over the record; the tone sits a few bins above DC
  const std::size_t n = 20000;
  std::vector<double> x(n);
  const double w = 2 * std::numbers::pi * 7.5 / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    x[i] = std::exp(-1e-4 * t) * (1.0 + 0.4 * std::cos(w * t));
  }
  const Spectrum sp = fourier_spectrum(x, 1.0);
  const auto peaks = find_peaks(sp);
  REQUIRE_FALSE(peaks.empty());
  CHECK(peaks.front().bin >= 2);
  CHECK(std::abs(peaks.front().freq - w) <= sp.bin_width());
}

TEST_CASE("transition rate is half the population frequency") {
  CHECK(transition_rate(2.4e-3) == doctest::Approx(1.2e-3));
}

TEST_CASE("steady value of a constant series") {
  std::vector<double> t(100), v(100, 0.31);
  for (int k = 0; k < 100; ++k) t[k] = k;
  const SteadyStateResult r = steady_state_value(t, v);
  CHECK(r.value == doctest::Approx(0.31));
  CHECK(r.drift == 0.0);
  CHECK(r.steady);
  CHECK(r.t_start == 80.0);
  CHECK(r.t_end == 99.0);
}

TEST_CASE("steady value ignores transients before the window") {
  std::vector<double> t(1000), v(1000), w(1000);
  for (int k = 0; k < 1000; ++k) {
    t[k] = k;
    v[k] = 0.2 + 0.01 * std::sin(0.3 * k);
    w[k] = v[k] + (k < 700 ? 5.0 * std::exp(-0.01 * k) : 0.0);
  }
  CHECK(steady_state_value(t, v).value == steady_state_value(t, w).value);
  CHECK(steady_state_value(t, v).drift == steady_state_value(t, w).drift);
}

TEST_CASE("drifting series is flagged") {
  std::vector<double> t(100), v(100);
  for (int k = 0; k < 100; ++k) {
    t[k] = k;
    v[k] = 1.0 + 0.01 * k;
  }
  const SteadyStateResult r = steady_state_value(t, v);
  CHECK_FALSE(r.steady);
  CHECK(r.drift > kSteadyDriftThreshold);
}

TEST_CASE("empty window") {
  CHECK_THROWS_AS(steady_state_value(std::vector<double>{}, std::vector<double>{}), Error);
  CHECK_THROWS_AS(steady_state_value(std::vector<double>{0, 1, 2}, std::vector<double>{1, 1, 1},
                                     0.2),
                  Error);
}

TEST_CASE("photon flux") {
  CHECK(photon_flux_hz(0.0, 2e6) == 0.0);
  CHECK(photon_flux_hz(0.31, 2e6) == doctest::Approx(3.8e6).epsilon(0.03));
  CHECK(photon_flux_hz(0.62, 2e6) == doctest::Approx(2 * photon_flux_hz(0.31, 2e6)));
  CHECK_THROWS_AS(photon_flux(0.3, 0.0), Error);
}

TEST_CASE("observable names") {
  CHECK(observable_from_string("photon") == Observable::cavity);
  CHECK(to_string(Observable::mechanics) == std::string("n_mech"));
  CHECK_THROWS_AS(observable_from_string("spin"), Error);
}

TEST_CASE("snr with the mechanical drive off in both runs has no signal") {
  SystemParams p;
  p.kappa = p.eta = 2.5e-3;
  p.gamma = 2.5e-4;
  SnrOptions opt;
  opt.dims = Dims{4, 3};
  opt.integration.t_end = 200;
  opt.integration.store_every = 50;
  opt.require_steady = false;
  opt.mech_off_in_both = true;
  const SnrResult r = snr(p, 12.0, opt);
  CHECK(r.signal == 0.0);
  if (!r.noise_floor) CHECK(*r.eta == 0.0);
}

}  // TEST_SUITE
