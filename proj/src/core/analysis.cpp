#include "mdce/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "mdce/error.hpp"

namespace mdce {

double Spectrum::bin_width() const {
  return 2.0 * std::numbers::pi / (static_cast<double>(samples) * dt_sample);
}

Spectrum fourier_spectrum(std::span<const double> series, double dt_sample) {
  if (series.size() < kMinSpectrumSamples)
    fail(ErrorCode::invalid_argument,
         "fourier_spectrum: need at least " + std::to_string(kMinSpectrumSamples) +
             " samples, got " + std::to_string(series.size()));
  if (!(dt_sample > 0))
    fail(ErrorCode::invalid_argument, "fourier_spectrum: dt_sample must be > 0");

  const std::size_t m = series.size();
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / m;
  std::vector<double> centred(m);
  std::transform(series.begin(), series.end(), centred.begin(),
                 [mean](double x) { return x - mean; });

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, centred);

  Spectrum s;
  s.samples = m;
  s.dt_sample = dt_sample;
  const double bin = s.bin_width();
  for (std::size_t k = 0; k < m / 2; ++k) {
    s.freqs.push_back(bin * k);
    s.magnitude.push_back(std::abs(out[k]));
  }
  return s;
}

std::vector<Peak> find_peaks(const Spectrum& spectrum, double factor) {
  const auto& mag = spectrum.magnitude;
  if (mag.size() < 3) return {};
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double top = *std::max_element(mag.begin(), mag.end());
  const double threshold = std::max(factor * sorted[sorted.size() / 2], kPeakFloor * top);

  std::vector<Peak> peaks;
  for (std::size_t k = 2; k + 1 < mag.size(); ++k) {
    if (mag[k] > threshold && mag[k] >= mag[k - 1] && mag[k] > mag[k + 1])
      peaks.push_back({k, spectrum.freqs[k], mag[k]});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
  return peaks;
}

Observable observable_from_string(const std::string& name) {
  if (name == "qubit" || name == "n_qubit") return Observable::qubit;
  if (name == "cavity" || name == "n_cav" || name == "photon") return Observable::cavity;
  if (name == "mechanics" || name == "n_mech" || name == "phonon")
    return Observable::mechanics;
  fail(ErrorCode::config, "unknown observable '" + name + "'");
}

std::string to_string(Observable obs) {
  switch (obs) {
    case Observable::qubit: return "n_qubit";
    case Observable::cavity: return "n_cav";
    case Observable::mechanics: return "n_mech";
  }
  return "n_cav";
}

const std::vector<double>& series(const Trajectory& traj, Observable obs) {
  switch (obs) {
    case Observable::qubit: return traj.n_qubit;
    case Observable::cavity: return traj.n_cav;
    case Observable::mechanics: return traj.n_mech;
  }
  return traj.n_cav;
}

SteadyStateResult steady_state_value(const Trajectory& traj, Observable obs,
                                     double window_fraction, double drift_threshold) {
  return steady_state_value(traj.times, series(traj, obs), window_fraction,
                            drift_threshold);
}

SteadyStateResult steady_state_value(std::span<const double> times,
                                     std::span<const double> values,
                                     double window_fraction, double drift_threshold) {
  if (times.size() != values.size())
    fail(ErrorCode::dimension_mismatch, "steady_state_value: length mismatch");
  if (!(window_fraction > 0 && window_fraction <= 1))
    fail(ErrorCode::invalid_argument, "steady_state_value: window_fraction in (0, 1]");
  const std::size_t n = values.size();
  const auto count = static_cast<std::size_t>(std::floor(window_fraction * n));
  if (n == 0 || count < 2)
    fail(ErrorCode::invalid_argument, "steady_state_value: empty window");

  const std::size_t first = n - count;
  const std::size_t half = first + count / 2;
  auto mean = [&](std::size_t lo, std::size_t hi) {
    return std::accumulate(values.begin() + lo, values.begin() + hi, 0.0) / (hi - lo);
  };
  SteadyStateResult r;
  r.value = mean(first, n);
  r.t_start = times[first];
  r.t_end = times[n - 1];
  const double diff = std::abs(mean(half, n) - mean(first, half));
  r.drift = diff == 0.0 ? 0.0 : diff / std::abs(r.value);
  r.steady = r.drift <= drift_threshold;
  return r;
}

double photon_flux(double n_ss, double linewidth_angular) {
  if (!(linewidth_angular > 0))
    fail(ErrorCode::invalid_argument, "photon_flux: linewidth must be > 0");
  return linewidth_angular * n_ss;
}

double photon_flux_hz(double n_ss, double linewidth_hz) {
  return photon_flux(n_ss, 2.0 * std::numbers::pi * linewidth_hz);
}

SnrResult snr(const SystemParams& params, double drive_amplitude,
              const SnrOptions& options) {
  params.validate();
  const OperatorSet ops = build_operators(options.dims);
  const Matrix h = build_static_hamiltonian(params, ops);
  const DissipatorSet diss = dressed_jump_operators(h, ops, params);
  const ComplexMatrix rho0 = dressed_ground_density(diss.basis);

  DriveConfig both = make_continuous_drive(params, drive_amplitude);
  both.mech_enabled = !options.mech_off_in_both;
  DriveConfig atom_only = both;
  atom_only.mech_enabled = false;

  auto run = [&](const DriveConfig& drive) {
    return evolve(rho0, options.integration, ops, drive, diss);
  };

  SnrResult r;
  if (options.parallel) {
    auto fut = std::async(std::launch::async, run, std::cref(atom_only));
    r.both_traj = run(both);
    r.atom_traj = fut.get();
  } else {
    r.both_traj = run(both);
    r.atom_traj = run(atom_only);
  }
  r.both = steady_state_value(r.both_traj, Observable::cavity, options.window_fraction);
  r.atom_only =
      steady_state_value(r.atom_traj, Observable::cavity, options.window_fraction);
  if (options.require_steady && (!r.both.steady || !r.atom_only.steady))
    fail(ErrorCode::not_steady,
         "snr: trajectory not steady (drift both=" + std::to_string(r.both.drift) +
             ", atom-only=" + std::to_string(r.atom_only.drift) + ")");

  r.n_both = r.both.value;
  r.n_atom_only = r.atom_only.value;
  r.noise = r.n_atom_only;
  r.signal = r.n_both - r.n_atom_only;
  if (r.noise < kNoiseFloor) {
    r.noise_floor = true;
  } else {
    r.eta = r.signal / r.noise;
    r.raw_ratio = r.n_both / r.noise;
  }
  return r;
}

}  // namespace mdce
