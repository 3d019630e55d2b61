#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdce/dynamics.hpp"
#include "mdce/model.hpp"

namespace mdce {

/// One-sided DFT magnitude of a real, mean-subtracted series:
///   F(w_k) = |sum_j (N_j - mean) exp(-2 pi i j k / M)|,  w_k = 2 pi k / (M dt)
/// for k = 0 .. M/2 - 1 (angular frequency in units of omega_c).
struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> magnitude;
  std::size_t samples = 0;
  double dt_sample = 0.0;

  double bin_width() const;
};

inline constexpr std::size_t kMinSpectrumSamples = 64;

Spectrum fourier_spectrum(std::span<const double> series, double dt_sample);

struct Peak {
  std::size_t bin = 0;
  double freq = 0.0;
  double magnitude = 0.0;
};

/// Peaks below this fraction of the largest magnitude are rounding noise.
inline constexpr double kPeakFloor = 1e-6;

/// Local maxima above `factor` times the median magnitude, strongest first.
/// Bin 1 is never a peak: its left neighbour is the removed mean, so a
/// decaying envelope would otherwise show up as a spurious lowest peak.
std::vector<Peak> find_peaks(const Spectrum& spectrum, double factor = 3.0);

/// Population oscillations of a resonant pair run at twice the coupling, so
/// a peak at angular frequency w corresponds to the transition rate w / 2.
inline double transition_rate(double angular_frequency) {
  return 0.5 * angular_frequency;
}

enum class Observable { qubit, cavity, mechanics };

Observable observable_from_string(const std::string& name);
std::string to_string(Observable obs);
const std::vector<double>& series(const Trajectory& traj, Observable obs);

inline constexpr double kSteadyDriftThreshold = 0.02;

struct SteadyStateResult {
  double value = 0.0;
  double t_start = 0.0, t_end = 0.0;
  double drift = 0.0;  // |mean(2nd half) - mean(1st half)| / mean
  bool steady = false;
};

/// Time average over the final `window_fraction` of the run.
SteadyStateResult steady_state_value(const Trajectory& traj, Observable obs,
                                     double window_fraction = 0.2,
                                     double drift_threshold = kSteadyDriftThreshold);
SteadyStateResult steady_state_value(std::span<const double> times,
                                     std::span<const double> values,
                                     double window_fraction = 0.2,
                                     double drift_threshold = kSteadyDriftThreshold);

/// Emitted photons per second: angular linewidth (rad/s) times n_ss.
double photon_flux(double n_ss, double linewidth_angular);
double photon_flux_hz(double n_ss, double linewidth_hz);

struct SnrOptions {
  Dims dims;
  IntegrationConfig integration;
  double window_fraction = 0.2;
  bool require_steady = true;
  /// Run the two trajectories on separate threads.
  bool parallel = true;
  /// When set, the "both" run keeps the mechanical drive off as well.
  bool mech_off_in_both = false;
};

inline constexpr double kNoiseFloor = 1e-6;

struct SnrResult {
  double n_both = 0.0;
  double n_atom_only = 0.0;
  double signal = 0.0;  // N1 = N_both - N_atom_only
  double noise = 0.0;   // N2 = N_atom_only
  std::optional<double> eta;        // N1 / N2, empty below the noise floor
  std::optional<double> raw_ratio;  // N_both / N_atom_only
  bool noise_floor = false;
  SteadyStateResult both, atom_only;
  Trajectory both_traj, atom_traj;
};

/// Steady photon numbers with both drives and with the qubit drive only.
/// `params.omega_a` is used as given; the drive is continuous with
/// amplitude `drive_amplitude`.
SnrResult snr(const SystemParams& params, double drive_amplitude,
              const SnrOptions& options);

}  // namespace mdce
