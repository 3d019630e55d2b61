#pragma once

#include <string>
#include <vector>

#include "mdce/fockspace.hpp"

namespace mdce {

/// Model parameters, all in units of the cavity frequency (omega_c == 1).
struct SystemParams {
  double omega_c = 1.0;
  double omega_m = 0.3;
  double omega_a = 0.7;
  double lambda = 0.01;  // qubit-cavity
  double g = 0.03;       // photon-phonon
  double kappa = 0.0;    // qubit loss
  double eta = 0.0;      // cavity loss
  double gamma = 0.0;    // mechanical loss

  void validate() const;
  /// Non-fatal notes, e.g. lambda beyond the regime where the second-order
  /// closed forms were checked (lambda/omega_c > 0.1).
  std::vector<std::string> warnings() const;
};

enum class DriveKind { off, ultrafast_gaussian, continuous };

std::string to_string(DriveKind kind);
DriveKind drive_kind_from_string(const std::string& name);

struct DriveConfig {
  DriveKind kind = DriveKind::off;
  double amplitude = 0.0;
  double sigma = 1.0;  // Gaussian std-dev (ultrafast only)
  double t0 = 0.0;     // pulse centre (ultrafast only)
  double freq_mech = 0.0;
  double freq_atom = 0.0;
  bool mech_enabled = true;
  bool atom_enabled = true;
  /// Rate multiplying the continuous drive, F = A * rate_scale * cos(w t).
  /// The continuous recipe ties it to the mechanical loss rate gamma.
  double rate_scale = 0.0;

  void validate() const;
};

struct DriveAmplitudes {
  double mech = 0.0;  // F1, couples to (b + b^dag)
  double atom = 0.0;  // F2, couples to (sigma_+ + sigma_-)
};

/// Normalised Gaussian envelope exp(-(t-t0)^2 / 2 sigma^2) / (sqrt(2 pi) sigma).
double gaussian_envelope(double t, double t0, double sigma);

DriveAmplitudes drive_amplitudes(double t, const DriveConfig& cfg);

/// Pulse pair resonant with the mechanics and qubit of `params`.
DriveConfig make_ultrafast_drive(const SystemParams& params, double amplitude,
                                 double sigma, double t0);
/// Continuous drive A * gamma * cos(w t) on both channels.
DriveConfig make_continuous_drive(const SystemParams& params, double amplitude);

/// H0 = w_a sigma_+ sigma_- + w_c a^dag a + w_m b^dag b
Matrix build_free_hamiltonian(const SystemParams& params, const OperatorSet& ops);
/// V = V_AF + V_OM + V_DCE with all counter-rotating terms kept.
Matrix build_interaction(const SystemParams& params, const OperatorSet& ops);
Matrix build_static_hamiltonian(const SystemParams& params, const OperatorSet& ops);

/// Coupling operators of the two drive channels: (b + b^dag), (sigma_+ + sigma_-).
Matrix mech_drive_operator(const OperatorSet& ops);
Matrix atom_drive_operator(const OperatorSet& ops);

Matrix build_drive_hamiltonian(double t, const DriveConfig& cfg,
                               const OperatorSet& ops);

}  // namespace mdce
