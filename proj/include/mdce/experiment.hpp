#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdce/analysis.hpp"
#include "mdce/dynamics.hpp"
#include "mdce/model.hpp"
#include "mdce/perturbation.hpp"
#include "mdce/spectrum.hpp"

namespace mdce {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kConfigSchema = "mdce-config/1";
inline constexpr const char* kSummarySchema = "mdce-summary/1";
inline constexpr const char* kManifestSchema = "mdce-manifest/1";

enum class ExperimentKind { perturb, spectrum, crossing, evolve, fft, steady, snr, sweep };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// How omega_a is chosen before a run.
///   given     - params.omega_a as written
///   bare      - w_c - w_m
///   resonant  - w_c - w_m - delta, closed-form fixed point for `pair`
///   crossing  - numerical gap minimum of `pair` on the truncated H
enum class OmegaAMode { given, bare, resonant, crossing };

std::string to_string(OmegaAMode mode);
OmegaAMode omega_a_mode_from_string(const std::string& name);

struct DriveSpec {
  DriveKind kind = DriveKind::off;
  double amplitude = 0.0;
  /// Ultrafast width: either sigma directly or 1/sigma in units of |g_eff|.
  std::optional<double> sigma;
  std::optional<double> sigma_inverse_geff;
  double t0 = 100.0;
  bool mech_enabled = true;
  bool atom_enabled = true;
  /// Continuous drive prefactor; defaults to params.gamma.
  std::optional<double> rate_scale;
};

struct InitialState {
  bool dressed_ground = true;
  BasisLabel label{};  // used when dressed_ground is false
};

struct ScanSpec {
  double omega_a_min = 0.6;
  double omega_a_max = 0.8;
  int points = 401;
  int levels = 12;  // lowest levels written to the CSV
  std::vector<TargetPair> pairs{{0, 0}, {1, 0}, {0, 1}};
};

struct CrossingSpec {
  std::vector<TargetPair> pairs{{0, 0}};
  std::vector<double> lambdas;  // empty: params.lambda only
  double half_width = 0.0;      // <= 0: automatic
};

struct AnalysisSpec {
  Observable observable = Observable::cavity;
  double window_fraction = 0.2;
  double linewidth_hz = 2e6;  // for the photon-flux conversion
  double peak_factor = 3.0;
  int max_peaks = 8;
};

/// Axes: omega_m, omega_a, lambda, g, loss, amplitude, sigma_inverse_geff.
/// "loss" sets kappa = eta = value and scales gamma by the same factor as eta.
struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  ExperimentKind inner = ExperimentKind::steady;
};

struct VerifySpec {
  Dims bumped{8, 8};
  double dt_tolerance = 1e-4;          // relative change of <a^dag a>(t_end)
  double truncation_tolerance = 0.02;  // relative change of the steady value
  double spectral_tolerance = 1e-3;    // relative change of gaps / couplings
};

struct ExperimentConfig {
  std::string name = "custom";
  ExperimentKind experiment = ExperimentKind::perturb;
  SystemParams params;
  OmegaAMode omega_a_mode = OmegaAMode::given;
  TargetPair pair{0, 0};
  Dims dims{6, 6};
  DriveSpec drive;
  IntegrationConfig integration;
  InitialState initial;
  ScanSpec scan;
  CrossingSpec crossing;
  AnalysisSpec analysis;
  SweepSpec sweep;
  VerifySpec verify;

  /// Throws ErrorCode::config naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Figure recipes; throws ErrorCode::config for an unknown name.
ExperimentConfig preset(const std::string& name);

/// Parameters and drive after omega_a, drive frequencies and the pulse width
/// have been fixed.
struct ResolvedSetup {
  SystemParams params;
  DriveConfig drive;
  double g_eff = 0.0;  // closed form for cfg.pair
};

ResolvedSetup resolve(const ExperimentConfig& cfg);

/// Applies one sweep value to a copy of the config.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& axis,
                                   double value);

struct ConvergenceCheck {
  std::string name;
  double reference = 0.0;
  double refined = 0.0;
  double relative_change = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct RunOptions {
  std::string output_dir = "out";
  bool verify = false;
  int jobs = 1;
  bool write_files = true;
  std::function<void(const std::string&)> log;
};

struct RunManifest {
  nlohmann::json config;
  std::string version = kVersion;
  double wall_seconds = 0.0;
  std::vector<ConvergenceCheck> checks;
  std::vector<std::string> outputs;
  nlohmann::json summary;

  bool checks_passed() const;
  nlohmann::json to_json() const;
};

/// Runs the experiment, writes CSV/JSON outputs and manifest.json into
/// options.output_dir (unless write_files is off) and returns the manifest.
RunManifest run(const ExperimentConfig& cfg, const RunOptions& options);

/// Integrates the trajectory described by cfg at the given truncation and
/// integration settings; nothing is written.
Trajectory simulate(const ExperimentConfig& cfg, const Dims& dims,
                    const IntegrationConfig& integration, const ProgressFn& progress = {},
                    int* excluded_near_degenerate = nullptr);

/// Initial density matrix selected by `initial` for the given dressing basis.
ComplexMatrix initial_density(const InitialState& initial, const Eigensystem& basis,
                              const Dims& dims);

/// Trajectory CSV with columns t,n_qubit,n_cav,n_mech,trace_err.
std::string trajectory_csv(const Trajectory& traj);
std::string spectrum_csv(const Spectrum& spectrum);

/// Write-then-rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mdce
