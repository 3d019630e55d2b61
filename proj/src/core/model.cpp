#include "mdce/model.hpp"

#include <cmath>
#include <numbers>

#include "mdce/error.hpp"

namespace mdce {

namespace {

void require(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) fail(ErrorCode::invalid_argument, field + ": " + reason);
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(omega_c) && omega_c > 0, "omega_c", "must be > 0");
  require(std::isfinite(omega_m) && omega_m > 0, "omega_m", "must be > 0");
  require(std::isfinite(omega_a) && omega_a > 0, "omega_a", "must be > 0");
  require(std::isfinite(lambda) && lambda >= 0, "lambda", "must be >= 0");
  require(std::isfinite(g) && g >= 0, "g", "must be >= 0");
  require(std::isfinite(kappa) && kappa >= 0, "kappa", "must be >= 0");
  require(std::isfinite(eta) && eta >= 0, "eta", "must be >= 0");
  require(std::isfinite(gamma) && gamma >= 0, "gamma", "must be >= 0");
}

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> out;
  if (lambda / omega_c > 0.1)
    out.push_back("lambda/omega_c = " + std::to_string(lambda / omega_c) +
                  " exceeds 0.1; second-order closed forms are unvalidated");
  return out;
}

std::string to_string(DriveKind kind) {
  switch (kind) {
    case DriveKind::off: return "off";
    case DriveKind::ultrafast_gaussian: return "ultrafast_gaussian";
    case DriveKind::continuous: return "continuous";
  }
  return "off";
}

DriveKind drive_kind_from_string(const std::string& name) {
  if (name == "off") return DriveKind::off;
  if (name == "ultrafast_gaussian" || name == "ultrafast")
    return DriveKind::ultrafast_gaussian;
  if (name == "continuous") return DriveKind::continuous;
  fail(ErrorCode::config, "drive.kind: unknown drive kind '" + name + "'");
}

void DriveConfig::validate() const {
  require(std::isfinite(amplitude), "drive.amplitude", "must be finite");
  require(std::isfinite(freq_mech) && std::isfinite(freq_atom),
          "drive.freq", "carrier frequencies must be finite");
  if (kind == DriveKind::ultrafast_gaussian) {
    require(std::isfinite(sigma) && sigma > 0, "drive.sigma", "must be > 0");
    require(std::isfinite(t0), "drive.t0", "must be finite");
  }
  if (kind == DriveKind::continuous)
    require(std::isfinite(rate_scale), "drive.rate_scale", "must be finite");
}

double gaussian_envelope(double t, double t0, double sigma) {
  const double x = (t - t0) / sigma;
  return std::exp(-0.5 * x * x) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

DriveAmplitudes drive_amplitudes(double t, const DriveConfig& cfg) {
  double envelope = 0.0;
  switch (cfg.kind) {
    case DriveKind::off: return {};
    case DriveKind::ultrafast_gaussian:
      envelope = cfg.amplitude * gaussian_envelope(t, cfg.t0, cfg.sigma);
      break;
    case DriveKind::continuous:
      envelope = cfg.amplitude * cfg.rate_scale;
      break;
  }
  DriveAmplitudes f;
  if (cfg.mech_enabled) f.mech = envelope * std::cos(cfg.freq_mech * t);
  if (cfg.atom_enabled) f.atom = envelope * std::cos(cfg.freq_atom * t);
  return f;
}

DriveConfig make_ultrafast_drive(const SystemParams& params, double amplitude,
                                 double sigma, double t0) {
  DriveConfig cfg;
  cfg.kind = DriveKind::ultrafast_gaussian;
  cfg.amplitude = amplitude;
  cfg.sigma = sigma;
  cfg.t0 = t0;
  cfg.freq_mech = params.omega_m;
  cfg.freq_atom = params.omega_a;
  return cfg;
}

DriveConfig make_continuous_drive(const SystemParams& params, double amplitude) {
  DriveConfig cfg;
  cfg.kind = DriveKind::continuous;
  cfg.amplitude = amplitude;
  cfg.freq_mech = params.omega_m;
  cfg.freq_atom = params.omega_a;
  cfg.rate_scale = params.gamma;
  return cfg;
}

namespace {

void check_dims(const Matrix& m, const OperatorSet& ops) {
  if (m.rows() != ops.dimension() || m.cols() != ops.dimension())
    fail(ErrorCode::dimension_mismatch, "operator dimension mismatch");
}

}  // namespace

Matrix build_free_hamiltonian(const SystemParams& params, const OperatorSet& ops) {
  return params.omega_a * ops.num_qubit + params.omega_c * ops.num_cav +
         params.omega_m * ops.num_mech;
}

Matrix build_interaction(const SystemParams& params, const OperatorSet& ops) {
  const Matrix x_cav = ops.a + ops.a_dag;
  const Matrix x_mech = ops.b + ops.b_dag;
  const Matrix x_qubit = ops.sigma_plus + ops.sigma_minus;
  const Matrix v_af = params.lambda * x_cav * x_qubit;
  const Matrix v_om = params.g * ops.num_cav * x_mech;
  const Matrix v_dce =
      0.5 * params.g * (ops.a * ops.a + ops.a_dag * ops.a_dag) * x_mech;
  return v_af + v_om + v_dce;
}

Matrix build_static_hamiltonian(const SystemParams& params, const OperatorSet& ops) {
  params.validate();
  check_dims(ops.a, ops);
  Matrix h = build_free_hamiltonian(params, ops) + build_interaction(params, ops);
  // The products above are exactly symmetric in exact arithmetic; remove
  // rounding asymmetry so downstream Hermiticity checks see an exact matrix.
  return 0.5 * (h + h.transpose());
}

Matrix mech_drive_operator(const OperatorSet& ops) { return ops.b + ops.b_dag; }

Matrix atom_drive_operator(const OperatorSet& ops) {
  return ops.sigma_plus + ops.sigma_minus;
}

Matrix build_drive_hamiltonian(double t, const DriveConfig& cfg,
                               const OperatorSet& ops) {
  check_dims(ops.b, ops);
  const DriveAmplitudes f = drive_amplitudes(t, cfg);
  return f.mech * mech_drive_operator(ops) + f.atom * atom_drive_operator(ops);
}

}  // namespace mdce
