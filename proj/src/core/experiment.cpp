#include "mdce/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "mdce/error.hpp"

namespace mdce {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- names

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::perturb: return "perturb";
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::crossing: return "crossing";
    case ExperimentKind::evolve: return "evolve";
    case ExperimentKind::fft: return "fft";
    case ExperimentKind::steady: return "steady";
    case ExperimentKind::snr: return "snr";
    case ExperimentKind::sweep: return "sweep";
  }
  return "perturb";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::perturb, ExperimentKind::spectrum, ExperimentKind::crossing,
                 ExperimentKind::evolve, ExperimentKind::fft, ExperimentKind::steady,
                 ExperimentKind::snr, ExperimentKind::sweep})
    if (to_string(k) == name) return k;
  if (name == "perturb-report") return ExperimentKind::perturb;
  if (name == "spectrum-scan") return ExperimentKind::spectrum;
  fail(ErrorCode::config, "experiment: unknown kind '" + name + "'");
}

std::string to_string(OmegaAMode mode) {
  switch (mode) {
    case OmegaAMode::given: return "given";
    case OmegaAMode::bare: return "bare";
    case OmegaAMode::resonant: return "resonant";
    case OmegaAMode::crossing: return "crossing";
  }
  return "given";
}

OmegaAMode omega_a_mode_from_string(const std::string& name) {
  for (auto m : {OmegaAMode::given, OmegaAMode::bare, OmegaAMode::resonant, OmegaAMode::crossing})
    if (to_string(m) == name) return m;
  fail(ErrorCode::config, "omega_a_mode: unknown mode '" + name + "'");
}

// ---------------------------------------------------------------- validation

namespace {

template <class F>
void field(const std::string& name, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    fail(ErrorCode::config, name + ": " + e.what());
  }
}

void require(bool ok, const std::string& name, const std::string& reason) {
  if (!ok) fail(ErrorCode::config, name + ": " + reason);
}

bool is_trajectory_kind(ExperimentKind k) {
  return k == ExperimentKind::evolve || k == ExperimentKind::fft ||
         k == ExperimentKind::steady || k == ExperimentKind::snr;
}

const std::set<std::string>& sweep_axes() {
  static const std::set<std::string> axes{"omega_m", "omega_a", "lambda", "g",
                                          "loss", "amplitude", "sigma_inverse_geff"};
  return axes;
}

void validate_kind(const ExperimentConfig& c, ExperimentKind kind) {
  if (is_trajectory_kind(kind)) {
    field("integration", [&] { c.integration.validate(); });
    const DriveSpec& d = c.drive;
    require(std::isfinite(d.amplitude), "drive.amplitude", "must be finite");
    if (d.kind == DriveKind::ultrafast_gaussian) {
      require(d.sigma.has_value() != d.sigma_inverse_geff.has_value(), "drive",
              "ultrafast drive needs exactly one of sigma, sigma_inverse_geff");
      if (d.sigma) require(*d.sigma > 0, "drive.sigma", "must be > 0");
      if (d.sigma_inverse_geff)
        require(*d.sigma_inverse_geff > 0, "drive.sigma_inverse_geff", "must be > 0");
      require(std::isfinite(d.t0), "drive.t0", "must be finite");
    }
    if (d.rate_scale) require(*d.rate_scale >= 0, "drive.rate_scale", "must be >= 0");
    if (!c.initial.dressed_ground)
      require(in_bounds(c.initial.label, c.dims), "initial", "state outside truncation");
    const AnalysisSpec& a = c.analysis;
    require(a.window_fraction > 0 && a.window_fraction <= 1, "analysis.window_fraction",
            "must be in (0, 1]");
    require(a.linewidth_hz > 0, "analysis.linewidth_hz", "must be > 0");
    require(a.peak_factor > 0, "analysis.peak_factor", "must be > 0");
    require(a.max_peaks >= 1, "analysis.max_peaks", "must be >= 1");
    field("verify.bumped_dims", [&] { c.verify.bumped.validate(); });
  }
  if (kind == ExperimentKind::snr)
    require(c.drive.kind == DriveKind::continuous, "drive.kind",
            "snr needs the continuous drive");
  if (kind == ExperimentKind::spectrum) {
    const ScanSpec& s = c.scan;
    require(s.omega_a_max > s.omega_a_min, "scan", "omega_a_max must exceed omega_a_min");
    require(s.omega_a_min > 0, "scan.omega_a_min", "must be > 0");
    require(s.points >= 2, "scan.points", "must be >= 2");
    require(s.levels >= 1 && s.levels <= c.dims.total(), "scan.levels",
            "must be in [1, dimension]");
    for (const auto& p : s.pairs) {
      field("scan.pairs", [&] { p.validate(); });
      require(in_bounds(p.excited(), c.dims) && in_bounds(p.photon(), c.dims),
              "scan.pairs", "pair outside truncation");
    }
  }
  if (kind == ExperimentKind::crossing) {
    require(!c.crossing.pairs.empty(), "crossing.pairs", "empty");
    for (const auto& p : c.crossing.pairs) {
      field("crossing.pairs", [&] { p.validate(); });
      require(in_bounds(p.excited(), c.dims) && in_bounds(p.photon(), c.dims),
              "crossing.pairs", "pair outside truncation");
    }
    for (double l : c.crossing.lambdas)
      require(l > 0 && std::isfinite(l), "crossing.lambdas", "values must be > 0");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!name.empty(), "name", "empty");
  field("params", [&] { params.validate(); });
  field("dims", [&] { dims.validate(); });
  field("pair", [&] { pair.validate(); });
  if (omega_a_mode == OmegaAMode::crossing)
    require(in_bounds(pair.excited(), dims) && in_bounds(pair.photon(), dims), "pair",
            "outside truncation");
  if (experiment == ExperimentKind::sweep) {
    require(sweep_axes().count(sweep.axis) == 1, "sweep.axis",
            "unknown axis '" + sweep.axis + "'");
    require(!sweep.values.empty(), "sweep.values", "empty");
    require(sweep.inner != ExperimentKind::sweep, "sweep.inner", "nested sweeps");
    for (double v : sweep.values) require(std::isfinite(v), "sweep.values", "non-finite");
    if (sweep.axis == "sigma_inverse_geff")
      require(drive.kind == DriveKind::ultrafast_gaussian, "sweep.axis",
              "sigma_inverse_geff needs the ultrafast drive");
    // each point must be valid on its own
    for (double v : sweep.values) {
      ExperimentConfig sub = apply_sweep_value(*this, sweep.axis, v);
      sub.experiment = sweep.inner;
      sub.validate();
    }
    return;
  }
  validate_kind(*this, experiment);
}

// ---------------------------------------------------------------- json

namespace {

json pair_json(const TargetPair& p) { return json::array({p.n, p.m}); }

TargetPair pair_from(const json& j, const std::string& name) {
  require(j.is_array() && j.size() == 2 && j[0].is_number_integer() &&
              j[1].is_number_integer(),
          name, "expected [n, m] integers");
  return {j[0].get<int>(), j[1].get<int>()};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string label_string(const BasisLabel& b) {
  return std::string(b.j == Qubit::e ? "e" : "g") + "," + std::to_string(b.n) + "," +
         std::to_string(b.m);
}

BasisLabel label_from(const std::string& s) {
  BasisLabel b;
  char q = 0;
  int n = -1, m = -1;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  in >> q >> c1 >> n >> c2 >> m;
  require(!in.fail() && (q == 'g' || q == 'e') && c1 == ',' && c2 == ',' && n >= 0 && m >= 0,
          "initial", "expected 'dressed_ground' or a label like 'g,0,0', got '" + s + "'");
  in >> std::ws;
  require(in.eof(), "initial", "trailing characters in '" + s + "'");
  b.j = q == 'e' ? Qubit::e : Qubit::g;
  b.n = n;
  b.m = m;
  return b;
}

// Reads known keys from an object and rejects anything else.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), path_.empty() ? "config" : path_, "expected an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) fail(ErrorCode::config, name(key) + ": unknown field");
  }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::config, name(key) + ": wrong type");
    }
  }
  void get_opt(const std::string& key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0;
    get(key, v);
    out = v;
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;
  j["experiment"] = to_string(c.experiment);
  const SystemParams& p = c.params;
  j["params"] = {{"omega_c", p.omega_c}, {"omega_m", p.omega_m}, {"omega_a", p.omega_a},
                 {"lambda", p.lambda},   {"g", p.g},             {"kappa", p.kappa},
                 {"eta", p.eta},         {"gamma", p.gamma}};
  j["omega_a_mode"] = to_string(c.omega_a_mode);
  j["pair"] = pair_json(c.pair);
  j["dims"] = json::array({c.dims.n_cav, c.dims.n_mech});
  const DriveSpec& d = c.drive;
  j["drive"] = {{"kind", to_string(d.kind)},
                {"amplitude", d.amplitude},
                {"sigma", optional_json(d.sigma)},
                {"sigma_inverse_geff", optional_json(d.sigma_inverse_geff)},
                {"t0", d.t0},
                {"mech", d.mech_enabled},
                {"atom", d.atom_enabled},
                {"rate_scale", optional_json(d.rate_scale)}};
  const IntegrationConfig& in = c.integration;
  j["integration"] = {{"dt", in.dt},
                      {"t_end", in.t_end},
                      {"store_every", in.store_every},
                      {"min_eig_every", in.min_eig_every},
                      {"trace_tolerance", in.trace_tolerance},
                      {"positivity_tolerance", in.positivity_tolerance}};
  j["initial"] = c.initial.dressed_ground ? std::string("dressed_ground")
                                          : label_string(c.initial.label);
  json pairs = json::array();
  for (const auto& q : c.scan.pairs) pairs.push_back(pair_json(q));
  j["scan"] = {{"omega_a_min", c.scan.omega_a_min},
               {"omega_a_max", c.scan.omega_a_max},
               {"points", c.scan.points},
               {"levels", c.scan.levels},
               {"pairs", pairs}};
  json cpairs = json::array();
  for (const auto& q : c.crossing.pairs) cpairs.push_back(pair_json(q));
  j["crossing"] = {{"pairs", cpairs},
                   {"lambdas", c.crossing.lambdas},
                   {"half_width", c.crossing.half_width}};
  j["analysis"] = {{"observable", to_string(c.analysis.observable)},
                   {"window_fraction", c.analysis.window_fraction},
                   {"linewidth_hz", c.analysis.linewidth_hz},
                   {"peak_factor", c.analysis.peak_factor},
                   {"max_peaks", c.analysis.max_peaks}};
  j["sweep"] = {{"axis", c.sweep.axis},
                {"values", c.sweep.values},
                {"inner", to_string(c.sweep.inner)}};
  j["verify"] = {{"bumped_dims", json::array({c.verify.bumped.n_cav, c.verify.bumped.n_mech})},
                 {"dt_tolerance", c.verify.dt_tolerance},
                 {"truncation_tolerance", c.verify.truncation_tolerance},
                 {"spectral_tolerance", c.verify.spectral_tolerance}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  if (r.has("schema")) {
    std::string schema;
    r.get("schema", schema);
    require(schema == kConfigSchema, "schema",
            "expected '" + std::string(kConfigSchema) + "', got '" + schema + "'");
  }
  r.get("name", c.name);
  if (r.has("experiment")) {
    std::string kind;
    r.get("experiment", kind);
    c.experiment = experiment_kind_from_string(kind);
  }
  if (r.has("params")) {
    Reader p(r.at("params"), "params");
    p.get("omega_c", c.params.omega_c);
    p.get("omega_m", c.params.omega_m);
    p.get("omega_a", c.params.omega_a);
    p.get("lambda", c.params.lambda);
    p.get("g", c.params.g);
    p.get("kappa", c.params.kappa);
    p.get("eta", c.params.eta);
    p.get("gamma", c.params.gamma);
  }
  if (r.has("omega_a_mode")) {
    std::string mode;
    r.get("omega_a_mode", mode);
    c.omega_a_mode = omega_a_mode_from_string(mode);
  }
  if (r.has("pair")) c.pair = pair_from(r.at("pair"), "pair");
  if (r.has("dims")) {
    const TargetPair d = pair_from(r.at("dims"), "dims");
    c.dims = {d.n, d.m};
  }
  if (r.has("drive")) {
    Reader d(r.at("drive"), "drive");
    if (d.has("kind")) {
      std::string kind;
      d.get("kind", kind);
      try {
        c.drive.kind = drive_kind_from_string(kind);
      } catch (const Error& e) {
        fail(ErrorCode::config, std::string("drive.kind: ") + e.what());
      }
    }
    d.get("amplitude", c.drive.amplitude);
    d.get_opt("sigma", c.drive.sigma);
    d.get_opt("sigma_inverse_geff", c.drive.sigma_inverse_geff);
    d.get("t0", c.drive.t0);
    d.get("mech", c.drive.mech_enabled);
    d.get("atom", c.drive.atom_enabled);
    d.get_opt("rate_scale", c.drive.rate_scale);
  }
  if (r.has("integration")) {
    Reader in(r.at("integration"), "integration");
    in.get("dt", c.integration.dt);
    in.get("t_end", c.integration.t_end);
    in.get("store_every", c.integration.store_every);
    in.get("min_eig_every", c.integration.min_eig_every);
    in.get("trace_tolerance", c.integration.trace_tolerance);
    in.get("positivity_tolerance", c.integration.positivity_tolerance);
  }
  if (r.has("initial")) {
    std::string s;
    r.get("initial", s);
    if (s == "dressed_ground") {
      c.initial.dressed_ground = true;
    } else {
      c.initial.dressed_ground = false;
      c.initial.label = label_from(s);
    }
  }
  if (r.has("scan")) {
    Reader s(r.at("scan"), "scan");
    s.get("omega_a_min", c.scan.omega_a_min);
    s.get("omega_a_max", c.scan.omega_a_max);
    s.get("points", c.scan.points);
    s.get("levels", c.scan.levels);
    if (s.has("pairs")) {
      c.scan.pairs.clear();
      for (const auto& p : s.at("pairs")) c.scan.pairs.push_back(pair_from(p, "scan.pairs"));
    }
  }
  if (r.has("crossing")) {
    Reader s(r.at("crossing"), "crossing");
    if (s.has("pairs")) {
      c.crossing.pairs.clear();
      for (const auto& p : s.at("pairs"))
        c.crossing.pairs.push_back(pair_from(p, "crossing.pairs"));
    }
    s.get("lambdas", c.crossing.lambdas);
    s.get("half_width", c.crossing.half_width);
  }
  if (r.has("analysis")) {
    Reader a(r.at("analysis"), "analysis");
    if (a.has("observable")) {
      std::string obs;
      a.get("observable", obs);
      c.analysis.observable = observable_from_string(obs);
    }
    a.get("window_fraction", c.analysis.window_fraction);
    a.get("linewidth_hz", c.analysis.linewidth_hz);
    a.get("peak_factor", c.analysis.peak_factor);
    a.get("max_peaks", c.analysis.max_peaks);
  }
  if (r.has("sweep")) {
    Reader s(r.at("sweep"), "sweep");
    s.get("axis", c.sweep.axis);
    s.get("values", c.sweep.values);
    if (s.has("inner")) {
      std::string inner;
      s.get("inner", inner);
      c.sweep.inner = experiment_kind_from_string(inner);
    }
  }
  if (r.has("verify")) {
    Reader v(r.at("verify"), "verify");
    if (v.has("bumped_dims")) {
      const TargetPair d = pair_from(v.at("bumped_dims"), "verify.bumped_dims");
      c.verify.bumped = {d.n, d.m};
    }
    v.get("dt_tolerance", c.verify.dt_tolerance);
    v.get("truncation_tolerance", c.verify.truncation_tolerance);
    v.get("spectral_tolerance", c.verify.spectral_tolerance);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config, "config '" + path + "': " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  c.validate();
  return c;
}

// ---------------------------------------------------------------- presets

namespace {

ExperimentConfig strong_coupling(double amplitude) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::fft;
  c.params.kappa = c.params.eta = c.params.gamma = 1e-4;
  c.omega_a_mode = OmegaAMode::resonant;
  c.drive.kind = DriveKind::ultrafast_gaussian;
  c.drive.amplitude = amplitude;
  c.drive.sigma_inverse_geff = 16.0;
  c.drive.t0 = 100.0;
  c.integration.t_end = 2e4;
  c.integration.store_every = 50;
  return c;
}

ExperimentConfig weak_coupling(bool mech) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::steady;
  c.params.kappa = c.params.eta = 2.5e-3;
  c.params.gamma = 2.5e-4;
  c.omega_a_mode = OmegaAMode::resonant;
  c.drive.kind = DriveKind::continuous;
  c.drive.amplitude = 12.0;
  c.drive.mech_enabled = mech;
  c.integration.t_end = 1e4;
  c.integration.store_every = 50;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig3",  "fig4",  "fig5a", "fig5b", "fig5c", "fig5d", "fig5e",
          "fig5f", "fig6a", "fig6b", "fig7a", "fig7b", "fig8"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig3") {
    c.experiment = ExperimentKind::spectrum;
    c.scan.omega_a_min = 0.6;
    c.scan.omega_a_max = 0.8;
    c.scan.points = 401;
    c.scan.pairs = {{0, 0}, {1, 0}, {0, 1}};
    c.crossing.pairs = c.scan.pairs;
  } else if (name == "fig4") {
    c.experiment = ExperimentKind::crossing;
    c.crossing.pairs = {{0, 0}, {0, 1}};
    c.crossing.lambdas = {0.002, 0.004, 0.006, 0.008, 0.01, 0.02, 0.05, 0.1};
  } else if (name == "fig5a" || name == "fig5b") {
    c = strong_coupling(std::numbers::pi / 3);
  } else if (name == "fig5c" || name == "fig5d") {
    c = strong_coupling(2 * std::numbers::pi / 3);
  } else if (name == "fig5e" || name == "fig5f") {
    c = strong_coupling(std::numbers::pi);
  } else if (name == "fig6a") {
    c = weak_coupling(true);
  } else if (name == "fig6b") {
    c = weak_coupling(false);
  } else if (name == "fig7a") {
    c = strong_coupling(std::numbers::pi);
    c.experiment = ExperimentKind::sweep;
    c.sweep = {"sigma_inverse_geff", {16.0, 2.0, 1.0}, ExperimentKind::evolve};
  } else if (name == "fig7b") {
    c = strong_coupling(std::numbers::pi);
    c.experiment = ExperimentKind::sweep;
    c.sweep = {"loss", {1.0 / 8000, 1.0 / 5000, 1.0 / 3000}, ExperimentKind::evolve};
  } else if (name == "fig8") {
    c = weak_coupling(true);
    c.experiment = ExperimentKind::sweep;
    c.sweep = {"omega_m", {0.01, 0.05, 0.1, 0.15, 0.2, 0.3}, ExperimentKind::snr};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorCode::config, "unknown preset '" + name + "' (known: " + known + ")");
  }
  c.name = name;
  return c;
}

// ---------------------------------------------------------------- setup

ResolvedSetup resolve(const ExperimentConfig& cfg) {
  ResolvedSetup r;
  r.params = cfg.params;
  switch (cfg.omega_a_mode) {
    case OmegaAMode::given: break;
    case OmegaAMode::bare: r.params.omega_a = r.params.omega_c - r.params.omega_m; break;
    case OmegaAMode::resonant:
      r.params.omega_a = effective_resonant_omega_a(cfg.pair, r.params);
      break;
    case OmegaAMode::crossing:
      r.params.omega_a = find_avoided_crossing(r.params, cfg.dims, cfg.pair).omega_a_star;
      break;
  }
  r.params.validate();
  r.g_eff = g_eff_closed(cfg.pair, r.params);

  const DriveSpec& d = cfg.drive;
  switch (d.kind) {
    case DriveKind::off: r.drive = DriveConfig{}; break;
    case DriveKind::ultrafast_gaussian: {
      const double sigma = d.sigma ? *d.sigma
                                   : 1.0 / (*d.sigma_inverse_geff * std::abs(r.g_eff));
      if (!std::isfinite(sigma) || sigma <= 0)
        fail(ErrorCode::config, "drive: pulse width undefined (g_eff = 0)");
      r.drive = make_ultrafast_drive(r.params, d.amplitude, sigma, d.t0);
      break;
    }
    case DriveKind::continuous:
      r.drive = make_continuous_drive(r.params, d.amplitude);
      if (d.rate_scale) r.drive.rate_scale = *d.rate_scale;
      break;
  }
  r.drive.mech_enabled = d.mech_enabled;
  r.drive.atom_enabled = d.atom_enabled;
  r.drive.validate();
  return r;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& axis,
                                   double value) {
  ExperimentConfig c = cfg;
  if (axis == "omega_m") {
    c.params.omega_m = value;
  } else if (axis == "omega_a") {
    c.params.omega_a = value;
    c.omega_a_mode = OmegaAMode::given;
  } else if (axis == "lambda") {
    c.params.lambda = value;
  } else if (axis == "g") {
    c.params.g = value;
  } else if (axis == "loss") {
    const double ratio = cfg.params.eta > 0 ? cfg.params.gamma / cfg.params.eta : 1.0;
    c.params.kappa = c.params.eta = value;
    c.params.gamma = value * ratio;
  } else if (axis == "amplitude") {
    c.drive.amplitude = value;
  } else if (axis == "sigma_inverse_geff") {
    c.drive.sigma.reset();
    c.drive.sigma_inverse_geff = value;
  } else {
    fail(ErrorCode::config, "sweep.axis: unknown axis '" + axis + "'");
  }
  return c;
}

Trajectory simulate(const ExperimentConfig& cfg, const Dims& dims,
                    const IntegrationConfig& integration, const ProgressFn& progress,
                    int* excluded_near_degenerate) {
  const ResolvedSetup rs = resolve(cfg);
  const OperatorSet ops = build_operators(dims);
  const Matrix h = build_static_hamiltonian(rs.params, ops);
  const DissipatorSet diss = dressed_jump_operators(h, ops, rs.params);
  if (excluded_near_degenerate) *excluded_near_degenerate = diss.excluded_near_degenerate;
  const ComplexMatrix rho0 = initial_density(cfg.initial, diss.basis, dims);
  return evolve(rho0, integration, ops, rs.drive, diss, progress);
}

ComplexMatrix initial_density(const InitialState& initial, const Eigensystem& basis,
                              const Dims& dims) {
  if (initial.dressed_ground) return dressed_ground_density(basis);
  return bare_state_density(initial.label, dims);
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,n_qubit,n_cav,n_mech,trace_err\n";
  out.reserve(traj.size() * 96);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += num(traj.times[k]) + ',' + num(traj.n_qubit[k]) + ',' + num(traj.n_cav[k]) + ',' +
           num(traj.n_mech[k]) + ',' + num(traj.trace_err[k]) + '\n';
  }
  return out;
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "freq,magnitude\n";
  for (std::size_t k = 0; k < spectrum.freqs.size(); ++k)
    out += num(spectrum.freqs[k]) + ',' + num(spectrum.magnitude[k]) + '\n';
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::io, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, "cannot rename '" + tmp + "': " + ec.message());
}

bool RunManifest::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConvergenceCheck& c) { return c.passed; });
}

json RunManifest::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks)
    checks_json.push_back({{"name", c.name},
                           {"reference", c.reference},
                           {"refined", c.refined},
                           {"relative_change", c.relative_change},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed}});
  return {{"schema", kManifestSchema}, {"version", version},  {"config", config},
          {"wall_seconds", wall_seconds}, {"checks", checks_json}, {"outputs", outputs}};
}

// ---------------------------------------------------------------- experiments

namespace {

struct Context {
  const RunOptions& options;
  fs::path dir;         // where this experiment writes
  std::string prefix;   // relative path prefix for the manifest list
  std::vector<std::string>* outputs;
  std::vector<ConvergenceCheck>* checks;
  std::mutex* mutex;

  void log(const std::string& msg) const {
    if (!options.log) return;
    std::lock_guard lock(*mutex);
    options.log(msg);
  }
  void write(const std::string& file, const std::string& content) const {
    if (!options.write_files) return;
    write_file_atomic((dir / file).string(), content);
    std::lock_guard lock(*mutex);
    outputs->push_back(prefix + file);
  }
  void check(ConvergenceCheck c) const {
    std::lock_guard lock(*mutex);
    checks->push_back(std::move(c));
  }
};

double relative_change(double reference, double refined) {
  const double scale = std::max(std::abs(reference), 1e-300);
  return std::abs(refined - reference) / scale;
}

ConvergenceCheck make_check(const std::string& name, double reference, double refined,
                            double tolerance) {
  ConvergenceCheck c{name, reference, refined, relative_change(reference, refined), tolerance,
                     false};
  c.passed = c.relative_change < tolerance;
  return c;
}

/// Runs jobs on up to `jobs` threads; results are indexed, so assembly order
/// is fixed. The first exception (by index) is rethrown after all finish.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

json params_json(const SystemParams& p) {
  return {{"omega_c", p.omega_c}, {"omega_m", p.omega_m}, {"omega_a", p.omega_a},
          {"lambda", p.lambda},   {"g", p.g},             {"kappa", p.kappa},
          {"eta", p.eta},         {"gamma", p.gamma}};
}

json setup_json(const ExperimentConfig& cfg, const ResolvedSetup& rs) {
  json j;
  j["params"] = params_json(rs.params);
  j["omega_a"] = rs.params.omega_a;
  j["omega_a_mode"] = to_string(cfg.omega_a_mode);
  j["pair"] = pair_json(cfg.pair);
  j["dims"] = json::array({cfg.dims.n_cav, cfg.dims.n_mech});
  j["g_eff"] = rs.g_eff;
  j["abs_g_eff"] = std::abs(rs.g_eff);
  j["drive"] = {{"kind", to_string(rs.drive.kind)},
                {"amplitude", rs.drive.amplitude},
                {"sigma", rs.drive.sigma},
                {"t0", rs.drive.t0},
                {"freq_mech", rs.drive.freq_mech},
                {"freq_atom", rs.drive.freq_atom},
                {"mech", rs.drive.mech_enabled},
                {"atom", rs.drive.atom_enabled},
                {"rate_scale", rs.drive.rate_scale}};
  j["warnings"] = rs.params.warnings();
  return j;
}

Dims reach_dims(const Dims& dims, const TargetPair& pair) {
  const Dims need = pair.minimal_dims();
  return {std::max(dims.n_cav, need.n_cav), std::max(dims.n_mech, need.n_mech)};
}

json run_perturb(const Context& ctx, const ExperimentConfig& cfg) {
  const ResolvedSetup rs = resolve(cfg);
  const Dims dims = reach_dims(cfg.dims, cfg.pair);
  const PerturbationReport rep = perturbation_report(cfg.pair, rs.params, dims);
  json j = setup_json(cfg, rs);
  j["report_dims"] = json::array({dims.n_cav, dims.n_mech});
  j["g_eff_closed"] = rep.g_eff_closed;
  j["g_eff_generic"] = rep.g_eff_generic;
  j["g_eff_generic_at_omega_a"] = rep.g_eff_generic_at_omega_a;
  j["eps1"] = rep.eps1;
  j["eps2"] = rep.eps2;
  j["eps1_generic"] = rep.eps1_generic;
  j["eps2_generic"] = rep.eps2_generic;
  j["delta"] = rep.delta;
  j["delta_closed"] = rep.delta_closed;
  j["resonant_omega_a"] = rep.resonant_omega_a;
  j["notes"] = rep.notes;
  json paths = json::array();
  std::string csv = "intermediate,contribution\n";
  for (const auto& p : rep.paths) {
    paths.push_back({{"intermediate", label_string(p.intermediate)},
                     {"contribution", p.contribution}});
    csv += '"' + label_string(p.intermediate) + "\"," + num(p.contribution) + '\n';
  }
  j["paths"] = paths;
  ctx.write("paths.csv", csv);

  if (ctx.options.verify) {
    const Dims big{dims.n_cav + 2, dims.n_mech + 2};
    const PerturbationReport b = perturbation_report(cfg.pair, rs.params, big);
    ctx.check(make_check("truncation:g_eff_generic", rep.g_eff_generic, b.g_eff_generic,
                         cfg.verify.spectral_tolerance));
  }
  return j;
}

json crossing_json(const CrossingResult& c) {
  const double half = c.gap / 2, ge = c.predicted_gap / 2;
  return {{"pair", pair_json(c.pair)},
          {"omega_a_star", c.omega_a_star},
          {"gap", c.gap},
          {"half_gap", half},
          {"abs_g_eff", ge},
          {"half_gap_rel_err", relative_change(ge, half)},
          {"offset", c.offset},
          {"delta_closed", c.predicted_delta},
          {"delta_rel_err", relative_change(c.predicted_delta, c.offset)},
          {"evaluations", c.evaluations}};
}

std::string level_label(int state, const Dims& dims, bool ambiguous) {
  const BasisLabel b = basis_label(state, dims);
  return std::string(b.j == Qubit::e ? "e" : "g") + "_" + std::to_string(b.n) + "_" +
         std::to_string(b.m) + (ambiguous ? "*" : "");
}

json run_spectrum(const Context& ctx, const ExperimentConfig& cfg) {
  const ResolvedSetup rs = resolve(cfg);
  const ScanSpec& s = cfg.scan;
  const LevelScan scan =
      scan_levels(rs.params, cfg.dims, s.omega_a_min, s.omega_a_max, s.points, s.pairs);

  std::string csv = "omega_a";
  for (int k = 0; k < s.levels; ++k) csv += ",E" + std::to_string(k);
  for (int k = 0; k < s.levels; ++k) csv += ",label" + std::to_string(k);
  csv += '\n';
  for (int gp = 0; gp < s.points; ++gp) {
    csv += num(scan.omega_a_grid[gp]);
    for (int k = 0; k < s.levels; ++k) csv += ',' + num(scan.levels(gp, k));
    for (int k = 0; k < s.levels; ++k)
      csv += ',' + level_label(scan.dominant_state[gp][k], cfg.dims, scan.ambiguous[gp][k]);
    csv += '\n';
  }
  ctx.write("levels.csv", csv);

  std::string tracked = "pair_n,pair_m,omega_a,gap,overlap_excited,overlap_photon,ambiguous\n";
  json pairs = json::array();
  for (std::size_t ip = 0; ip < s.pairs.size(); ++ip) {
    std::size_t best = 0;
    for (int gp = 0; gp < s.points; ++gp) {
      const TrackedPair& t = scan.tracked[ip][gp];
      tracked += std::to_string(s.pairs[ip].n) + ',' + std::to_string(s.pairs[ip].m) + ',' +
                 num(scan.omega_a_grid[gp]) + ',' + num(t.gap) + ',' + num(t.overlap_excited) +
                 ',' + num(t.overlap_photon) + ',' + (t.ambiguous ? "1" : "0") + '\n';
      if (t.gap < scan.tracked[ip][best].gap) best = gp;
    }
    json pj = {{"pair", pair_json(s.pairs[ip])},
               {"grid_min_omega_a", scan.omega_a_grid[best]},
               {"grid_min_gap", scan.tracked[ip][best].gap}};
    try {
      pj["crossing"] = crossing_json(find_avoided_crossing(rs.params, cfg.dims, s.pairs[ip]));
    } catch (const Error& e) {
      pj["crossing"] = nullptr;
      pj["crossing_error"] = e.what();
    }
    pairs.push_back(pj);
  }
  ctx.write("tracked.csv", tracked);

  json j = setup_json(cfg, rs);
  j["scan"] = {{"omega_a_min", s.omega_a_min}, {"omega_a_max", s.omega_a_max},
               {"points", s.points}};
  j["pairs"] = pairs;

  if (ctx.options.verify) {
    for (const auto& pair : s.pairs) {
      try {
        const double g0 = find_avoided_crossing(rs.params, cfg.dims, pair).gap;
        const double g1 = find_avoided_crossing(rs.params, cfg.verify.bumped, pair).gap;
        ctx.check(make_check("truncation:gap(" + std::to_string(pair.n) + "," +
                                 std::to_string(pair.m) + ")",
                             g0, g1, cfg.verify.spectral_tolerance));
      } catch (const Error&) {
      }
    }
  }
  return j;
}

json run_crossing(const Context& ctx, const ExperimentConfig& cfg) {
  const ResolvedSetup rs = resolve(cfg);
  std::vector<double> lambdas = cfg.crossing.lambdas;
  if (lambdas.empty()) lambdas.push_back(rs.params.lambda);
  CrossingOptions opt;
  opt.half_width = cfg.crossing.half_width;

  struct Task {
    TargetPair pair;
    double lambda;
  };
  std::vector<Task> tasks;
  for (const auto& p : cfg.crossing.pairs)
    for (double l : lambdas) tasks.push_back({p, l});
  std::vector<json> rows(tasks.size());
  std::vector<CrossingResult> results(tasks.size());
  parallel_for(tasks.size(), ctx.options.jobs, [&](std::size_t i) {
    SystemParams p = rs.params;
    p.lambda = tasks[i].lambda;
    results[i] = find_avoided_crossing(p, cfg.dims, tasks[i].pair, opt);
    rows[i] = crossing_json(results[i]);
    rows[i]["lambda"] = tasks[i].lambda;
  });

  std::string csv =
      "pair_n,pair_m,lambda,omega_a_star,gap,half_gap,abs_g_eff,half_gap_rel_err,offset,"
      "delta_closed,delta_rel_err\n";
  for (const auto& r : rows) {
    csv += std::to_string(r["pair"][0].get<int>()) + ',' + std::to_string(r["pair"][1].get<int>());
    for (const char* k : {"lambda", "omega_a_star", "gap", "half_gap", "abs_g_eff",
                          "half_gap_rel_err", "offset", "delta_closed", "delta_rel_err"})
      csv += ',' + num(r[k].get<double>());
    csv += '\n';
  }
  ctx.write("crossing.csv", csv);

  json j = setup_json(cfg, rs);
  j["crossings"] = rows;

  if (ctx.options.verify) {
    parallel_for(tasks.size(), ctx.options.jobs, [&](std::size_t i) {
      SystemParams p = rs.params;
      p.lambda = tasks[i].lambda;
      const CrossingResult b = find_avoided_crossing(p, cfg.verify.bumped, tasks[i].pair, opt);
      const std::string tag = "(" + std::to_string(tasks[i].pair.n) + "," +
                              std::to_string(tasks[i].pair.m) + ",lambda=" +
                              num(tasks[i].lambda) + ")";
      ctx.check(make_check("truncation:gap" + tag, results[i].gap, b.gap,
                           cfg.verify.spectral_tolerance));
      ctx.check(make_check("truncation:offset" + tag, results[i].offset, b.offset,
                           cfg.verify.spectral_tolerance));
    });
  }
  return j;
}

struct TrajectoryRun {
  ResolvedSetup setup;
  Trajectory traj;
  int excluded = 0;
};

TrajectoryRun simulate(const Context& ctx, const ExperimentConfig& cfg, const Dims& dims,
                       const IntegrationConfig& integ, const std::string& tag) {
  TrajectoryRun r;
  r.setup = resolve(cfg);
  const std::string label = cfg.name + (tag.empty() ? "" : " [" + tag + "]");
  ProgressFn progress = [&](double t, double t_end) {
    ctx.log(label + ": t = " + num(std::round(t)) + " / " + num(t_end));
  };
  r.traj = mdce::simulate(cfg, dims, integ, progress, &r.excluded);
  return r;
}

json trajectory_summary(const Trajectory& t) {
  double max_trace = 0, min_eig = 0;
  for (double e : t.trace_err) max_trace = std::max(max_trace, e);
  if (!t.min_eig.empty()) min_eig = *std::min_element(t.min_eig.begin(), t.min_eig.end());
  return {{"samples", t.size()},
          {"sample_interval", t.sample_interval()},
          {"final", {{"t", t.times.back()},
                     {"n_qubit", t.n_qubit.back()},
                     {"n_cav", t.n_cav.back()},
                     {"n_mech", t.n_mech.back()}}},
          {"max_trace_err", max_trace},
          {"max_hermiticity_error", t.max_hermiticity_error},
          {"min_eigenvalue", min_eig}};
}

json steady_json(const SteadyStateResult& s) {
  return {{"value", s.value},
          {"t_start", s.t_start},
          {"t_end", s.t_end},
          {"drift", s.drift},
          {"steady", s.steady}};
}

void verify_trajectory(const Context& ctx, const ExperimentConfig& cfg, const Trajectory& base) {
  // dt halving: <a^dag a> at t_end
  IntegrationConfig half = cfg.integration;
  half.dt /= 2;
  half.store_every *= 2;
  // truncation bump: steady photon number over the analysis window
  struct Job {
    std::string name;
    Dims dims;
    IntegrationConfig integ;
  };
  const std::vector<Job> jobs{{"dt/2", cfg.dims, half}, {"truncation", cfg.verify.bumped,
                                                         cfg.integration}};
  std::vector<Trajectory> out(jobs.size());
  parallel_for(jobs.size(), ctx.options.jobs, [&](std::size_t i) {
    out[i] = simulate(ctx, cfg, jobs[i].dims, jobs[i].integ, "verify " + jobs[i].name).traj;
  });
  ctx.check(make_check("dt_halving:n_cav(t_end)", base.n_cav.back(), out[0].n_cav.back(),
                       cfg.verify.dt_tolerance));
  const double w = cfg.analysis.window_fraction;
  ctx.check(make_check(
      "truncation:steady_n_cav", steady_state_value(base, Observable::cavity, w).value,
      steady_state_value(out[1], Observable::cavity, w).value, cfg.verify.truncation_tolerance));
}

json run_trajectory_kind(const Context& ctx, const ExperimentConfig& cfg) {
  const TrajectoryRun run = simulate(ctx, cfg, cfg.dims, cfg.integration, "");
  const Trajectory& tr = run.traj;
  ctx.write("trajectory.csv", trajectory_csv(tr));

  json j = setup_json(cfg, run.setup);
  j["trajectory"] = trajectory_summary(tr);
  j["excluded_near_degenerate"] = run.excluded;
  const double g = std::abs(run.setup.g_eff);

  if (cfg.experiment == ExperimentKind::fft) {
    const Spectrum sp = fourier_spectrum(series(tr, cfg.analysis.observable), tr.sample_interval());
    ctx.write("spectrum.csv", spectrum_csv(sp));
    const auto peaks = find_peaks(sp, cfg.analysis.peak_factor);
    json pj = json::array();
    for (std::size_t k = 0; k < peaks.size() && static_cast<int>(k) < cfg.analysis.max_peaks;
         ++k) {
      const double rate = transition_rate(peaks[k].freq);
      pj.push_back({{"bin", peaks[k].bin},
                    {"freq", peaks[k].freq},
                    {"transition_rate", rate},
                    {"rate_over_g_eff", g > 0 ? rate / g : 0.0},
                    {"magnitude", peaks[k].magnitude}});
    }
    j["spectrum"] = {{"observable", to_string(cfg.analysis.observable)},
                     {"samples", sp.samples},
                     {"bin_width", sp.bin_width()},
                     {"rate_bin_width", transition_rate(sp.bin_width())},
                     {"peaks", pj}};
  }
  if (cfg.experiment == ExperimentKind::steady || cfg.experiment == ExperimentKind::evolve) {
    const double w = cfg.analysis.window_fraction;
    const SteadyStateResult cav = steady_state_value(tr, Observable::cavity, w);
    j["steady"] = {{"n_cav", steady_json(cav)},
                   {"n_qubit", steady_json(steady_state_value(tr, Observable::qubit, w))},
                   {"n_mech", steady_json(steady_state_value(tr, Observable::mechanics, w))}};
    j["photon_flux_per_s"] = photon_flux_hz(cav.value, cfg.analysis.linewidth_hz);
    j["linewidth_hz"] = cfg.analysis.linewidth_hz;
  }
  if (ctx.options.verify) verify_trajectory(ctx, cfg, tr);
  return j;
}

json run_snr(const Context& ctx, const ExperimentConfig& cfg) {
  const ResolvedSetup rs = resolve(cfg);
  ExperimentConfig atom_cfg = cfg;
  atom_cfg.drive.mech_enabled = false;
  ExperimentConfig both_cfg = cfg;
  both_cfg.drive.mech_enabled = true;

  std::vector<Trajectory> runs(2);
  parallel_for(2, ctx.options.jobs, [&](std::size_t i) {
    runs[i] = simulate(ctx, i == 0 ? both_cfg : atom_cfg, cfg.dims, cfg.integration,
                       i == 0 ? "both" : "atom-only")
                  .traj;
  });
  ctx.write("trajectory_both.csv", trajectory_csv(runs[0]));
  ctx.write("trajectory_atom_only.csv", trajectory_csv(runs[1]));

  const double w = cfg.analysis.window_fraction;
  const SteadyStateResult both = steady_state_value(runs[0], Observable::cavity, w);
  const SteadyStateResult atom = steady_state_value(runs[1], Observable::cavity, w);
  json j = setup_json(cfg, rs);
  j["n_both"] = both.value;
  j["n_atom_only"] = atom.value;
  j["signal"] = both.value - atom.value;
  j["noise"] = atom.value;
  j["both"] = steady_json(both);
  j["atom_only"] = steady_json(atom);
  j["steady"] = both.steady && atom.steady;
  const bool floor = atom.value < kNoiseFloor;
  j["noise_floor"] = floor;
  j["eta"] = floor ? json(nullptr) : json((both.value - atom.value) / atom.value);
  j["raw_ratio"] = floor ? json(nullptr) : json(both.value / atom.value);
  j["photon_flux_both_per_s"] = photon_flux_hz(both.value, cfg.analysis.linewidth_hz);
  j["trajectory_both"] = trajectory_summary(runs[0]);
  j["trajectory_atom_only"] = trajectory_summary(runs[1]);

  if (ctx.options.verify) verify_trajectory(ctx, both_cfg, runs[0]);
  return j;
}

json run_single(const Context& ctx, const ExperimentConfig& cfg);

json run_sweep(const Context& ctx, const ExperimentConfig& cfg) {
  const SweepSpec& s = cfg.sweep;
  std::vector<json> points(s.values.size());
  std::vector<std::string> errors(s.values.size());
  // Each point is a full single experiment with its own subdirectory.
  // Points run concurrently; nested parallelism is disabled.
  RunOptions inner_opt = ctx.options;
  inner_opt.jobs = 1;
  parallel_for(s.values.size(), ctx.options.jobs, [&](std::size_t i) {
    ExperimentConfig sub = apply_sweep_value(cfg, s.axis, s.values[i]);
    sub.experiment = s.inner;
    char tag[32];
    std::snprintf(tag, sizeof tag, "point_%03zu", i);
    sub.name = cfg.name + "/" + tag;
    Context sub_ctx{inner_opt, ctx.dir / tag, ctx.prefix + tag + "/", ctx.outputs, ctx.checks,
                    ctx.mutex};
    if (ctx.options.write_files) fs::create_directories(sub_ctx.dir);
    try {
      points[i] = run_single(sub_ctx, sub);
    } catch (const Error& e) {
      errors[i] = e.what();
      points[i] = json::object();
    }
    points[i]["sweep_value"] = s.values[i];
    points[i]["directory"] = tag;
    if (!errors[i].empty()) points[i]["error"] = errors[i];
  });

  // Table of scalar fields, columns in order of first appearance.
  std::vector<std::string> columns{s.axis};
  auto collect = [&](const json& p, const std::string& prefix, auto& self) -> void {
    for (const auto& [k, v] : p.items()) {
      if (k == "sweep_value" || k == "params") continue;
      const std::string name = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object() && (k == "steady" || k == "both" || k == "atom_only" || k == "n_cav" ||
                            k == "n_qubit" || k == "n_mech" || k == "final"))
        self(v, name, self);
      else if ((v.is_number() || v.is_boolean() || v.is_null()) &&
               std::find(columns.begin(), columns.end(), name) == columns.end())
        columns.push_back(name);
    }
  };
  for (const auto& p : points) collect(p, "", collect);
  auto lookup = [](const json& p, const std::string& dotted) -> const json* {
    const json* cur = &p;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = dotted.find('.', start);
      const std::string key = dotted.substr(start, dot - start);
      if (!cur->is_object() || !cur->contains(key)) return nullptr;
      cur = &(*cur)[key];
      if (dot == std::string::npos) return cur;
      start = dot + 1;
    }
  };
  std::string csv;
  for (std::size_t c = 0; c < columns.size(); ++c) csv += (c ? "," : "") + columns[c];
  csv += '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv += num(s.values[i]);
    for (std::size_t c = 1; c < columns.size(); ++c) {
      csv += ',';
      const json* v = lookup(points[i], columns[c]);
      if (!v || v->is_null()) continue;
      if (v->is_boolean()) csv += v->get<bool>() ? "1" : "0";
      else csv += num(v->get<double>());
    }
    csv += '\n';
  }
  ctx.write("sweep.csv", csv);

  json j;
  j["axis"] = s.axis;
  j["values"] = s.values;
  j["inner"] = to_string(s.inner);
  j["points"] = points;
  std::string failed;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) failed += " [" + num(s.values[i]) + "] " + errors[i];
  j["failed"] = !failed.empty();
  if (!failed.empty()) j["errors"] = failed;
  return j;
}

json run_single(const Context& ctx, const ExperimentConfig& cfg) {
  json j;
  switch (cfg.experiment) {
    case ExperimentKind::perturb: j = run_perturb(ctx, cfg); break;
    case ExperimentKind::spectrum: j = run_spectrum(ctx, cfg); break;
    case ExperimentKind::crossing: j = run_crossing(ctx, cfg); break;
    case ExperimentKind::evolve:
    case ExperimentKind::fft:
    case ExperimentKind::steady: j = run_trajectory_kind(ctx, cfg); break;
    case ExperimentKind::snr: j = run_snr(ctx, cfg); break;
    case ExperimentKind::sweep: j = run_sweep(ctx, cfg); break;
  }
  j["schema"] = kSummarySchema;
  j["version"] = kVersion;
  j["name"] = cfg.name;
  j["experiment"] = to_string(cfg.experiment);
  ctx.write("summary.json", j.dump(2) + "\n");
  return j;
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  RunManifest man;
  man.config = to_json(cfg);
  std::mutex mutex;
  Context ctx{options, fs::path(options.output_dir), "", &man.outputs, &man.checks, &mutex};
  if (options.write_files) {
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create '" + options.output_dir + "': " + ec.message());
  }
  man.summary = run_single(ctx, cfg);
  std::sort(man.outputs.begin(), man.outputs.end());
  std::sort(man.checks.begin(), man.checks.end(),
            [](const ConvergenceCheck& a, const ConvergenceCheck& b) { return a.name < b.name; });
  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.write_files)
    write_file_atomic((ctx.dir / "manifest.json").string(), man.to_json().dump(2) + "\n");
  if (man.summary.value("failed", false))
    fail(ErrorCode::not_converged,
         "sweep points failed:" + man.summary.value("errors", std::string()));
  if (cfg.experiment == ExperimentKind::snr && !man.summary.value("steady", true))
    fail(ErrorCode::not_steady, "snr: trajectories not steady (outputs written)");
  return man;
}

}  // namespace mdce
