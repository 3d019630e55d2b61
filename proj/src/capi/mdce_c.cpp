#include "mdce/mdce.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <thread>

#include "mdce/error.hpp"
#include "mdce/experiment.hpp"

using nlohmann::json;

struct mdce_config {
  mdce::ExperimentConfig cfg;
};

struct mdce_result {
  mdce::RunManifest manifest;
};

struct mdce_spectrum {
  mdce::Spectrum spectrum;
};

struct mdce_trajectory {
  mdce::Trajectory traj;
};

namespace {

thread_local std::string last_error;

mdce_status to_status(mdce::ErrorCode code) { return static_cast<mdce_status>(code); }

template <class F>
mdce_status guard(F&& body) {
  try {
    last_error.clear();
    body();
    return MDCE_OK;
  } catch (const mdce::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    last_error = std::string("json: ") + e.what();
    return MDCE_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MDCE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MDCE_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return MDCE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw mdce::Error(mdce::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

// Null pointers get their own status so callers can tell them apart.
#define MDCE_REQUIRE(ptr)                                  \
  do {                                                     \
    if (!(ptr)) {                                          \
      last_error = std::string(#ptr) + " is NULL";         \
      return MDCE_ERR_NULL_ARGUMENT;                       \
    }                                                      \
  } while (0)

mdce::SystemParams from_c(const mdce_params& p) {
  mdce::SystemParams s;
  s.omega_c = p.omega_c;
  s.omega_m = p.omega_m;
  s.omega_a = p.omega_a;
  s.lambda = p.lambda;
  s.g = p.g;
  s.kappa = p.kappa;
  s.eta = p.eta;
  s.gamma = p.gamma;
  return s;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* mdce_version(void) { return mdce::kVersion; }

const char* mdce_status_name(mdce_status status) {
  switch (status) {
    case MDCE_OK: return "ok";
    case MDCE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MDCE_ERR_OUT_OF_RANGE: return "out_of_range";
    case MDCE_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case MDCE_ERR_SINGULAR: return "singular";
    case MDCE_ERR_DEGENERATE_INTERMEDIATE: return "degenerate_intermediate";
    case MDCE_ERR_TRUNCATION: return "truncation";
    case MDCE_ERR_NOT_CONVERGED: return "not_converged";
    case MDCE_ERR_SEARCH_FAILED: return "search_failed";
    case MDCE_ERR_INTEGRATION_QUALITY: return "integration_quality";
    case MDCE_ERR_NOT_STEADY: return "not_steady";
    case MDCE_ERR_IO: return "io";
    case MDCE_ERR_CONFIG: return "config";
    case MDCE_ERR_NULL_ARGUMENT: return "null_argument";
    case MDCE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mdce_last_error(void) { return last_error.c_str(); }

void mdce_string_free(char* s) { std::free(s); }

void mdce_params_default(mdce_params* out) {
  if (!out) return;
  const mdce::SystemParams d;
  *out = {d.omega_c, d.omega_m, d.omega_a, d.lambda, d.g, d.kappa, d.eta, d.gamma};
}

mdce_status mdce_basis_index(int qubit, int n, int m, int n_cav, int n_mech, int* out) {
  MDCE_REQUIRE(out);
  return guard([&] {
    if (qubit != 0 && qubit != 1)
      mdce::fail(mdce::ErrorCode::invalid_argument, "qubit must be 0 (g) or 1 (e)");
    const mdce::Dims dims{n_cav, n_mech};
    dims.validate();
    *out = mdce::basis_index({qubit ? mdce::Qubit::e : mdce::Qubit::g, n, m}, dims);
  });
}

mdce_status mdce_g_eff(const mdce_params* p, int n, int m, double* out) {
  MDCE_REQUIRE(p);
  MDCE_REQUIRE(out);
  return guard([&] { *out = mdce::g_eff_closed({n, m}, from_c(*p)); });
}

mdce_status mdce_g_eff_generic(const mdce_params* p, int n, int m, int n_cav, int n_mech,
                               double* out, int* paths) {
  MDCE_REQUIRE(p);
  MDCE_REQUIRE(out);
  return guard([&] {
    const mdce::TargetPair pair{n, m};
    pair.validate();
    const mdce::OperatorSet ops = mdce::build_operators({n_cav, n_mech});
    const auto r = mdce::second_order_element(pair.excited(), pair.photon(), from_c(*p), ops);
    *out = r.value;
    if (paths) *paths = static_cast<int>(r.paths.size());
  });
}

mdce_status mdce_energy_shifts(const mdce_params* p, int n, int m, mdce_shifts* out) {
  MDCE_REQUIRE(p);
  MDCE_REQUIRE(out);
  return guard([&] {
    const auto s = mdce::energy_shifts({n, m}, from_c(*p));
    *out = {s.eps1, s.eps2, s.delta, s.delta_closed};
  });
}

mdce_status mdce_resonant_omega_a(const mdce_params* p, int n, int m, double* out) {
  MDCE_REQUIRE(p);
  MDCE_REQUIRE(out);
  return guard([&] { *out = mdce::effective_resonant_omega_a({n, m}, from_c(*p)); });
}

mdce_status mdce_eigenvalues(const mdce_params* p, int n_cav, int n_mech, double* out,
                             size_t capacity, size_t* count) {
  MDCE_REQUIRE(p);
  return guard([&] {
    const mdce::SystemParams sp = from_c(*p);
    sp.validate();
    const mdce::OperatorSet ops = mdce::build_operators({n_cav, n_mech});
    const auto es = mdce::eigensystem(mdce::build_static_hamiltonian(sp, ops));
    const auto d = static_cast<size_t>(es.values.size());
    if (count) *count = d;
    if (capacity > 0) need(out, "out");
    for (size_t k = 0; k < d && k < capacity; ++k) out[k] = es.values(static_cast<int>(k));
  });
}

mdce_status mdce_find_crossing(const mdce_params* p, int n, int m, int n_cav, int n_mech,
                               double half_width, mdce_crossing* out) {
  MDCE_REQUIRE(p);
  MDCE_REQUIRE(out);
  return guard([&] {
    mdce::CrossingOptions opt;
    opt.half_width = half_width;
    const auto c = mdce::find_avoided_crossing(from_c(*p), {n_cav, n_mech}, {n, m}, opt);
    *out = {c.omega_a_star, c.gap, c.predicted_gap, c.offset, c.predicted_delta};
  });
}

mdce_status mdce_fourier_spectrum(const double* series, size_t len, double dt_sample,
                                  mdce_spectrum** out) {
  MDCE_REQUIRE(series);
  MDCE_REQUIRE(out);
  return guard([&] {
    auto s = std::make_unique<mdce_spectrum>();
    s->spectrum = mdce::fourier_spectrum({series, len}, dt_sample);
    *out = s.release();
  });
}

size_t mdce_spectrum_size(const mdce_spectrum* s) { return s ? s->spectrum.freqs.size() : 0; }

double mdce_spectrum_bin_width(const mdce_spectrum* s) {
  return s ? s->spectrum.bin_width() : 0.0;
}

mdce_status mdce_spectrum_data(const mdce_spectrum* s, const double** freqs,
                               const double** magnitude) {
  MDCE_REQUIRE(s);
  if (freqs) *freqs = s->spectrum.freqs.data();
  if (magnitude) *magnitude = s->spectrum.magnitude.data();
  return MDCE_OK;
}

mdce_status mdce_spectrum_peaks(const mdce_spectrum* s, double factor, double* freqs,
                                size_t capacity, size_t* count) {
  MDCE_REQUIRE(s);
  return guard([&] {
    const auto peaks = mdce::find_peaks(s->spectrum, factor);
    if (count) *count = peaks.size();
    if (capacity > 0) need(freqs, "freqs");
    for (size_t k = 0; k < peaks.size() && k < capacity; ++k) freqs[k] = peaks[k].freq;
  });
}

void mdce_spectrum_free(mdce_spectrum* s) { delete s; }

mdce_status mdce_steady_state(const double* times, const double* values, size_t len,
                              double window_fraction, mdce_steady* out) {
  MDCE_REQUIRE(out);
  if (len > 0) {
    MDCE_REQUIRE(times);
    MDCE_REQUIRE(values);
  }
  return guard([&] {
    const auto r = mdce::steady_state_value({times, len}, {values, len}, window_fraction);
    *out = {r.value, r.t_start, r.t_end, r.drift, r.steady ? 1 : 0};
  });
}

mdce_status mdce_photon_flux_hz(double n_ss, double linewidth_hz, double* out) {
  MDCE_REQUIRE(out);
  return guard([&] { *out = mdce::photon_flux_hz(n_ss, linewidth_hz); });
}

size_t mdce_preset_count(void) { return mdce::preset_names().size(); }

const char* mdce_preset_name(size_t index) {
  static const std::vector<std::string> names = mdce::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

mdce_status mdce_config_default(mdce_config** out) {
  MDCE_REQUIRE(out);
  return guard([&] { *out = new mdce_config{}; });
}

mdce_status mdce_config_preset(const char* name, mdce_config** out) {
  MDCE_REQUIRE(name);
  MDCE_REQUIRE(out);
  return guard([&] { *out = new mdce_config{mdce::preset(name)}; });
}

mdce_status mdce_config_load(const char* path, mdce_config** out) {
  MDCE_REQUIRE(path);
  MDCE_REQUIRE(out);
  return guard([&] { *out = new mdce_config{mdce::load_config(path)}; });
}

mdce_status mdce_config_from_json(const char* text, mdce_config** out) {
  MDCE_REQUIRE(text);
  MDCE_REQUIRE(out);
  return guard([&] {
    json j;
    try {
      j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
      mdce::fail(mdce::ErrorCode::config, std::string("config: ") + e.what());
    }
    *out = new mdce_config{mdce::config_from_json(j)};
  });
}

mdce_status mdce_config_to_json(const mdce_config* cfg, char** out) {
  MDCE_REQUIRE(cfg);
  MDCE_REQUIRE(out);
  return guard([&] { *out = dup(mdce::to_json(cfg->cfg).dump(2)); });
}

mdce_status mdce_config_set(mdce_config* cfg, const char* key, const char* value) {
  MDCE_REQUIRE(cfg);
  MDCE_REQUIRE(key);
  MDCE_REQUIRE(value);
  return guard([&] {
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = std::string(value);
    json j = mdce::to_json(cfg->cfg);
    std::string pointer = "/" + std::string(key);
    for (auto& c : pointer)
      if (c == '.') c = '/';
    const json::json_pointer ptr(pointer);
    const json::json_pointer parent = ptr.parent_pointer();
    if (!j.contains(parent) || !j.at(parent).is_object() || !j.at(parent).contains(ptr.back()))
      mdce::fail(mdce::ErrorCode::config, std::string(key) + ": unknown field");
    j[ptr] = v;
    cfg->cfg = mdce::config_from_json(j);
  });
}

mdce_status mdce_config_validate(const mdce_config* cfg) {
  MDCE_REQUIRE(cfg);
  return guard([&] { cfg->cfg.validate(); });
}

void mdce_config_free(mdce_config* cfg) { delete cfg; }

void mdce_run_options_default(mdce_run_options* out) {
  if (!out) return;
  *out = {nullptr, 0, 0, 1, nullptr, nullptr};
}

mdce_status mdce_run(const mdce_config* cfg, const mdce_run_options* options,
                     mdce_result** out) {
  MDCE_REQUIRE(cfg);
  MDCE_REQUIRE(out);
  *out = nullptr;
  mdce_run_options o;
  mdce_run_options_default(&o);
  if (options) o = *options;
  auto result = std::make_unique<mdce_result>();
  const mdce_status st = guard([&] {
    mdce::RunOptions ro;
    if (o.output_dir) ro.output_dir = o.output_dir;
    ro.verify = o.verify != 0;
    ro.jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    ro.write_files = o.write_files != 0;
    if (o.log) {
      const mdce_log_fn fn = o.log;
      void* user = o.user;
      ro.log = [fn, user](const std::string& msg) { fn(msg.c_str(), user); };
    }
    result->manifest = mdce::run(cfg->cfg, ro);
  });
  if (st == MDCE_OK) *out = result.release();
  return st;
}

mdce_status mdce_result_summary_json(const mdce_result* r, char** out) {
  MDCE_REQUIRE(r);
  MDCE_REQUIRE(out);
  return guard([&] { *out = dup(r->manifest.summary.dump(2)); });
}

mdce_status mdce_result_manifest_json(const mdce_result* r, char** out) {
  MDCE_REQUIRE(r);
  MDCE_REQUIRE(out);
  return guard([&] { *out = dup(r->manifest.to_json().dump(2)); });
}

int mdce_result_checks_passed(const mdce_result* r) {
  return r && r->manifest.checks_passed() ? 1 : 0;
}

void mdce_result_free(mdce_result* r) { delete r; }

mdce_status mdce_evolve(const mdce_config* cfg, mdce_trajectory** out) {
  MDCE_REQUIRE(cfg);
  MDCE_REQUIRE(out);
  return guard([&] {
    cfg->cfg.validate();
    auto t = std::make_unique<mdce_trajectory>();
    t->traj = mdce::simulate(cfg->cfg, cfg->cfg.dims, cfg->cfg.integration);
    *out = t.release();
  });
}

size_t mdce_trajectory_size(const mdce_trajectory* t) { return t ? t->traj.size() : 0; }

mdce_status mdce_trajectory_column(const mdce_trajectory* t, const char* name,
                                   const double** data, size_t* len) {
  MDCE_REQUIRE(t);
  MDCE_REQUIRE(name);
  MDCE_REQUIRE(data);
  return guard([&] {
    const std::string n = name;
    const std::vector<double>* col = nullptr;
    if (n == "t") col = &t->traj.times;
    else if (n == "n_qubit") col = &t->traj.n_qubit;
    else if (n == "n_cav") col = &t->traj.n_cav;
    else if (n == "n_mech") col = &t->traj.n_mech;
    else if (n == "trace_err") col = &t->traj.trace_err;
    else if (n == "energy") col = &t->traj.energy;
    else mdce::fail(mdce::ErrorCode::invalid_argument, "unknown trajectory column '" + n + "'");
    *data = col->data();
    if (len) *len = col->size();
  });
}

double mdce_trajectory_max_hermiticity_error(const mdce_trajectory* t) {
  return t ? t->traj.max_hermiticity_error : 0.0;
}

void mdce_trajectory_free(mdce_trajectory* t) { delete t; }

}  // extern "C"
