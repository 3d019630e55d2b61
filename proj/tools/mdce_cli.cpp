// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdce/mdce.h"

namespace {

constexpr int kExitVerifyFailed = 20;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  bool print_config = false;
  bool quiet = false;
};

struct Global {
  std::string out_dir = "out";
  bool verify = false;
  int jobs = 0;
};

int report(mdce_status st, const char* what) {
  std::fprintf(stderr, "mdce: %s failed [%s]: %s\n", what, mdce_status_name(st), mdce_last_error());
  return static_cast<int>(st);
}

void log_to_stderr(const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); }

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("-s,--set", c.sets, "Override a field, e.g. params.omega_m=0.1")
      ->take_all();
  sub->add_flag("--print-config", c.print_config, "Print the resolved config and exit");
  sub->add_flag("-q,--quiet", c.quiet, "No progress output");
}

// Builds the config for a subcommand, runs it and prints the summary.
int execute(mdce_config* cfg, const Common& c, const Global& g) {
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "mdce: --set expects key=value, got '%s'\n", s.c_str());
      mdce_config_free(cfg);
      return static_cast<int>(MDCE_ERR_CONFIG);
    }
    const std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    if (mdce_status st = mdce_config_set(cfg, key.c_str(), value.c_str()); st != MDCE_OK) {
      mdce_config_free(cfg);
      return report(st, ("--set " + key).c_str());
    }
  }
  if (mdce_status st = mdce_config_validate(cfg); st != MDCE_OK) {
    mdce_config_free(cfg);
    return report(st, "config validation");
  }
  if (c.print_config) {
    char* text = nullptr;
    mdce_status st = mdce_config_to_json(cfg, &text);
    mdce_config_free(cfg);
    if (st != MDCE_OK) return report(st, "config export");
    std::printf("%s\n", text);
    mdce_string_free(text);
    return 0;
  }

  mdce_run_options opt;
  mdce_run_options_default(&opt);
  opt.output_dir = g.out_dir.c_str();
  opt.verify = g.verify ? 1 : 0;
  opt.jobs = g.jobs;
  opt.log = c.quiet ? nullptr : log_to_stderr;

  mdce_result* result = nullptr;
  const mdce_status st = mdce_run(cfg, &opt, &result);
  mdce_config_free(cfg);
  if (st != MDCE_OK) return report(st, "run");

  char* summary = nullptr;
  if (mdce_status s2 = mdce_result_summary_json(result, &summary); s2 != MDCE_OK) {
    mdce_result_free(result);
    return report(s2, "summary");
  }
  std::printf("%s\n", summary);
  mdce_string_free(summary);

  int code = 0;
  if (g.verify) {
    char* manifest = nullptr;
    if (mdce_result_manifest_json(result, &manifest) == MDCE_OK) {
      std::fprintf(stderr, "verification checks written to %s/manifest.json\n", g.out_dir.c_str());
      mdce_string_free(manifest);
    }
    if (!mdce_result_checks_passed(result)) {
      std::fprintf(stderr, "mdce: convergence checks failed\n");
      code = kExitVerifyFailed;
    }
  }
  mdce_result_free(result);
  return code;
}

mdce_config* base_config(const Common& c, int* error) {
  mdce_config* cfg = nullptr;
  const mdce_status st = c.config_path.empty() ? mdce_config_default(&cfg)
                                               : mdce_config_load(c.config_path.c_str(), &cfg);
  if (st != MDCE_OK) {
    *error = report(st, "config load");
    return nullptr;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mechanically induced dynamical Casimir effect toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mdce_version()));

  Global g;
  app.add_option("-o,--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--verify", g.verify, "Run dt-halving and truncation convergence checks");
  app.add_option("-j,--jobs", g.jobs, "Parallel tasks (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  struct Kind {
    const char* name;
    const char* help;
  };
  const std::vector<Kind> kinds{
      {"perturb", "Second-order coupling, shifts and resonance report"},
      {"spectrum", "Energy levels versus omega_a with tracked pairs"},
      {"crossing", "Avoided-crossing gap and location"},
      {"evolve", "Lindblad trajectory"},
      {"fft", "Trajectory plus Fourier spectrum of one observable"},
      {"steady", "Trajectory plus steady-state values and photon flux"},
      {"snr", "Both-drives versus atom-only steady photons"},
      {"sweep", "One experiment over a list of parameter values"},
  };

  std::vector<Common> commons(kinds.size() + 1);
  std::vector<CLI::App*> subs;
  std::string sweep_axis, sweep_inner;
  std::vector<double> sweep_values;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i].name, kinds[i].help);
    add_common(sub, commons[i]);
    subs.push_back(sub);
  }
  CLI::App* sweep = subs.back();
  sweep->add_option("--axis", sweep_axis, "omega_m, omega_a, lambda, g, loss, amplitude, sigma_inverse_geff");
  sweep->add_option("--values", sweep_values, "Comma-separated values")->delimiter(',');
  sweep->add_option("--inner", sweep_inner, "Experiment run at each point");

  CLI::App* preset = app.add_subcommand("preset", "Run a figure recipe");
  std::string preset_name;
  std::string known;
  for (size_t i = 0; i < mdce_preset_count(); ++i)
    known += std::string(i ? ", " : "") + mdce_preset_name(i);
  preset->add_option("name", preset_name, "One of: " + known)->required();
  Common& preset_common = commons.back();
  add_common(preset, preset_common);
  preset->get_option("--config")->description("Ignored for presets")->group("");

  CLI::App* list = app.add_subcommand("presets", "List preset names");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (size_t i = 0; i < mdce_preset_count(); ++i) std::printf("%s\n", mdce_preset_name(i));
    return 0;
  }

  if (preset->parsed()) {
    mdce_config* cfg = nullptr;
    if (mdce_status st = mdce_config_preset(preset_name.c_str(), &cfg); st != MDCE_OK)
      return report(st, "preset");
    return execute(cfg, preset_common, g);
  }

  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    int error = 0;
    mdce_config* cfg = base_config(commons[i], &error);
    if (!cfg) return error;
    const std::string kind = std::string("\"") + kinds[i].name + "\"";
    mdce_status st = mdce_config_set(cfg, "experiment", kind.c_str());
    if (st == MDCE_OK && !sweep_axis.empty() && subs[i] == sweep)
      st = mdce_config_set(cfg, "sweep.axis", ("\"" + sweep_axis + "\"").c_str());
    if (st == MDCE_OK && !sweep_values.empty() && subs[i] == sweep) {
      std::string arr = "[";
      for (std::size_t k = 0; k < sweep_values.size(); ++k) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", sweep_values[k]);
        arr += (k ? "," : "") + std::string(buf);
      }
      st = mdce_config_set(cfg, "sweep.values", (arr + "]").c_str());
    }
    if (st == MDCE_OK && !sweep_inner.empty() && subs[i] == sweep)
      st = mdce_config_set(cfg, "sweep.inner", ("\"" + sweep_inner + "\"").c_str());
    if (st != MDCE_OK) {
      mdce_config_free(cfg);
      return report(st, "subcommand setup");
    }
    return execute(cfg, commons[i], g);
  }
  return 0;
}
