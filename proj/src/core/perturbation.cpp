#include "mdce/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "mdce/error.hpp"

namespace mdce {

void TargetPair::validate() const {
  if (n < 0 || m < 0)
    fail(ErrorCode::invalid_argument, "target pair (n, m) must be non-negative");
}

Dims TargetPair::minimal_dims() const {
  validate();
  return Dims{std::max(2, n + 4), std::max(2, m + 3)};
}

namespace {

void require_reach(const BasisLabel& s, const Dims& dims) {
  if (!in_bounds(s, dims) || s.n + 2 >= dims.n_cav || s.m + 1 >= dims.n_mech) {
    fail(ErrorCode::truncation,
         "truncation (" + std::to_string(dims.n_cav) + "," +
             std::to_string(dims.n_mech) + ") cannot hold all intermediates of |" +
             to_string(s) + ">");
  }
}

void require_nonzero(double value, const char* what) {
  if (std::abs(value) < kDegeneracyTolerance)
    fail(ErrorCode::singular, std::string("singular denominator: ") + what);
}

}  // namespace

SecondOrderResult second_order_element(const BasisLabel& i, const BasisLabel& f,
                                       const SystemParams& params,
                                       const OperatorSet& ops) {
  params.validate();
  const Dims& dims = ops.dims;
  require_reach(i, dims);
  require_reach(f, dims);

  const Matrix v = build_interaction(params, ops);
  const int ii = basis_index(i, dims);
  const int ff = basis_index(f, dims);
  const double w_i = bare_energy(i, params.omega_a, params.omega_c, params.omega_m);

  SecondOrderResult out;
  out.direct = v(ff, ii);
  out.value = out.direct;
  for (int k = 0; k < dims.total(); ++k) {
    if (k == ii || k == ff) continue;
    const double numerator = v(ff, k) * v(k, ii);
    if (numerator == 0.0) continue;
    const BasisLabel mid = basis_label(k, dims);
    const double denom =
        w_i - bare_energy(mid, params.omega_a, params.omega_c, params.omega_m);
    if (std::abs(denom) < kDegeneracyTolerance)
      fail(ErrorCode::degenerate_intermediate,
           "intermediate |" + to_string(mid) + "> degenerate with |" +
               to_string(i) + ">");
    const double c = numerator / denom;
    out.paths.push_back({mid, c});
    out.value += c;
  }
  return out;
}

double g_eff_closed(const TargetPair& pair, const SystemParams& params) {
  pair.validate();
  const double wc = params.omega_c, wm = params.omega_m;
  require_nonzero(wm, "omega_m");
  require_nonzero(2 * wc - wm, "2 omega_c - omega_m");
  return -params.g * params.lambda * std::sqrt(pair.n + 1.0) *
         std::sqrt(pair.m + 1.0) * (1.0 / (2 * wc - wm) + 1.0 / wm);
}

EnergyShifts energy_shifts(const TargetPair& pair, const SystemParams& params) {
  pair.validate();
  const double wc = params.omega_c, wm = params.omega_m, wa = params.omega_a;
  const double g2 = params.g * params.g, l2 = params.lambda * params.lambda;
  const double n = pair.n, m = pair.m;

  require_nonzero(wm, "omega_m");
  require_nonzero(2 * wc + wm, "2 omega_c + omega_m");
  require_nonzero(2 * wc - wm, "2 omega_c - omega_m");
  require_nonzero(wa + wc, "omega_a + omega_c");
  require_nonzero(wa - wc, "omega_a - omega_c (qubit resonant with cavity)");

  const double sum = 2 * wc + wm, diff = 2 * wc - wm;

  EnergyShifts s;
  s.eps1 = -0.25 * g2 *
               ((n * n + 4 * n * m + 5 * n + 6 * m + 6) / sum +
                (-n * n + 4 * n * m + 6 * m - n) / diff) -
           (n + 2) * l2 / (wc + wa) - (n + 1) * l2 / (wa - wc) -
           (n + 1) * (n + 1) * g2 / wm;
  s.eps2 = -0.25 * g2 *
               ((2 * n * n + 4 * n * m + 6 * n + 2 * m + 4) / sum +
                (-n * n + 4 * n * m + 2 * m + 5 * n + 2) / diff) +
           n * l2 / (wc + wa) - (n + 1) * l2 / (wc - wa) - n * n * g2 / wm;
  s.delta = s.eps2 - s.eps1;
  s.delta_closed = 0.25 * g2 *
                       ((-n * n - n + 4 * m + 2) / sum + (-6 * n + 4 * m - 2) / diff) +
                   2 * (n + 1) * l2 / (wa - wc) + (2 * n + 1) * g2 / wm +
                   2 * (n + 1) * l2 / (wa + wc);
  return s;
}

double effective_resonant_omega_a(const TargetPair& pair,
                                  const SystemParams& params, int max_iterations,
                                  double tolerance) {
  SystemParams p = params;
  const double bare = params.omega_c - params.omega_m;
  p.omega_a = bare;
  for (int it = 0; it < max_iterations; ++it) {
    const double next = bare - energy_shifts(pair, p).delta_closed;
    if (!std::isfinite(next) || next <= 0)
      fail(ErrorCode::not_converged, "resonant omega_a iteration left the domain");
    const double step = std::abs(next - p.omega_a);
    p.omega_a = next;
    if (step <= tolerance * std::max(1.0, std::abs(next))) return next;
  }
  fail(ErrorCode::not_converged,
       "resonant omega_a fixed point did not converge in " +
           std::to_string(max_iterations) + " iterations");
}

PerturbationReport perturbation_report(const TargetPair& pair,
                                       const SystemParams& params) {
  return perturbation_report(pair, params, pair.minimal_dims());
}

PerturbationReport perturbation_report(const TargetPair& pair,
                                       const SystemParams& params,
                                       const Dims& dims) {
  params.validate();
  PerturbationReport r;
  r.pair = pair;
  r.params = params;
  r.dims = dims;
  const OperatorSet ops = build_operators(dims);

  r.g_eff_closed = g_eff_closed(pair, params);

  SystemParams at_resonance = params;
  at_resonance.omega_a = params.omega_c - params.omega_m;
  const SecondOrderResult coupling =
      second_order_element(pair.excited(), pair.photon(), at_resonance, ops);
  r.g_eff_generic = coupling.value;
  r.paths = coupling.paths;
  r.g_eff_generic_at_omega_a =
      second_order_element(pair.excited(), pair.photon(), params, ops).value;

  const EnergyShifts s = energy_shifts(pair, params);
  r.eps1 = s.eps1;
  r.eps2 = s.eps2;
  r.delta = s.delta;
  r.delta_closed = s.delta_closed;
  r.eps1_generic = second_order_element(pair.photon(), pair.photon(), params, ops).value;
  r.eps2_generic =
      second_order_element(pair.excited(), pair.excited(), params, ops).value;
  r.resonant_omega_a = effective_resonant_omega_a(pair, params);

  auto rel = [](double x, double ref) {
    return std::abs(x - ref) / std::max(std::abs(ref), 1e-300);
  };
  if (rel(r.g_eff_generic, r.g_eff_closed) > 1e-10)
    r.notes.push_back("g_eff closed form disagrees with enumeration");
  if (rel(r.eps1, r.eps1_generic) > 1e-10)
    r.notes.push_back("eps1 closed form disagrees with enumeration");
  if (rel(r.eps2, r.eps2_generic) > 1e-10)
    r.notes.push_back("eps2 closed form disagrees with enumeration");
  if (rel(r.delta, r.delta_closed) > 1e-12)
    r.notes.push_back("delta closed form disagrees with eps2 - eps1");
  for (const auto& w : params.warnings()) r.notes.push_back(w);
  return r;
}

}  // namespace mdce
