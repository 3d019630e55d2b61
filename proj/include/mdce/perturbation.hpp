#pragma once

#include <vector>

#include "mdce/fockspace.hpp"
#include "mdce/model.hpp"

namespace mdce {

/// Three-wave-mixing partners |e, n, m+1> and |g, n+1, m>.
struct TargetPair {
  int n = 0;
  int m = 0;

  BasisLabel excited() const { return {Qubit::e, n, m + 1}; }
  BasisLabel photon() const { return {Qubit::g, n + 1, m}; }

  void validate() const;
  /// Smallest truncation holding every state V reaches from either partner.
  Dims minimal_dims() const;

  friend bool operator==(const TargetPair&, const TargetPair&) = default;
};

struct PathContribution {
  BasisLabel intermediate;
  double contribution = 0.0;
};

struct SecondOrderResult {
  double value = 0.0;   // direct element plus all two-step paths
  double direct = 0.0;  // V_fi
  std::vector<PathContribution> paths;  // only paths with non-zero weight
};

/// Denominators |w_i - w_k| below this raise ErrorCode::degenerate_intermediate.
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Second-order element between bare eigenstates `i` and `f` of H0 by brute
/// force over the whole truncated basis:
///   Omega = V_fi + sum_{k != i,f} V_fk V_ki / (w_i - w_k).
/// With i == f this is the level shift of i. The truncation must contain
/// every state V can reach from i and f (dn <= 2, dm <= 1).
SecondOrderResult second_order_element(const BasisLabel& i, const BasisLabel& f,
                                       const SystemParams& params,
                                       const OperatorSet& ops);

/// g_eff = -g lambda sqrt(n+1) sqrt(m+1) (1/(2w_c - w_m) + 1/w_m)
double g_eff_closed(const TargetPair& pair, const SystemParams& params);

struct EnergyShifts {
  double eps1 = 0.0;          // shift of |g, n+1, m>
  double eps2 = 0.0;          // shift of |e, n, m+1>
  double delta = 0.0;         // eps2 - eps1
  double delta_closed = 0.0;  // standalone four-term closed form
};

/// Closed-form second-order shifts, transcribed term by term as published.
EnergyShifts energy_shifts(const TargetPair& pair, const SystemParams& params);

/// Shifted three-wave resonance w_a = w_c - w_m - delta(w_a), solved by
/// fixed-point iteration from w_a = w_c - w_m.
double effective_resonant_omega_a(const TargetPair& pair,
                                  const SystemParams& params,
                                  int max_iterations = 200,
                                  double tolerance = 1e-14);

struct PerturbationReport {
  TargetPair pair;
  SystemParams params;
  Dims dims;
  double g_eff_closed = 0.0;
  /// Enumeration at the bare resonance w_a = w_c - w_m, where the closed
  /// form is exact.
  double g_eff_generic = 0.0;
  /// Enumeration at params.omega_a.
  double g_eff_generic_at_omega_a = 0.0;
  double eps1 = 0.0, eps2 = 0.0, delta = 0.0, delta_closed = 0.0;
  double eps1_generic = 0.0, eps2_generic = 0.0;
  double resonant_omega_a = 0.0;
  std::vector<PathContribution> paths;  // coupling paths at the bare resonance
  std::vector<std::string> notes;
};

PerturbationReport perturbation_report(const TargetPair& pair,
                                       const SystemParams& params);
PerturbationReport perturbation_report(const TargetPair& pair,
                                       const SystemParams& params,
                                       const Dims& dims);

}  // namespace mdce
