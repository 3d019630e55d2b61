#pragma once

#include <functional>
#include <vector>

#include "mdce/fockspace.hpp"
#include "mdce/model.hpp"
#include "mdce/perturbation.hpp"
#include "mdce/spectrum.hpp"

namespace mdce {

/// Transitions with E_n - E_m at or below this are dropped from the dressed
/// jump operators.
inline constexpr double kDressingTolerance = 1e-9;

/// Zero-temperature jump operators in the eigenbasis of the static H:
///   O = sum_{E_n > E_m} <Psi_m|(o + o^dag)|Psi_n> |Psi_m><Psi_n|
/// for o in {sigma_-, a, b}. With eigenvalues in ascending order the
/// eigenbasis matrices are strictly upper triangular (column n feeds row m < n).
struct DissipatorSet {
  Eigensystem basis;
  Matrix o_sigma_eig, o_a_eig, o_b_eig;
  Matrix o_sigma, o_a, o_b;  // same operators in the bare |j n m> basis
  double kappa = 0.0, eta = 0.0, gamma = 0.0;
  /// Pairs (m, n) with coupling above 1e-12 but |E_n - E_m| within tolerance.
  int excluded_near_degenerate = 0;
};

DissipatorSet dressed_jump_operators(const Matrix& h, const OperatorSet& ops,
                                     const SystemParams& rates);

/// Convenience: bare |j n m><j n m|.
ComplexMatrix bare_state_density(const BasisLabel& label, const Dims& dims);
/// Projector on the lowest eigenvector of the static H, in the bare basis.
ComplexMatrix dressed_ground_density(const Eigensystem& basis);

struct IntegrationConfig {
  double dt = 0.02;
  double t_end = 1000.0;
  int store_every = 50;
  /// Smallest density-matrix eigenvalue is sampled every this many stores.
  int min_eig_every = 100;
  double trace_tolerance = 1e-4;
  double positivity_tolerance = 1e-4;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> n_qubit, n_cav, n_mech;
  std::vector<double> trace_err;
  std::vector<double> energy;  // tr(rho H_static)
  std::vector<double> min_eig_times, min_eig;
  double max_hermiticity_error = 0.0;
  ComplexMatrix final_state;  // bare basis

  std::size_t size() const { return times.size(); }
  double sample_interval() const;
};

using ProgressFn = std::function<void(double t, double t_end)>;

/// Lindblad propagator for
///   drho/dt = i[rho, H + H_d(t)] + kappa L[O_sigma] + eta L[O_a] + gamma L[O_b]
/// with L[O]rho = O rho O^dag - {O^dag O, rho}/2.
///
/// The state is carried in the eigenbasis of the static H as a real pair
/// [Re rho | Im rho], where the static part of the commutator is diagonal.
/// Exposed so tests can probe the right-hand side directly.
class LindbladPropagator {
 public:
  LindbladPropagator(const OperatorSet& ops, const DissipatorSet& diss,
                     const DriveConfig& drive);

  int dimension() const { return dim_; }

  /// Bare-basis density matrix <-> packed eigenbasis state.
  Matrix pack(const ComplexMatrix& rho_bare) const;
  ComplexMatrix unpack(const Matrix& state) const;

  void rhs(double t, const Matrix& state, Matrix& out) const;
  void rk4_step(double t, double dt, Matrix& state) const;

  Trajectory evolve(const ComplexMatrix& rho0, const IntegrationConfig& cfg,
                    const ProgressFn& progress = {}) const;

 private:
  int dim_;
  DriveConfig drive_;
  Vector energies_;
  Matrix omega_;       // E_i - E_j
  Matrix x_mech_, x_atom_;
  Matrix num_qubit_, num_cav_, num_mech_;
  Matrix eigvecs_;
  int n_jumps_ = 0;
  mutable Matrix left_;    // [X(t); M; O_1; ...; O_k]
  Matrix jump_row_;        // [r_1 O_1 | ... | r_k O_k]
  mutable Matrix product_, jump_rhs_, jump_out_, sym_a_, sym_b_;
  mutable Matrix k1_, k2_, k3_, k4_, tmp_;
};

/// Checks rho is Hermitian, unit-trace and positive semidefinite within 1e-8.
void validate_density(const ComplexMatrix& rho);

Trajectory evolve(const ComplexMatrix& rho0, const IntegrationConfig& cfg,
                  const OperatorSet& ops, const DriveConfig& drive,
                  const DissipatorSet& diss, const ProgressFn& progress = {});

/// Analytic resonant Rabi exchange between |e,n,m+1> (occupied at t = 0)
/// and |g,n+1,m> under H_eff = g_eff (|e..><g..| + h.c.): the survival
/// probability is cos^2(|g_eff| t).
Trajectory closed_evolve_effective(const TargetPair& pair,
                                   const SystemParams& params, double t_end,
                                   double sample_interval);

}  // namespace mdce
