#include "mdce/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "mdce/error.hpp"

namespace mdce {

namespace {

Matrix filter_lowering(const Matrix& x_eig, const Vector& energies, int& excluded) {
  const Eigen::Index d = x_eig.rows();
  Matrix o = Matrix::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      if (m == n) continue;
      const double gap = energies(n) - energies(m);
      if (gap > kDressingTolerance) {
        o(m, n) = x_eig(m, n);
      } else if (m < n && std::abs(gap) <= kDressingTolerance &&
                 std::abs(x_eig(m, n)) > 1e-12) {
        ++excluded;
      }
    }
  }
  return o;
}

}  // namespace

DissipatorSet dressed_jump_operators(const Matrix& h, const OperatorSet& ops,
                                     const SystemParams& rates) {
  if (h.rows() != ops.dimension())
    fail(ErrorCode::dimension_mismatch, "dressed_jump_operators: H/ops mismatch");
  DissipatorSet d;
  d.basis = eigensystem(h);
  d.kappa = rates.kappa;
  d.eta = rates.eta;
  d.gamma = rates.gamma;

  const Matrix& v = d.basis.vectors;
  auto dress = [&](const Matrix& o, Matrix& eig, Matrix& bare) {
    const Matrix x_eig = v.transpose() * (o + o.transpose()) * v;
    eig = filter_lowering(x_eig, d.basis.values, d.excluded_near_degenerate);
    bare = v * eig * v.transpose();
  };
  dress(ops.sigma_minus, d.o_sigma_eig, d.o_sigma);
  dress(ops.a, d.o_a_eig, d.o_a);
  dress(ops.b, d.o_b_eig, d.o_b);
  return d;
}

ComplexMatrix bare_state_density(const BasisLabel& label, const Dims& dims) {
  const int d = dims.total();
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  const int k = basis_index(label, dims);
  rho(k, k) = 1.0;
  return rho;
}

ComplexMatrix dressed_ground_density(const Eigensystem& basis) {
  const Vector psi = basis.vectors.col(0);
  return (psi * psi.transpose()).cast<std::complex<double>>();
}

void IntegrationConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt))
    fail(ErrorCode::invalid_argument, "integration.dt: must be > 0");
  if (!(t_end >= 0) || !std::isfinite(t_end))
    fail(ErrorCode::invalid_argument, "integration.t_end: must be >= 0");
  if (store_every < 1)
    fail(ErrorCode::invalid_argument, "integration.store_every: must be >= 1");
  if (min_eig_every < 1)
    fail(ErrorCode::invalid_argument, "integration.min_eig_every: must be >= 1");
}

double Trajectory::sample_interval() const {
  if (times.size() < 2) return 0.0;
  return times[1] - times[0];
}

void validate_density(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols())
    fail(ErrorCode::dimension_mismatch, "density matrix is not square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-8)
    fail(ErrorCode::invalid_argument, "initial density matrix is not Hermitian");
  if (std::abs(rho.trace() - std::complex<double>(1.0)) > 1e-8)
    fail(ErrorCode::invalid_argument, "initial density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    fail(ErrorCode::invalid_argument, "initial density matrix is not positive");
}

LindbladPropagator::LindbladPropagator(const OperatorSet& ops,
                                       const DissipatorSet& diss,
                                       const DriveConfig& drive)
    : dim_(ops.dimension()), drive_(drive) {
  drive_.validate();
  if (diss.basis.values.size() != dim_)
    fail(ErrorCode::dimension_mismatch, "propagator: dissipators/ops mismatch");
  const Matrix& v = diss.basis.vectors;
  eigvecs_ = v;
  energies_ = diss.basis.values;
  omega_ = energies_.replicate(1, dim_) - energies_.transpose().replicate(dim_, 1);
  auto to_eig = [&](const Matrix& o) -> Matrix { return v.transpose() * o * v; };
  x_mech_ = to_eig(mech_drive_operator(ops));
  x_atom_ = to_eig(atom_drive_operator(ops));
  num_qubit_ = to_eig(ops.num_qubit);
  num_cav_ = to_eig(ops.num_cav);
  num_mech_ = to_eig(ops.num_mech);

  std::vector<std::pair<double, const Matrix*>> jumps;
  if (diss.kappa > 0) jumps.emplace_back(diss.kappa, &diss.o_sigma_eig);
  if (diss.eta > 0) jumps.emplace_back(diss.eta, &diss.o_a_eig);
  if (diss.gamma > 0) jumps.emplace_back(diss.gamma, &diss.o_b_eig);
  n_jumps_ = static_cast<int>(jumps.size());

  const int d = dim_;
  left_ = Matrix::Zero((2 + n_jumps_) * d, d);
  jump_row_ = Matrix::Zero(d, std::max(1, n_jumps_) * d);
  Matrix decay = Matrix::Zero(d, d);
  for (int k = 0; k < n_jumps_; ++k) {
    const Matrix& o = *jumps[k].second;
    decay.noalias() += jumps[k].first * o.transpose() * o;
    left_.block((2 + k) * d, 0, d, d) = o;
    jump_row_.block(0, k * d, d, d) = jumps[k].first * o;
  }
  left_.block(d, 0, d, d) = decay;

  product_.resize((2 + n_jumps_) * d, 2 * d);
  jump_rhs_.resize(std::max(1, n_jumps_) * d, 2 * d);
  jump_out_.resize(d, 2 * d);
  for (Matrix* m : {&k1_, &k2_, &k3_, &k4_, &tmp_}) m->resize(d, 2 * d);
  sym_a_.resize(d, d);
  sym_b_.resize(d, d);
}

Matrix LindbladPropagator::pack(const ComplexMatrix& rho_bare) const {
  const ComplexMatrix rho = eigvecs_.transpose().cast<std::complex<double>>() *
                            rho_bare * eigvecs_.cast<std::complex<double>>();
  Matrix state(dim_, 2 * dim_);
  state.leftCols(dim_) = rho.real();
  state.rightCols(dim_) = rho.imag();
  return state;
}

ComplexMatrix LindbladPropagator::unpack(const Matrix& state) const {
  ComplexMatrix rho(dim_, dim_);
  rho.real() = state.leftCols(dim_);
  rho.imag() = state.rightCols(dim_);
  return eigvecs_.cast<std::complex<double>>() * rho *
         eigvecs_.transpose().cast<std::complex<double>>();
}

void LindbladPropagator::rhs(double t, const Matrix& state, Matrix& out) const {
  const int d = dim_;
  const DriveAmplitudes f = drive_amplitudes(t, drive_);
  left_.topRows(d) = f.mech * x_mech_ + f.atom * x_atom_;

  // One stacked product gives X R, X I, M R, M I and O_k R, O_k I.
  product_.noalias() = left_ * state;

  const auto re = state.leftCols(d);
  const auto im = state.rightCols(d);
  const auto xr = product_.block(0, 0, d, d);
  const auto xi = product_.block(0, d, d, d);
  const auto mr = product_.block(d, 0, d, d);
  const auto mi = product_.block(d, d, d, d);

  // R-part is A + A^T with A = X I - M R / 2; I-part is B - B^T with
  // B = -X R - M I / 2.
  sym_a_ = xi - 0.5 * mr;
  sym_b_ = -xr - 0.5 * mi;
  out.leftCols(d) = omega_.cwiseProduct(im) + sym_a_ + sym_a_.transpose();
  out.rightCols(d) = sym_b_ - sym_b_.transpose() - omega_.cwiseProduct(re);

  if (n_jumps_ > 0) {
    // O R O^T = O (O R)^T and O I O^T = -O (O I)^T for symmetric R and
    // antisymmetric I; all jump channels go through one product.
    for (int k = 0; k < n_jumps_; ++k) {
      jump_rhs_.block(k * d, 0, d, d) = product_.block((2 + k) * d, 0, d, d).transpose();
      jump_rhs_.block(k * d, d, d, d) = -product_.block((2 + k) * d, d, d, d).transpose();
    }
    jump_out_.noalias() = jump_row_ * jump_rhs_;
    out += jump_out_;
  }
}

void LindbladPropagator::rk4_step(double t, double dt, Matrix& state) const {
  rhs(t, state, k1_);
  tmp_ = state + (0.5 * dt) * k1_;
  rhs(t + 0.5 * dt, tmp_, k2_);
  tmp_ = state + (0.5 * dt) * k2_;
  rhs(t + 0.5 * dt, tmp_, k3_);
  tmp_ = state + dt * k3_;
  rhs(t + dt, tmp_, k4_);
  state += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);

  const int d = dim_;
  auto re = state.leftCols(d);
  auto im = state.rightCols(d);
  tmp_.leftCols(d) = 0.5 * (re + re.transpose());
  tmp_.rightCols(d) = 0.5 * (im - im.transpose());
  state = tmp_;
}

Trajectory LindbladPropagator::evolve(const ComplexMatrix& rho0,
                                      const IntegrationConfig& cfg,
                                      const ProgressFn& progress) const {
  cfg.validate();
  if (rho0.rows() != dim_)
    fail(ErrorCode::dimension_mismatch, "evolve: rho0 dimension mismatch");
  validate_density(rho0);

  const int d = dim_;
  Matrix state = pack(rho0);
  // Exact symmetry of the packed state makes the Hermiticity error zero.
  {
    Matrix sym(d, 2 * d);
    sym.leftCols(d) = 0.5 * (state.leftCols(d) + state.leftCols(d).transpose());
    sym.rightCols(d) = 0.5 * (state.rightCols(d) - state.rightCols(d).transpose());
    state = sym;
  }

  Trajectory traj;
  const long steps = std::lround(cfg.t_end / cfg.dt);
  const long stores = steps / cfg.store_every + 1;
  traj.times.reserve(stores);
  for (auto* v : {&traj.n_qubit, &traj.n_cav, &traj.n_mech, &traj.trace_err, &traj.energy})
    v->reserve(stores);

  long stored = 0;
  auto sample_min_eig = [&](double t) {
    ComplexMatrix rho(d, d);
    rho.real() = state.leftCols(d);
    rho.imag() = state.rightCols(d);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    traj.min_eig_times.push_back(t);
    traj.min_eig.push_back(lo);
    if (lo < -cfg.positivity_tolerance)
      fail(ErrorCode::integration_quality,
           "density matrix eigenvalue " + std::to_string(lo) + " at t=" +
               std::to_string(t) + "; reduce dt");
  };
  auto record = [&](double t) {
    const auto re = state.leftCols(d);
    const double tr = re.trace();
    traj.times.push_back(t);
    traj.n_qubit.push_back(re.cwiseProduct(num_qubit_).sum());
    traj.n_cav.push_back(re.cwiseProduct(num_cav_).sum());
    traj.n_mech.push_back(re.cwiseProduct(num_mech_).sum());
    traj.trace_err.push_back(std::abs(tr - 1.0));
    traj.energy.push_back(re.diagonal().dot(energies_));
    const double herm = std::max(
        (re - re.transpose()).cwiseAbs().maxCoeff(),
        (state.rightCols(d) + state.rightCols(d).transpose()).cwiseAbs().maxCoeff());
    traj.max_hermiticity_error = std::max(traj.max_hermiticity_error, herm);
    if (!std::isfinite(tr) || std::abs(tr - 1.0) > cfg.trace_tolerance)
      fail(ErrorCode::integration_quality,
           "trace deviation " + std::to_string(std::abs(tr - 1.0)) + " at t=" +
               std::to_string(t) + "; reduce dt");
    if (stored % cfg.min_eig_every == 0) sample_min_eig(t);
    ++stored;
  };

  record(0.0);
  const long report_every = std::max(1L, steps / 20);
  for (long k = 0; k < steps; ++k) {
    const double t = k * cfg.dt;
    rk4_step(t, cfg.dt, state);
    if ((k + 1) % cfg.store_every == 0) record((k + 1) * cfg.dt);
    if (progress && (k + 1) % report_every == 0) progress((k + 1) * cfg.dt, cfg.t_end);
  }
  if (traj.min_eig_times.empty() || traj.min_eig_times.back() != steps * cfg.dt)
    sample_min_eig(steps * cfg.dt);
  traj.final_state = unpack(state);
  return traj;
}

Trajectory evolve(const ComplexMatrix& rho0, const IntegrationConfig& cfg,
                  const OperatorSet& ops, const DriveConfig& drive,
                  const DissipatorSet& diss, const ProgressFn& progress) {
  return LindbladPropagator(ops, diss, drive).evolve(rho0, cfg, progress);
}

Trajectory closed_evolve_effective(const TargetPair& pair,
                                   const SystemParams& params, double t_end,
                                   double sample_interval) {
  if (!(sample_interval > 0))
    fail(ErrorCode::invalid_argument, "closed_evolve_effective: sample_interval <= 0");
  const double rate = std::abs(g_eff_closed(pair, params));
  Trajectory traj;
  const long samples = std::lround(t_end / sample_interval);
  for (long k = 0; k <= samples; ++k) {
    const double t = k * sample_interval;
    const double stay = std::pow(std::cos(rate * t), 2);
    traj.times.push_back(t);
    traj.n_qubit.push_back(stay);
    traj.n_cav.push_back(stay * pair.n + (1.0 - stay) * (pair.n + 1));
    traj.n_mech.push_back(stay * (pair.m + 1) + (1.0 - stay) * pair.m);
    traj.trace_err.push_back(0.0);
  }
  return traj;
}

}  // namespace mdce
