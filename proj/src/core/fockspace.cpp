#include "mdce/fockspace.hpp"

#include <cmath>

#include "mdce/error.hpp"

namespace mdce {

void Dims::validate() const {
  if (n_cav < 2 || n_mech < 2) {
    fail(ErrorCode::invalid_argument,
         "Fock cutoffs must be >= 2 (got n_cav=" + std::to_string(n_cav) +
             ", n_mech=" + std::to_string(n_mech) + ")");
  }
}

bool in_bounds(const BasisLabel& label, const Dims& dims) {
  const int j = static_cast<int>(label.j);
  return (j == 0 || j == 1) && label.n >= 0 && label.n < dims.n_cav &&
         label.m >= 0 && label.m < dims.n_mech;
}

int basis_index(const BasisLabel& label, const Dims& dims) {
  if (!in_bounds(label, dims)) {
    fail(ErrorCode::out_of_range,
         "basis label |" + to_string(label) + "> outside truncation (" +
             std::to_string(dims.n_cav) + "," + std::to_string(dims.n_mech) +
             ")");
  }
  return (static_cast<int>(label.j) * dims.n_cav + label.n) * dims.n_mech +
         label.m;
}

BasisLabel basis_label(int index, const Dims& dims) {
  if (index < 0 || index >= dims.total()) {
    fail(ErrorCode::out_of_range,
         "basis index " + std::to_string(index) + " outside 0.." +
             std::to_string(dims.total() - 1));
  }
  BasisLabel label;
  label.m = index % dims.n_mech;
  label.n = (index / dims.n_mech) % dims.n_cav;
  label.j = static_cast<Qubit>(index / (dims.n_mech * dims.n_cav));
  return label;
}

std::string to_string(const BasisLabel& label) {
  return std::string(label.j == Qubit::e ? "e" : "g") + "," +
         std::to_string(label.n) + "," + std::to_string(label.m);
}

double bare_energy(const BasisLabel& label, double omega_a, double omega_c,
                   double omega_m) {
  return (label.j == Qubit::e ? omega_a : 0.0) + label.n * omega_c +
         label.m * omega_m;
}

namespace {

Matrix ladder(int levels) {
  Matrix lowering = Matrix::Zero(levels, levels);
  for (int k = 1; k < levels; ++k) lowering(k - 1, k) = std::sqrt(double(k));
  return lowering;
}

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
  return out;
}

}  // namespace

OperatorSet build_operators(const Dims& dims) {
  dims.validate();
  const Matrix id_q = Matrix::Identity(2, 2);
  const Matrix id_c = Matrix::Identity(dims.n_cav, dims.n_cav);
  const Matrix id_m = Matrix::Identity(dims.n_mech, dims.n_mech);

  // |g> = 0, |e> = 1, so sigma_- = |g><e| sits at (0, 1).
  Matrix sm = Matrix::Zero(2, 2);
  sm(0, 1) = 1.0;

  OperatorSet ops;
  ops.dims = dims;
  ops.a = kron(id_q, kron(ladder(dims.n_cav), id_m));
  ops.b = kron(id_q, kron(id_c, ladder(dims.n_mech)));
  ops.sigma_minus = kron(sm, kron(id_c, id_m));
  ops.a_dag = ops.a.transpose();
  ops.b_dag = ops.b.transpose();
  ops.sigma_plus = ops.sigma_minus.transpose();
  ops.num_cav = ops.a_dag * ops.a;
  ops.num_mech = ops.b_dag * ops.b;
  ops.num_qubit = ops.sigma_plus * ops.sigma_minus;
  return ops;
}

}  // namespace mdce
