#pragma once

#include <string>

#include <Eigen/Dense>

namespace mdce {

/// Every operator in this model has real matrix elements in the |j n m>
/// basis, so operators and Hamiltonians are stored as real matrices.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class Qubit : int { g = 0, e = 1 };

/// Truncated qubit (x) cavity (x) mechanics space. The qubit always has two
/// levels; the cavity keeps Fock states |0>..|n_cav-1>, the mechanics
/// |0>..|n_mech-1>.
struct Dims {
  int n_cav = 6;
  int n_mech = 6;

  static constexpr int n_qubit = 2;

  int total() const { return n_qubit * n_cav * n_mech; }
  void validate() const;

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Bare product state |j, n, m>.
struct BasisLabel {
  Qubit j = Qubit::g;
  int n = 0;
  int m = 0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// Basis ordering is j-major, then n, then m (m varies fastest):
///   index = (j * n_cav + n) * n_mech + m
int basis_index(const BasisLabel& label, const Dims& dims);
BasisLabel basis_label(int index, const Dims& dims);
bool in_bounds(const BasisLabel& label, const Dims& dims);

/// "g,1,0" style label used in CSV and JSON output.
std::string to_string(const BasisLabel& label);

/// Bare energy w_a [j=e] + n w_c + m w_m.
double bare_energy(const BasisLabel& label, double omega_a, double omega_c,
                   double omega_m);

struct OperatorSet {
  Dims dims;
  Matrix a, a_dag;
  Matrix b, b_dag;
  Matrix sigma_minus, sigma_plus;
  Matrix num_cav, num_mech, num_qubit;

  int dimension() const { return dims.total(); }
  Matrix identity() const { return Matrix::Identity(dimension(), dimension()); }
};

OperatorSet build_operators(const Dims& dims);

}  // namespace mdce
