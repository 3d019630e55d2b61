#include "mdce/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "mdce/error.hpp"

namespace mdce {

Eigensystem eigensystem(const Matrix& h) {
  if (h.rows() != h.cols())
    fail(ErrorCode::dimension_mismatch, "eigensystem: matrix is not square");
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    fail(ErrorCode::invalid_argument,
         "eigensystem: matrix is not Hermitian (asymmetry " +
             std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::not_converged, "eigensystem: eigen-solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

struct TopTwo {
  int best = -1;
  double first = -1.0, second = -1.0;
};

TopTwo top_two(const Matrix& vectors, int row) {
  TopTwo t;
  for (int k = 0; k < vectors.cols(); ++k) {
    const double w = vectors(row, k) * vectors(row, k);
    if (w > t.first) {
      t.second = t.first;
      t.first = w;
      t.best = k;
    } else if (w > t.second) {
      t.second = w;
    }
  }
  return t;
}

}  // namespace

TrackedPair track_pair(const Eigensystem& es, const TargetPair& pair,
                       const Dims& dims) {
  const int ie = basis_index(pair.excited(), dims);
  const int ip = basis_index(pair.photon(), dims);
  const Matrix& v = es.vectors;

  int k1 = -1, k2 = -1;
  double w1 = -1.0, w2 = -1.0;
  for (int k = 0; k < v.cols(); ++k) {
    const double w = v(ie, k) * v(ie, k) + v(ip, k) * v(ip, k);
    if (w > w1) {
      k2 = k1;
      w2 = w1;
      k1 = k;
      w1 = w;
    } else if (w > w2) {
      k2 = k;
      w2 = w;
    }
  }
  TrackedPair t;
  t.lower = std::min(k1, k2);
  t.upper = std::max(k1, k2);
  t.gap = es.values(t.upper) - es.values(t.lower);
  const TopTwo te = top_two(v, ie), tp = top_two(v, ip);
  t.overlap_excited = te.first;
  t.overlap_photon = tp.first;
  t.ambiguous = (te.first - te.second < 0.1) || (tp.first - tp.second < 0.1);
  return t;
}

LevelScan scan_levels(const SystemParams& params, const Dims& dims,
                      double omega_a_lo, double omega_a_hi, int grid_points,
                      const std::vector<TargetPair>& tracked_pairs) {
  if (grid_points < 2)
    fail(ErrorCode::invalid_argument, "scan_levels: need at least 2 grid points");
  if (!(omega_a_hi > omega_a_lo))
    fail(ErrorCode::invalid_argument, "scan_levels: empty omega_a range");
  const OperatorSet ops = build_operators(dims);
  for (const auto& p : tracked_pairs) {
    p.validate();
    if (!in_bounds(p.excited(), dims) || !in_bounds(p.photon(), dims))
      fail(ErrorCode::truncation, "scan_levels: tracked pair outside truncation");
  }

  const int d = dims.total();
  LevelScan scan;
  scan.dims = dims;
  scan.pairs = tracked_pairs;
  scan.levels.resize(grid_points, d);
  scan.tracked.assign(tracked_pairs.size(), {});

  for (int gp = 0; gp < grid_points; ++gp) {
    SystemParams p = params;
    p.omega_a = omega_a_lo + (omega_a_hi - omega_a_lo) * gp / (grid_points - 1);
    scan.omega_a_grid.push_back(p.omega_a);
    const Eigensystem es = eigensystem(build_static_hamiltonian(p, ops));
    scan.levels.row(gp) = es.values.transpose();

    std::vector<int> label(d);
    std::vector<double> overlap(d);
    std::vector<bool> ambiguous(d);
    for (int k = 0; k < d; ++k) {
      const Vector w = es.vectors.col(k).cwiseAbs2();
      Eigen::Index best = 0;
      const double first = w.maxCoeff(&best);
      double second = 0.0;
      for (int r = 0; r < d; ++r)
        if (r != best) second = std::max(second, w(r));
      label[k] = static_cast<int>(best);
      overlap[k] = first;
      ambiguous[k] = first - second < 0.1;
    }
    scan.dominant_state.push_back(std::move(label));
    scan.dominant_overlap.push_back(std::move(overlap));
    scan.ambiguous.push_back(std::move(ambiguous));

    for (std::size_t ip = 0; ip < tracked_pairs.size(); ++ip)
      scan.tracked[ip].push_back(track_pair(es, tracked_pairs[ip], dims));
  }
  return scan;
}

double tracked_gap(const SystemParams& params, const OperatorSet& ops,
                   const TargetPair& pair) {
  const Eigensystem es = eigensystem(build_static_hamiltonian(params, ops));
  return track_pair(es, pair, ops.dims).gap;
}

CrossingResult find_avoided_crossing(const SystemParams& params, const Dims& dims,
                                     const TargetPair& pair,
                                     const CrossingOptions& options) {
  params.validate();
  pair.validate();
  const OperatorSet ops = build_operators(dims);
  if (!in_bounds(pair.excited(), dims) || !in_bounds(pair.photon(), dims))
    fail(ErrorCode::truncation, "find_avoided_crossing: pair outside truncation");
  if (options.coarse_points < 5)
    fail(ErrorCode::invalid_argument, "find_avoided_crossing: coarse_points < 5");

  const double centre = params.omega_c - params.omega_m;
  double half = options.half_width;
  if (half <= 0) {
    SystemParams guess = params;
    guess.omega_a = centre;
    half = std::max(0.02, 3.0 * std::abs(energy_shifts(pair, guess).delta_closed));
  }
  const double lo = std::max(1e-6, centre - half), hi = centre + half;

  CrossingResult r;
  r.pair = pair;
  SystemParams p = params;
  auto gap_at = [&](double wa) {
    p.omega_a = wa;
    ++r.evaluations;
    return tracked_gap(p, ops, pair);
  };

  const int npts = options.coarse_points;
  const double step = (hi - lo) / (npts - 1);
  int best = 0;
  double best_gap = gap_at(lo);
  for (int k = 1; k < npts; ++k) {
    const double gk = gap_at(lo + k * step);
    if (gk < best_gap) {
      best_gap = gk;
      best = k;
    }
  }
  if (best == 0 || best == npts - 1)
    fail(ErrorCode::search_failed,
         "find_avoided_crossing: gap minimum not bracketed in [" +
             std::to_string(lo) + ", " + std::to_string(hi) + "]");

  // Golden-section refinement on the two neighbouring coarse cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo + (best - 1) * step, b = lo + (best + 1) * step;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double gc = gap_at(c), gd = gap_at(d);
  while (b - a > options.tolerance) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = gap_at(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = gap_at(d);
    }
  }
  r.omega_a_star = 0.5 * (a + b);
  r.gap = gap_at(r.omega_a_star);
  r.predicted_gap = 2.0 * std::abs(g_eff_closed(pair, params));
  r.offset = centre - r.omega_a_star;
  SystemParams at_star = params;
  at_star.omega_a = r.omega_a_star;
  r.predicted_delta = energy_shifts(pair, at_star).delta_closed;
  return r;
}

}  // namespace mdce
