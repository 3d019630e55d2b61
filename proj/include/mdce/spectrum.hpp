#pragma once

#include <vector>

#include "mdce/fockspace.hpp"
#include "mdce/model.hpp"
#include "mdce/perturbation.hpp"

namespace mdce {

struct Eigensystem {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

/// Throws ErrorCode::invalid_argument if H deviates from symmetry by more
/// than 1e-10 (max norm).
Eigensystem eigensystem(const Matrix& h);

/// Eigenstates of H with the largest combined weight on the two bare
/// partners of `pair`, ordered by energy. Identity follows overlaps, never
/// sort order, so it survives the anticrossing.
struct TrackedPair {
  int lower = -1;  // eigen-index of the lower tracked level
  int upper = -1;
  double gap = 0.0;
  double overlap_excited = 0.0;  // max_k |<e,n,m+1|psi_k>|^2
  double overlap_photon = 0.0;   // max_k |<g,n+1,m|psi_k>|^2
  bool ambiguous = false;        // top two overlaps within 0.1 for either state
};

TrackedPair track_pair(const Eigensystem& es, const TargetPair& pair,
                       const Dims& dims);

struct LevelScan {
  Dims dims;
  std::vector<double> omega_a_grid;
  Matrix levels;  // grid point x level index, ascending per row
  /// Per grid point and level: bare state with the largest overlap.
  std::vector<std::vector<int>> dominant_state;
  std::vector<std::vector<double>> dominant_overlap;
  std::vector<std::vector<bool>> ambiguous;
  std::vector<TargetPair> pairs;
  std::vector<std::vector<TrackedPair>> tracked;  // [pair][grid point]
};

LevelScan scan_levels(const SystemParams& params, const Dims& dims,
                      double omega_a_lo, double omega_a_hi, int grid_points,
                      const std::vector<TargetPair>& tracked_pairs);

struct CrossingOptions {
  /// Search window is centre +/- half_width with the centre at the bare
  /// resonance w_c - w_m. Non-positive means max(0.02, 3 |delta|).
  double half_width = 0.0;
  int coarse_points = 200;
  double tolerance = 1e-12;
};

struct CrossingResult {
  TargetPair pair;
  double omega_a_star = 0.0;
  double gap = 0.0;
  double predicted_gap = 0.0;  // 2 |g_eff|
  /// w_c - w_m - w_a*, the numerical counterpart of delta.
  double offset = 0.0;
  double predicted_delta = 0.0;  // closed-form delta at w_a*
  int evaluations = 0;
};

double tracked_gap(const SystemParams& params, const OperatorSet& ops,
                   const TargetPair& pair);

CrossingResult find_avoided_crossing(const SystemParams& params, const Dims& dims,
                                     const TargetPair& pair,
                                     const CrossingOptions& options = {});

}  // namespace mdce
