// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "vvspec/lattice.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

// Uniform collocation grid on [0, 2pi)^dim with an odd number of points per
// axis, so the represented lattice |k|_inf <= (pts-1)/2 is symmetric and the
// grid transforms below are exact inverses of each other.
struct TorusGrid {
  int dim = 2;
  int pts = 0;  // per axis, odd
  TorusGrid(int dim_, int pts_);

  int total() const;
  int half() const { return (pts - 1) / 2; }  // max represented |k|_inf
  VectorXd point(int flat) const;
  // Flat index convention: x1 varies slowest.
  int flat(const VectorXi& j) const;
};

// Complex scalar samples on the grid <-> lattice coefficients over the full
// represented cube.  Coefficient storage is a (2h+1)^dim vector indexed by
// cube_index below; both directions are exact for band-limited data.
VectorXcd grid_to_cube(const TorusGrid& g, const VectorXcd& samples);
VectorXcd cube_to_grid(const TorusGrid& g, const VectorXcd& cube);

int cube_index(const TorusGrid& g, const VectorXi& k);
VectorXi cube_mode(const TorusGrid& g, int idx);

// Evaluate a cube coefficient vector at arbitrary points (rows of pts_mat),
// using per-axis phase recurrences rather than per-term exponentials.
VectorXcd cube_eval_at(const TorusGrid& g, const VectorXcd& cube,
                       const MatrixXd& pts_mat);

// Fraction of spectral energy carried by modes with |k|_inf in the top third
// of the representable range; the aliasing sentinel for grid round-trips.
double top_third_energy_fraction(const TorusGrid& g, const VectorXcd& cube);

// Samples of every component of a ModeSet field on the grid (total() x dim),
// and the exact projection of grid samples back onto ModeSet coefficients.
MatrixXcd field_to_grid(const TorusGrid& g, const SpectralField& f);
SpectralField grid_to_field(const TorusGrid& g, const MatrixXcd& samples,
                            std::shared_ptr<const ModeSet> ms,
                            double alias_tol = 1e-6);

}  // namespace vvspec
