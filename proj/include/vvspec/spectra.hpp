// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "vvspec/galerkin.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

struct SpectrumResult {
  VectorXcd eigenvalues;  // sorted by decreasing Re, ties by increasing Im
  MatrixXcd vectors;      // unit columns aligned with eigenvalues
  VectorXd residuals;     // ||L v - lambda v|| per (unit) pair
};

SpectrumResult eigen_decompose(const GalerkinOperator& op);

// Indices (into the sorted spectrum) with Re lambda > mu_hat + delta.
std::vector<int> unstable_set(const SpectrumResult& s, double mu_hat,
                              double delta);

// (L - zeta I)^{-1} rhs by LU; refuses shifts whose factorization is
// numerically singular, reporting the estimated distance to the spectrum.
VectorXcd resolvent_solve(const GalerkinOperator& op, cx zeta,
                          const VectorXcd& rhs);

struct RieszProjection {
  MatrixXcd matrix;
  cx trace;
  double idempotency_defect = 0.0;  // Frobenius norm of P^2 - P
  cx center;
  double radius = 0.0;
  int nodes = 0;
};

// Trapezoidal contour quadrature of the resolvent around the given circle.
// Every eigenvalue must clear the contour by 0.05 * radius (guard band).
RieszProjection riesz_projection(const GalerkinOperator& op, cx center,
                                 double radius, int nodes = 64);

// Nearest integer to Re trace; rejects traces that are not close to one.
int multiplicity(const RieszProjection& p);

struct BranchPoint {
  double eps = 0.0;
  bool excluded = false;    // guard band tripped: values below not computed
  std::vector<cx> inside;   // eigenvalues strictly inside the contour
  bool has_lambda = false;
  cx lambda;                // inside eigenvalue closest to lambda0
  int mult = 0;             // Riesz trace multiplicity inside the contour
  double proj_dist = 0.0;   // || P_eps - P_0 ||_2
  double rightmost_re = 0.0;  // max Re over the full spectrum at this eps
};

struct BranchCurve {
  cx lambda0;
  double radius = 0.0;
  int nodes = 0;
  std::vector<BranchPoint> points;  // eps strictly decreasing, last is 0
};

// Fixed contour around lambda0, swept over the viscosity grid (0 appended
// when missing).  Matching picks, per eps, the inside eigenvalue closest to
// lambda0 with ties broken toward smaller |Im|.
BranchCurve continue_in_viscosity(const SteadyFlow& flow,
                                  std::shared_ptr<const ModeSet> ms,
                                  cx lambda0, double radius,
                                  std::vector<double> eps_grid,
                                  int nodes = 64);

// Half the distance from lambda0 to the nearest spectrally distinct
// eigenvalue (points closer than cluster_tol count as copies of lambda0).
double isolation_radius(const SpectrumResult& s, cx lambda0,
                        double cluster_tol = 1e-8);

// Finite-section determinant of the two-block split of a propagator matrix
// g: G_plus = G P_inner, G_minus = G (I - P_inner) with P_inner the sharp
// Euclidean ball mode projector of radius n_inner.  Valid for |z| above the
// spectral radius of G_minus (power-iteration estimate enforced).
cx reduction_determinant(const MatrixXcd& g, const ModeSet& ms,
                         double n_inner, cx z);

struct RootCount {
  int count = 0;            // winding number of the determinant
  cx sum;                   // sum of enclosed roots (first moment)
  double winding_residual = 0.0;
};

// Argument-principle count and first moment of determinant roots on a circle.
RootCount reduction_roots(const MatrixXcd& g, const ModeSet& ms,
                          double n_inner, cx center, double radius,
                          int nodes = 64);

}  // namespace vvspec
