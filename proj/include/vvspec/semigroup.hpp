// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
//
// Time propagation of the truncated operator and its geometric-optics
// approximation: exact block matrix exponentials, pseudodifferential
// application on uniform grids, transported-amplitude evolution, wave
// packets, and the residual diagnostics comparing the two routes.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vvspec/cocycle.hpp"
#include "vvspec/flows.hpp"
#include "vvspec/galerkin.hpp"
#include "vvspec/grid.hpp"
#include "vvspec/lattice.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

// e^{tL} for a truncated operator, stored as dense exponentials of the
// connected components of the coupling graph.  Exact at t = 0 (each block
// exponential of the zero-time scaling is the identity).
struct Propagator {
  std::shared_ptr<const ModeSet> modes;
  double t = 0.0;
  double eps = 0.0;
  std::string flow_name;
  std::vector<std::vector<int>> component_cols;  // coefficient indices
  std::vector<MatrixXcd> blocks;                 // e^{t L_block} per component

  int dimension() const;
  VectorXcd apply(const VectorXcd& fiber_coeffs) const;
  SpectralField apply(const SpectralField& f) const;
  MatrixXcd dense() const;
  // Eigenvalues of e^{tL}, union over blocks, sorted by (-Re, Im).
  VectorXcd eigenvalues() const;
};

// Builds e^{tL} from the assembled operator.  Throws NumericalError when a
// Gershgorin bound predicts overflow, reporting how many legs t needs.
Propagator propagator(const GalerkinOperator& op, double t);

// sigma(x, k) as an n x n complex matrix; k is an integer lattice mode.
using SymbolFn = std::function<MatrixXcd(const VectorXd&, const VectorXi&)>;

// op[sigma] f (x) = sum_k e^{i k.x} sigma(x, k) f_hat(k), evaluated on a
// uniform grid and re-expanded on f's ModeSet.  Requires grid_pts odd and
// >= 4 * cutoff + 1 so products stay clear of the aliasing sentinel.
// Exact (to roundoff) for x-independent symbols.  Returns full layout.
SpectralField apply_pdo(const SymbolFn& sigma, const SpectralField& f,
                        int grid_pts, double active_tol = 1e-13);

// Smallest admissible grid for a ModeSet under the 4x bandwidth rule.
int default_grid_pts(const ModeSet& ms);

// Reusable ray data for one (flow, t, grid resolution) triple.  Amplitude
// matrices and |xi|^2 quadratures are viscosity independent, so sweeps over
// eps rerun no rays.
struct RayCache {
  std::string flow_name;
  double t = 0.0;
  int grid_pts = 0;
  double ode_tol = 0.0;
  // Per lattice mode: B_t and integral of |xi(s)|^2 at every grid point.
  std::map<std::vector<int>, std::pair<std::vector<MatrixXd>, std::vector<double>>>
      forward;
  // Same data seeded at the backward-mapped points phi_{-t}(x_j), used by
  // the leading-order asymptotic term.
  std::map<std::vector<int>, std::pair<std::vector<MatrixXd>, std::vector<double>>>
      pulled_back;
  bool have_backward_map = false;
  MatrixXd backward_points;  // phi_{-t}(x_j) rows

  void require(const SteadyFlow& flow, double t_, int grid_pts_, double tol);
};

// Geometric-optics approximate propagator: transport the amplitude along
// rays, damp by the viscous quadrature, then compose with the backward flow
// map and re-project onto divergence-free fields.  Returns fiber layout.
SpectralField apply_transported(const SteadyFlow& flow, double eps, double t,
                                const SpectralField& f, int grid_pts,
                                RayCache* cache = nullptr,
                                double ode_tol = 1e-8);

// Divergence-free wave packet with carrier xi0/delta and a fixed smooth
// envelope of bandwidth 1.  Requires 1/delta integral, the carrier inside
// the ModeSet, and cutoff headroom >= 2x the carrier frequency.
struct WavePacket {
  double delta = 0.0;
  VectorXi carrier;
  SpectralField field;  // full layout, divergence free
};

WavePacket make_wave_packet(std::shared_ptr<const ModeSet> ms,
                            const VectorXd& xi0, double delta);

struct PacketResidual {
  double r_asym = 0.0;    // inviscid propagator vs leading-order term
  double r_decomp = 0.0;  // viscous propagator vs transported approximation
};

// Inviscid propagator output vs the leading-order term B_t(y, xi0) f(y),
// y = phi_{-t}(x), compared in grid values relative to ||f||.  prop0 must
// be the eps = 0 propagator on the packet's ModeSet.
double packet_residual_asym(const SteadyFlow& flow, double t,
                            const WavePacket& packet, int grid_pts,
                            const Propagator& prop0, RayCache* cache = nullptr,
                            double ode_tol = 1e-8);

// Viscous propagator vs the transported approximation at prop_eps.eps, in
// coefficient space relative to ||f||.
double packet_residual_decomp(const SteadyFlow& flow, double t,
                              const WavePacket& packet, int grid_pts,
                              const Propagator& prop_eps,
                              RayCache* cache = nullptr, double ode_tol = 1e-8);

// Both residuals for one packet at one viscosity, relative to ||f||.
PacketResidual packet_residual(const SteadyFlow& flow, double t,
                               const WavePacket& packet, double eps,
                               int grid_pts, RayCache* cache = nullptr,
                               double ode_tol = 1e-8);

struct PacketSweepRow {
  double delta = 0.0;
  double eps = 0.0;
  double r_asym = 0.0;
  double r_decomp = 0.0;
};

// Sweeps a delta x eps table at fixed horizon; one ModeSet per delta sized
// by the headroom rule, one ray cache per delta reused across viscosities.
std::vector<PacketSweepRow> packet_sweep(const SteadyFlow& flow, double t,
                                         const std::vector<double>& deltas,
                                         const std::vector<double>& eps_list,
                                         const VectorXd& xi0,
                                         double ode_tol = 1e-8);

struct DecompFit {
  double c_delta = 0.0;   // coefficient of delta
  double c_sqrteps = 0.0;  // coefficient of sqrt(eps)
  double r_squared = 0.0;
};

// Least-squares fit r_decomp ~ C1*delta + C2*sqrt(eps) over sweep rows.
DecompFit fit_decomp_model(const std::vector<PacketSweepRow>& rows);

struct EssentialRadiusRow {
  int cutoff = 0;
  double complement_growth = 0.0;  // largest |eig| of e^{tL} off the ball
  int count_above = 0;             // eigenvalues of L with Re > mu + delta
  int count_near_axis = 0;         // eigenvalues with |Re| <= axis_band
};

// Truncation-stability diagnostic: grows the cutoff, watches the unstable
// count stabilise while the near-axis cloud thickens, and bounds the
// essential spectral radius surrogate by restricting the largest-cutoff
// propagator to the complement of each ball.
std::vector<EssentialRadiusRow> essential_radius_diagnostic(
    const SteadyFlow& flow, const std::vector<int>& cutoffs, double t,
    double mu, double delta, double axis_band = 0.01);

}  // namespace vvspec
