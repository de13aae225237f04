// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "vvspec/flows.hpp"
#include "vvspec/lattice.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

// Dense matrix of the linearized operator on a ModeSet.  form "velocity":
// fiber coordinates, dimension ModeSet::dimension().  form "vorticity"
// (2D only): one scalar per mode, dimension ModeSet::mode_count().
struct GalerkinOperator {
  std::shared_ptr<const ModeSet> modes;
  double eps = 0.0;
  std::string flow_name;
  std::string form = "velocity";
  MatrixXcd mat;

  int dimension() const { return static_cast<int>(mat.rows()); }
};

// -P[(u.grad)v + (v.grad)u] + eps Laplacian, assembled by exact convolution
// over the flow's Fourier support; couplings leaving the ModeSet are dropped.
// The dissipation enters as the exact diagonal -eps |k|^2, so operators at
// two viscosities differ by precisely that diagonal.
GalerkinOperator assemble(const SteadyFlow& flow,
                          std::shared_ptr<const ModeSet> ms, double eps);

// Skew part -P(u.grad)v alone (anti-Hermitian in fiber coordinates) and the
// zero-order stretching part -P(v.grad)u alone; assemble() is their sum plus
// the dissipation diagonal.  Exposed for structure diagnostics and tests.
MatrixXcd assemble_advection(const SteadyFlow& flow, const ModeSet& ms);
MatrixXcd assemble_stretching(const SteadyFlow& flow, const ModeSet& ms);

// Independent 2D route: scalar transport of the curl,
// d/dt w = -u.grad w - v.grad W + eps Lap w with v = curl^{-1} w.
// Spectrally equivalent to the velocity form on the same ModeSet.
GalerkinOperator assemble_vorticity_2d(const SteadyFlow& flow,
                                       std::shared_ptr<const ModeSet> ms,
                                       double eps);

// Matrix-vector action on a fiber-layout field over the same ModeSet.
SpectralField apply_operator(const GalerkinOperator& op,
                             const SpectralField& f);

}  // namespace vvspec
