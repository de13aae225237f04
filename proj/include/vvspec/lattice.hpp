// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vvspec/types.hpp"

namespace vvspec {

// Truncated Fourier lattice 0 < |k|_inf <= cutoff on the torus, with an
// orthonormal basis of the divergence-free fiber F(k) = { v : k.v = 0 }
// attached to every mode.  The k = 0 mode is excluded throughout: constant
// fields are not part of the phase space.  Immutable after construction.
class ModeSet {
 public:
  ModeSet(int dim, int cutoff);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  int mode_count() const { return static_cast<int>(modes_.size()); }
  int fibers_per_mode() const { return dim_ - 1; }
  // Total number of fiber coordinates, (dim-1) * mode_count().
  int dimension() const { return mode_count() * (dim_ - 1); }

  const std::vector<VectorXi>& modes() const { return modes_; }
  const VectorXi& mode(int i) const { return modes_[static_cast<size_t>(i)]; }
  double mode_norm2(int i) const;

  // Index of k in the lexicographic enumeration, -1 if absent.
  int mode_index(const VectorXi& k) const;
  bool contains(const VectorXi& k) const { return mode_index(k) >= 0; }

  // Columns are an orthonormal real basis of F(k).  2D: k_perp/|k| with the
  // first nonzero component positive; 3D: Gram-Schmidt on two fixed seeds.
  const MatrixXd& fiber_basis(int mode_i) const {
    return bases_[static_cast<size_t>(mode_i)];
  }

  // (mode, fiber slot) <-> flat coordinate index.
  int col(int mode_i, int slot) const { return mode_i * (dim_ - 1) + slot; }
  std::pair<int, int> mode_of_col(int c) const {
    return {c / (dim_ - 1), c % (dim_ - 1)};
  }

 private:
  int dim_;
  int cutoff_;
  std::vector<VectorXi> modes_;
  std::vector<MatrixXd> bases_;
  std::map<std::vector<int>, int> index_;
};

void to_json(nlohmann::json& j, const ModeSet& ms);
ModeSet modeset_from_json(const nlohmann::json& j);

// I - kk^T/|k|^2.  Symmetric idempotent annihilating k; rejects k = 0.
MatrixXd leray_fiber_projector(const VectorXi& k);

enum class Layout { fiber, full };

// Coefficient vector over a ModeSet.  fiber layout: one complex coordinate
// per fiber basis vector (intrinsically divergence-free).  full layout: dim
// complex components per mode, unconstrained.
struct SpectralField {
  std::shared_ptr<const ModeSet> modes;
  Layout layout = Layout::fiber;
  VectorXcd coeffs;

  double norm() const { return coeffs.norm(); }
};

SpectralField make_zero_field(std::shared_ptr<const ModeSet> ms, Layout lay);

// Layout conversions.  full_to_fiber returns the fiber coordinates of the
// Leray projection; fiber_to_full followed by full_to_fiber is the identity.
SpectralField fiber_to_full(const SpectralField& f);
SpectralField full_to_fiber(const SpectralField& f);

// Mode-wise Leray projection (full layout in and out).  Idempotent, norm
// non-increasing, annihilates gradient fields v(k) = i k g(k).
SpectralField project_div_free(const SpectralField& f);

// Zero every coefficient with Euclidean |k| >= n_prime (the sharp ball
// multiplier).  Works in either layout; truncations compose by the min rule.
SpectralField truncate(const SpectralField& f, double n_prime);

}  // namespace vvspec
