// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vvspec/types.hpp"

namespace vvspec {

// Steady divergence-free velocity field on the torus with a finite Fourier
// support.  Catalog fields evaluate through closed trigonometric forms; a
// custom field evaluates its (validated) coefficient sum.  Immutable.
class SteadyFlow {
 public:
  using CoeffMap = std::map<std::vector<int>, VectorXcd>;

  static SteadyFlow zero(int dim);
  // u = (A sin(m x2), 0).
  static SteadyFlow shear(int m, double amplitude);
  // Same velocity field as shear(m, A); kept as a separately named catalog
  // entry because the two names travel in configs and manifests.
  static SteadyFlow kolmogorov(int m, double amplitude);
  // Stream function A sin(x1) sin(x2):  u = (A sin x1 cos x2, -A cos x1 sin x2).
  static SteadyFlow cellular(double amplitude);
  // Arbitrary finite coefficient set; rejects non-divergence-free input
  // (naming the offending mode) and non-conjugate-symmetric input.
  static SteadyFlow custom(int dim, CoeffMap coeffs);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const CoeffMap& fourier_coeffs() const { return coeffs_; }

  VectorXd velocity(const VectorXd& x) const;
  // (i, j) entry is d u_i / d x_j; trace-free for divergence-free fields.
  MatrixXd grad(const VectorXd& x) const;

 private:
  enum class Kind { zero, shear, cellular, custom };
  SteadyFlow() = default;

  Kind kind_ = Kind::zero;
  std::string name_;
  int dim_ = 2;
  int m_ = 1;
  double amp_ = 0.0;
  CoeffMap coeffs_;
};

// {"name": "shear", "m": 2, "amplitude": 1.0} or
// {"name": "custom", "dim": 2, "coeffs": [{"k": [...], "re": [...], "im": [...]}]}
SteadyFlow flow_from_json(const nlohmann::json& j);

struct FlowMapResult {
  VectorXd x_t;                          // unwrapped position
  MatrixXd jacobian;                     // d phi_t / d x0
  MatrixXd inverse_transpose_jacobian;   // cofactor-form inverse transpose
  double t = 0.0;
};

// Joint integration of dx/dt = u(x) and dJ/dt = grad u(x) J from (x0, I).
// |t| beyond t_max is rejected; raise t_max explicitly for long horizons.
FlowMapResult integrate_flow_map(const SteadyFlow& flow, const VectorXd& x0,
                                 double t, double tol = 1e-10,
                                 double t_max = 50.0);

}  // namespace vvspec
