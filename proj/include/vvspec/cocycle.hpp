// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vvspec/flows.hpp"
#include "vvspec/types.hpp"

namespace vvspec {

// (2 xi xi^T / |xi|^2 - I) grad u(x).  Real-valued and 0-homogeneous in xi.
MatrixXd amplitude_symbol(const SteadyFlow& flow, const VectorXd& x,
                          const VectorXd& xi);

struct CocycleState {
  VectorXd x;
  VectorXd xi;
  VectorXcd b;
  double t = 0.0;
};

struct RayResult {
  // Checkpoints at uniform times including both endpoints.
  std::vector<CocycleState> path;
  // Fundamental matrix of the amplitude equation along the ray: b(t) = B b(0).
  MatrixXd fundamental;
  // int_0^t |xi(s)|^2 ds, accumulated inside the same integration.
  double xi_quad = 0.0;
};

// Joint integration of dx = u(x), dxi = -grad_u(x)^T xi, dB = a0(x, xi) B.
// Conserves xi . u(x) and, when started at zero, xi . b.
RayResult integrate_ray(const SteadyFlow& flow, const VectorXd& x0,
                        const VectorXd& xi0, const VectorXcd& b0, double t,
                        double tol = 1e-10, int checkpoints = 16);

// exp(-eps * int_0^t |xi(s)|^2 ds); equals 1 at eps = 0, monotone in t & eps.
double viscous_damping(const SteadyFlow& flow, const VectorXd& x0,
                       const VectorXd& xi0, double t, double eps,
                       double tol = 1e-10);

struct LyapunovParams {
  int samples = 64;
  double horizon = 200.0;
  double renorm_dt = 1.0;   // renormalization interval for b and xi
  int weight_m = 0;         // growth of |b| |xi|^m
  double ode_tol = 1e-10;
  std::uint64_t seed = 1;
};

struct SampleRate {
  VectorXd x0;
  VectorXd xi0;
  double rate;  // max over the fiber frame of F(xi0) used as b(0)
};

struct LyapunovEstimate {
  double mu = 0.0;  // max over samples
  int weight_m = 0;
  int samples = 0;
  double horizon = 0.0;
  std::vector<SampleRate> per_sample;
  // Half the spread of the top decile of per-sample rates.
  double confidence_halfwidth = 0.0;
};

// Scalar-renormalized cocycle growth: accumulate log ||b|| + m log |xi| at
// every renormalization time, fit a line over the second half of the horizon,
// take the max over samples drawn uniformly from T^n x S^{n-1} (seeded).
LyapunovEstimate lyapunov_exponent(const SteadyFlow& flow,
                                   const LyapunovParams& params);

}  // namespace vvspec
