// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace vvspec {

using cx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Thrown on invalid user input (bad config, bad flow coefficients, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical contract cannot be met (singular resolvent shift,
// contour touching the spectrum, aliasing, overflow, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Map a point to the fundamental torus cell [0, 2pi)^n componentwise.
inline VectorXd wrap_torus(VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] -= two_pi * std::floor(x[i] / two_pi);
  }
  return x;
}

// FNV-1a 64-bit; used to fingerprint configs in manifests, not for security.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Operator 2-norm via power iteration on A^* A from a fixed start vector,
// so repeated runs stay bit-identical.  The Rayleigh quotient converges to
// sigma_max^2 even when the top singular value is degenerate; the iteration
// cap leaves at worst a ~1e-9 relative underestimate for tight clusters.
inline double operator_two_norm(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  const Eigen::Index n = a.cols();
  VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = cx(1.0, static_cast<double>(i % 7) / 8.0);
  }
  v.normalize();
  double rho = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const VectorXcd w = a.adjoint() * (a * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (it > 0 && std::abs(next - rho) <= 1e-12 * next) {
      rho = next;
      break;
    }
    rho = next;
  }
  return std::sqrt(rho);
}

}  // namespace vvspec
