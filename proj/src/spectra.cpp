// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <lapacke.h>

namespace vvspec {

namespace {

std::vector<int> spectral_order(const VectorXcd& ev) {
  std::vector<int> idx(static_cast<size_t>(ev.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (ev[a].real() != ev[b].real()) return ev[a].real() > ev[b].real();
    return ev[a].imag() < ev[b].imag();
  });
  return idx;
}

// Schur form with the contour quadrature expressed in the Schur frame:
// (zeta I - L)^{-1} = -Q (T - zeta I)^{-1} Q^*, so the projection is
// Q [ -(r/M) sum_j e^{i th_j} (T - zeta_j I)^{-1} ] Q^*.
class SchurResolvent {
 public:
  explicit SchurResolvent(const MatrixXcd& a) : schur_(a) {
    if (schur_.info() != Eigen::Success) {
      throw NumericalError("complex Schur decomposition failed");
    }
  }

  VectorXcd eigenvalues() const { return schur_.matrixT().diagonal(); }

  void check_guard_band(cx center, double radius, int nodes) const {
    const VectorXcd ev = eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double d = std::abs(std::abs(ev[i] - center) - radius);
      if (d < 0.05 * radius) {
        std::ostringstream os;
        os << "contour guard band violated: eigenvalue (" << ev[i].real()
           << "," << ev[i].imag() << ") lies within " << d
           << " of the circle |z - center| = " << radius
           << " (guard band " << 0.05 * radius << "); nodes=" << nodes;
        throw NumericalError(os.str());
      }
    }
  }

  RieszProjection project(cx center, double radius, int nodes) const {
    if (nodes < 16) throw ConfigError("riesz: at least 16 quadrature nodes");
    if (radius <= 0.0) throw ConfigError("riesz: radius must be positive");
    check_guard_band(center, radius, nodes);
    const Eigen::Index n = schur_.matrixT().rows();
    const MatrixXcd& t = schur_.matrixT();
    MatrixXcd acc = MatrixXcd::Zero(n, n);
    MatrixXcd work(n, n);
    for (int j = 0; j < nodes; ++j) {
      const double th = two_pi * j / nodes;
      const cx w = std::polar(1.0, th);
      const cx zeta = center + radius * w;
      // Invert the shifted triangular factor in place; the strictly lower
      // part stays zero, so accumulating the full matrix is sound.
      work = t;
      work.diagonal().array() -= zeta;
      const lapack_int info =
          LAPACKE_ztrtri(LAPACK_COL_MAJOR, 'U', 'N',
                         static_cast<lapack_int>(n), work.data(),
                         static_cast<lapack_int>(n));
      if (info != 0) {
        throw NumericalError("resolvent inversion failed at a quadrature "
                             "node (shift hits an eigenvalue)");
      }
      acc.noalias() += w * work;
    }
    acc *= -radius / nodes;
    RieszProjection p;
    p.matrix.noalias() = schur_.matrixU() * acc * schur_.matrixU().adjoint();
    p.trace = p.matrix.trace();
    p.idempotency_defect = (p.matrix * p.matrix - p.matrix).norm();
    p.center = center;
    p.radius = radius;
    p.nodes = nodes;
    return p;
  }

  // Trace of the quadrature projection, from the Schur diagonal alone: the
  // resolvent of a triangular matrix is triangular with diagonal
  // 1/(T_ii - zeta), so tr P = -(r/M) sum_j e^{i th_j} sum_i 1/(T_ii - zeta_j)
  // at O(n) per node, with no matrix inversions.
  cx contour_trace(cx center, double radius, int nodes) const {
    if (nodes < 16) throw ConfigError("riesz: at least 16 quadrature nodes");
    if (radius <= 0.0) throw ConfigError("riesz: radius must be positive");
    check_guard_band(center, radius, nodes);
    const VectorXcd diag = schur_.matrixT().diagonal();
    cx acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double th = two_pi * j / nodes;
      const cx w = std::polar(1.0, th);
      const cx zeta = center + radius * w;
      acc += w * (diag.array() - zeta).inverse().sum();
    }
    return acc * (-radius / nodes);
  }

 private:
  Eigen::ComplexSchur<MatrixXcd> schur_;
};

std::vector<int> inner_columns(const ModeSet& ms, double n_inner) {
  std::vector<int> cols;
  for (int i = 0; i < ms.mode_count(); ++i) {
    if (ms.mode_norm2(i) < n_inner * n_inner) {
      for (int s = 0; s < ms.fibers_per_mode(); ++s) {
        cols.push_back(ms.col(i, s));
      }
    }
  }
  return cols;
}

double power_iteration_radius(const MatrixXcd& a, int iters = 80) {
  if (a.rows() == 0) return 0.0;
  VectorXcd v = VectorXcd::Ones(a.rows()).normalized();
  double rho = 0.0;
  for (int i = 0; i < iters; ++i) {
    VectorXcd w = a * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    rho = nw;
    v = w / nw;
  }
  return rho;
}

// log det(I + B) with the principal branch per LU pivot; returns the complex
// logarithm so callers can track phase increments along contours.
cx logdet(const MatrixXcd& m) {
  Eigen::PartialPivLU<MatrixXcd> lu(m);
  cx ld = 0.0;
  const auto& diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) ld += std::log(diag[i]);
  if (lu.permutationP().determinant() < 0) ld += cx(0.0, two_pi / 2.0);
  return ld;
}

struct SplitParts {
  MatrixXcd g_minus;       // G with inner columns zeroed
  MatrixXcd g_plus_cols;   // n x K: the inner columns of G
  std::vector<int> cols;
};

SplitParts split_propagator(const MatrixXcd& g, const ModeSet& ms,
                            double n_inner) {
  SplitParts sp;
  sp.cols = inner_columns(ms, n_inner);
  if (sp.cols.empty()) {
    throw ConfigError("reduction split: no modes inside n_inner");
  }
  if (g.rows() != ms.dimension() || g.cols() != ms.dimension()) {
    throw ConfigError("reduction split: matrix does not match ModeSet");
  }
  sp.g_minus = g;
  sp.g_plus_cols.resize(g.rows(), static_cast<Eigen::Index>(sp.cols.size()));
  for (size_t j = 0; j < sp.cols.size(); ++j) {
    sp.g_plus_cols.col(static_cast<Eigen::Index>(j)) = g.col(sp.cols[j]);
    sp.g_minus.col(sp.cols[j]).setZero();
  }
  return sp;
}

void check_outside_radius(const SplitParts& sp, cx z) {
  const double rho = power_iteration_radius(sp.g_minus);
  if (std::abs(z) <= rho) {
    std::ostringstream os;
    os << "|z| = " << std::abs(z)
       << " is not above the complement spectral radius estimate " << rho;
    throw NumericalError(os.str());
  }
}

// K x K section I + P (G_minus - z)^{-1} G_plus P and, optionally, the z
// derivative of the inner resolvent block for argument-principle moments.
MatrixXcd reduction_section(const SplitParts& sp, cx z,
                            MatrixXcd* dsection = nullptr) {
  const Eigen::Index n = sp.g_minus.rows();
  const auto K = static_cast<Eigen::Index>(sp.cols.size());
  Eigen::PartialPivLU<MatrixXcd> lu(sp.g_minus -
                                    z * MatrixXcd::Identity(n, n));
  const MatrixXcd x = lu.solve(sp.g_plus_cols);
  MatrixXcd section = MatrixXcd::Identity(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    section.row(i) += x.row(sp.cols[static_cast<size_t>(i)]);
  }
  if (dsection) {
    // d/dz (A - z)^{-1} = (A - z)^{-2}
    const MatrixXcd y = lu.solve(x);
    dsection->resize(K, K);
    for (Eigen::Index i = 0; i < K; ++i) {
      dsection->row(i) = y.row(sp.cols[static_cast<size_t>(i)]);
    }
  }
  return section;
}

}  // namespace

SpectrumResult eigen_decompose(const GalerkinOperator& op) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(op.mat, true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigen_decompose: solver did not converge");
  }
  const auto order = spectral_order(es.eigenvalues());
  const Eigen::Index n = op.mat.rows();
  SpectrumResult r;
  r.eigenvalues.resize(n);
  r.vectors.resize(n, n);
  r.residuals.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int src = order[static_cast<size_t>(j)];
    r.eigenvalues[j] = es.eigenvalues()[src];
    r.vectors.col(j) = es.eigenvectors().col(src).normalized();
    r.residuals[j] =
        (op.mat * r.vectors.col(j) - r.eigenvalues[j] * r.vectors.col(j))
            .norm();
  }
  return r;
}

std::vector<int> unstable_set(const SpectrumResult& s, double mu_hat,
                              double delta) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues[i].real() > mu_hat + delta) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

VectorXcd resolvent_solve(const GalerkinOperator& op, cx zeta,
                          const VectorXcd& rhs) {
  const Eigen::Index n = op.mat.rows();
  if (rhs.size() != n) throw ConfigError("resolvent_solve: rhs size mismatch");
  const MatrixXcd shifted = op.mat - zeta * MatrixXcd::Identity(n, n);
  Eigen::PartialPivLU<MatrixXcd> lu(shifted);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "resolvent shift is numerically singular; estimated distance to "
          "the spectrum ~ "
       << rc * shifted.cwiseAbs().rowwise().sum().maxCoeff();
    throw NumericalError(os.str());
  }
  VectorXcd x = lu.solve(rhs);
  // An exact zero pivot can slip past the condition estimate (the 1-norm
  // estimator returns garbage on exactly singular inputs); it surfaces as
  // non-finite entries in the solve instead.
  if (!x.allFinite()) {
    throw NumericalError(
        "resolvent shift is numerically singular (zero pivot in the "
        "factorization)");
  }
  double rel = (shifted * x - rhs).norm() / rhs.norm();
  if (!(rel <= 1e-10)) {
    x += lu.solve((rhs - shifted * x).eval());  // one refinement step
    rel = (shifted * x - rhs).norm() / rhs.norm();
    if (!(rel <= 1e-10)) {
      throw NumericalError("resolvent_solve: relative residual " +
                           std::to_string(rel) + " exceeds 1e-10");
    }
  }
  return x;
}

RieszProjection riesz_projection(const GalerkinOperator& op, cx center,
                                 double radius, int nodes) {
  return SchurResolvent(op.mat).project(center, radius, nodes);
}

namespace {

int multiplicity_from_trace(cx trace) {
  if (std::abs(trace.imag()) > 1e-6) {
    throw NumericalError("projection trace has imaginary part " +
                         std::to_string(trace.imag()));
  }
  const double re = trace.real();
  const double k = std::round(re);
  if (std::abs(re - k) > 0.05) {
    throw NumericalError("projection trace " + std::to_string(re) +
                         " is not near an integer");
  }
  return static_cast<int>(k);
}

}  // namespace

int multiplicity(const RieszProjection& p) {
  return multiplicity_from_trace(p.trace);
}

double isolation_radius(const SpectrumResult& s, cx lambda0,
                        double cluster_tol) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double d = std::abs(s.eigenvalues[i] - lambda0);
    if (d > cluster_tol) best = std::min(best, d);
  }
  if (!std::isfinite(best)) {
    throw NumericalError("isolation_radius: no spectrally distinct neighbor");
  }
  return best / 2.0;
}

BranchCurve continue_in_viscosity(const SteadyFlow& flow,
                                  std::shared_ptr<const ModeSet> ms,
                                  cx lambda0, double radius,
                                  std::vector<double> eps_grid, int nodes) {
  for (size_t i = 0; i + 1 < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > eps_grid[i + 1])) {
      throw ConfigError("continue_in_viscosity: eps grid must be strictly "
                        "decreasing");
    }
  }
  if (eps_grid.empty() || eps_grid.back() > 0.0) eps_grid.push_back(0.0);
  if (eps_grid.back() < 0.0) {
    throw ConfigError("continue_in_viscosity: eps must be >= 0");
  }

  BranchCurve curve;
  curve.lambda0 = lambda0;
  curve.radius = radius;
  curve.nodes = nodes;

  // Reference projection at eps = 0.  A guard violation here is fatal: the
  // contour itself is invalid, not just one grid point.
  const GalerkinOperator op0 = assemble(flow, ms, 0.0);
  const SchurResolvent schur0(op0.mat);
  const RieszProjection p0 = schur0.project(lambda0, radius, nodes);

  for (const double eps : eps_grid) {
    BranchPoint pt;
    pt.eps = eps;
    const GalerkinOperator op =
        eps == 0.0 ? op0 : assemble(flow, ms, eps);
    const SchurResolvent schur(op.mat);
    const VectorXcd ev = schur.eigenvalues();
    pt.rightmost_re = ev.real().maxCoeff();
    try {
      schur.check_guard_band(lambda0, radius, nodes);
    } catch (const NumericalError&) {
      pt.excluded = true;
      curve.points.push_back(std::move(pt));
      continue;
    }
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev[i] - lambda0) < radius) pt.inside.push_back(ev[i]);
    }
    std::sort(pt.inside.begin(), pt.inside.end(), [&](cx a, cx b) {
      const double da = std::abs(a - lambda0), db = std::abs(b - lambda0);
      if (da != db) return da < db;
      return std::abs(a.imag()) < std::abs(b.imag());
    });
    if (!pt.inside.empty()) {
      pt.has_lambda = true;
      pt.lambda = pt.inside.front();
    }
    // An eigenvalue just past the guard band can leave O(0.1) quadrature
    // error at the base node count.  The node count that resolves the trace
    // to an integer is found from the Schur diagonal alone (O(n) per node);
    // only then is the full projection matrix formed, once, since each node
    // of the matrix quadrature costs a dense triangular inversion.
    int resolved_nodes = 0;
    for (int n = nodes; n <= 512; n *= 4) {
      try {
        pt.mult = multiplicity_from_trace(schur.contour_trace(lambda0,
                                                              radius, n));
      } catch (const NumericalError&) {
        continue;
      }
      resolved_nodes = n;
      break;
    }
    if (resolved_nodes > 0) {
      // The projection matrix is only needed while the contour still
      // encloses spectrum; once the branch has left, P_eps is numerically
      // zero and the distance degenerates to ||P_0||.
      if (pt.has_lambda) {
        const RieszProjection p = schur.project(lambda0, radius,
                                                resolved_nodes);
        pt.proj_dist = operator_two_norm(p.matrix - p0.matrix);
      }
    } else {
      pt.excluded = true;
      pt.has_lambda = false;
      pt.inside.clear();
    }
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

cx reduction_determinant(const MatrixXcd& g, const ModeSet& ms,
                         double n_inner, cx z) {
  const SplitParts sp = split_propagator(g, ms, n_inner);
  check_outside_radius(sp, z);
  return std::exp(logdet(reduction_section(sp, z)));
}

RootCount reduction_roots(const MatrixXcd& g, const ModeSet& ms,
                          double n_inner, cx center, double radius,
                          int nodes) {
  if (nodes < 16) throw ConfigError("reduction_roots: at least 16 nodes");
  const SplitParts sp = split_propagator(g, ms, n_inner);
  check_outside_radius(sp, center + radius);
  check_outside_radius(sp, center - radius);

  std::vector<double> phase(static_cast<size_t>(nodes) + 1);
  cx moment = 0.0;
  double prev_im = 0.0;
  double unwrapped = 0.0;
  for (int j = 0; j <= nodes; ++j) {
    const double th = two_pi * j / nodes;
    const cx w = std::polar(1.0, th);
    const cx z = center + radius * w;
    MatrixXcd dsec;
    const MatrixXcd sec = reduction_section(sp, z, &dsec);
    const cx ld = logdet(sec);
    if (j > 0) {
      double d = ld.imag() - prev_im;
      while (d > two_pi / 2.0) d -= two_pi;
      while (d < -two_pi / 2.0) d += two_pi;
      unwrapped += d;
    }
    prev_im = ld.imag();
    if (j < nodes) {
      // z g'(z)/g(z) integrated by the same trapezoid as the winding
      const cx tr = Eigen::PartialPivLU<MatrixXcd>(sec).solve(dsec).trace();
      moment += w * z * tr;
    }
  }
  RootCount rc;
  const double winding = unwrapped / two_pi;
  rc.count = static_cast<int>(std::llround(winding));
  rc.winding_residual = std::abs(winding - rc.count);
  if (rc.winding_residual > 0.05) {
    throw NumericalError("reduction_roots: winding number " +
                         std::to_string(winding) + " is not near an integer");
  }
  rc.sum = moment * radius / static_cast<double>(nodes);
  return rc;
}

}  // namespace vvspec
