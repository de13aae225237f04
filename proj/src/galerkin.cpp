// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/galerkin.hpp"

namespace vvspec {

namespace {

constexpr int dense_dimension_cap = 5200;

void check_cap(int dim) {
  if (dim > dense_dimension_cap) {
    throw ConfigError("Galerkin dimension " + std::to_string(dim) +
                      " exceeds the dense storage cap (" +
                      std::to_string(dense_dimension_cap) + ")");
  }
}

cx bilinear_dot(const VectorXcd& u, const VectorXi& q) {
  cx s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    s += u[i] * static_cast<double>(q[i]);
  }
  return s;
}

// Shared convolution walk: for every target mode k and flow mode m, couple
// from the source mode q = k - m when q lies in the set.
template <class Emit>
void for_each_coupling(const SteadyFlow& flow, const ModeSet& ms, Emit emit) {
  const int n = ms.dim();
  VectorXi q(n), m(n);
  for (int ki = 0; ki < ms.mode_count(); ++ki) {
    const VectorXi& k = ms.mode(ki);
    for (const auto& [mkey, um] : flow.fourier_coeffs()) {
      for (int i = 0; i < n; ++i) {
        m[i] = mkey[static_cast<size_t>(i)];
        q[i] = k[i] - m[i];
      }
      const int qi = ms.mode_index(q);
      if (qi < 0) continue;  // Galerkin truncation drops this coupling
      emit(ki, k, qi, q, m, um);
    }
  }
}

}  // namespace

MatrixXcd assemble_advection(const SteadyFlow& flow, const ModeSet& ms) {
  check_cap(ms.dimension());
  const int n = ms.dim();
  MatrixXcd a = MatrixXcd::Zero(ms.dimension(), ms.dimension());
  for_each_coupling(flow, ms,
                    [&](int ki, const VectorXi&, int qi, const VectorXi& q,
                        const VectorXi&, const VectorXcd& um) {
                      const cx coef = cx(0, -1) * bilinear_dot(um, q);
                      const MatrixXd& ek = ms.fiber_basis(ki);
                      const MatrixXd& eq = ms.fiber_basis(qi);
                      for (int sp = 0; sp < n - 1; ++sp) {
                        for (int s = 0; s < n - 1; ++s) {
                          a(ms.col(ki, sp), ms.col(qi, s)) +=
                              coef * ek.col(sp).dot(eq.col(s));
                        }
                      }
                    });
  return a;
}

MatrixXcd assemble_stretching(const SteadyFlow& flow, const ModeSet& ms) {
  check_cap(ms.dimension());
  const int n = ms.dim();
  MatrixXcd a = MatrixXcd::Zero(ms.dimension(), ms.dimension());
  for_each_coupling(
      flow, ms,
      [&](int ki, const VectorXi&, int qi, const VectorXi&, const VectorXi& m,
          const VectorXcd& um) {
        const MatrixXd& ek = ms.fiber_basis(ki);
        const MatrixXd& eq = ms.fiber_basis(qi);
        for (int sp = 0; sp < n - 1; ++sp) {
          const cx eu = ek.col(sp).cast<cx>().dot(um);  // e real: plain dot
          for (int s = 0; s < n - 1; ++s) {
            double mq = 0.0;
            for (int i = 0; i < n; ++i) mq += m[i] * eq(i, s);
            a(ms.col(ki, sp), ms.col(qi, s)) += cx(0, -1) * mq * eu;
          }
        }
      });
  return a;
}

GalerkinOperator assemble(const SteadyFlow& flow,
                          std::shared_ptr<const ModeSet> ms, double eps) {
  if (flow.dim() != ms->dim()) {
    throw ConfigError("assemble: flow and ModeSet dimension mismatch");
  }
  if (eps < 0.0) throw ConfigError("assemble: eps must be >= 0");
  GalerkinOperator op;
  op.eps = eps;
  op.flow_name = flow.name();
  op.mat = assemble_advection(flow, *ms) + assemble_stretching(flow, *ms);
  for (int i = 0; i < ms->mode_count(); ++i) {
    const double k2 = ms->mode_norm2(i);
    for (int s = 0; s < ms->fibers_per_mode(); ++s) {
      op.mat(ms->col(i, s), ms->col(i, s)) -= eps * k2;
    }
  }
  op.modes = std::move(ms);
  return op;
}

GalerkinOperator assemble_vorticity_2d(const SteadyFlow& flow,
                                       std::shared_ptr<const ModeSet> ms,
                                       double eps) {
  if (flow.dim() != 2 || ms->dim() != 2) {
    throw ConfigError("assemble_vorticity_2d: 2D only");
  }
  if (eps < 0.0) throw ConfigError("assemble: eps must be >= 0");
  GalerkinOperator op;
  op.eps = eps;
  op.flow_name = flow.name();
  op.form = "vorticity";
  op.mat = MatrixXcd::Zero(ms->mode_count(), ms->mode_count());
  for_each_coupling(
      flow, *ms,
      [&](int ki, const VectorXi&, int qi, const VectorXi& q,
          const VectorXi& m, const VectorXcd& um) {
        // curl of the flow mode: W(m) = i (m1 u2 - m2 u1)
        const cx wm = cx(0, 1) * (static_cast<double>(m[0]) * um[1] -
                                  static_cast<double>(m[1]) * um[0]);
        // advection of w plus transport of the base curl by v = curl^{-1} w
        const double mqperp = -m[0] * q[1] + m[1] * q[0];  // m . q_perp
        op.mat(ki, qi) += cx(0, -1) * bilinear_dot(um, q) -
                          (mqperp / q.cast<double>().squaredNorm()) * wm;
      });
  for (int i = 0; i < ms->mode_count(); ++i) {
    op.mat(i, i) -= eps * ms->mode_norm2(i);
  }
  op.modes = std::move(ms);
  return op;
}

SpectralField apply_operator(const GalerkinOperator& op,
                             const SpectralField& f) {
  if (f.layout != Layout::fiber) {
    throw ConfigError("apply_operator expects fiber layout");
  }
  if (f.coeffs.size() != op.mat.cols()) {
    throw ConfigError("apply_operator: field/operator size mismatch");
  }
  SpectralField out = f;
  out.coeffs = op.mat * f.coeffs;
  return out;
}

}  // namespace vvspec
