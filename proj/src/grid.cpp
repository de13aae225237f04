// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/grid.hpp"

namespace vvspec {

namespace {

// DFT matrices for one axis.  fwd(k, j) = e^{-i k x_j} / pts maps samples to
// coefficients over k = -h .. h (stored shifted by +h); bwd is its inverse.
MatrixXcd axis_forward(int pts) {
  const int h = (pts - 1) / 2;
  MatrixXcd f(pts, pts);
  for (int k = -h; k <= h; ++k) {
    for (int j = 0; j < pts; ++j) {
      f(k + h, j) = std::polar(1.0 / pts, -two_pi * k * j / pts);
    }
  }
  return f;
}

MatrixXcd axis_backward(int pts) {
  const int h = (pts - 1) / 2;
  MatrixXcd b(pts, pts);
  for (int j = 0; j < pts; ++j) {
    for (int k = -h; k <= h; ++k) {
      b(j, k + h) = std::polar(1.0, two_pi * k * j / pts);
    }
  }
  return b;
}

// Apply a pts x pts matrix along one axis of the flattened tensor.
VectorXcd transform_axis(const VectorXcd& data, int pre, int pts, int post,
                         const MatrixXcd& m) {
  VectorXcd out(data.size());
  VectorXcd slice(pts), res(pts);
  for (int p = 0; p < pre; ++p) {
    for (int q = 0; q < post; ++q) {
      const int base = p * pts * post + q;
      for (int j = 0; j < pts; ++j) slice[j] = data[base + j * post];
      res.noalias() = m * slice;
      for (int j = 0; j < pts; ++j) out[base + j * post] = res[j];
    }
  }
  return out;
}

VectorXcd transform_all(const TorusGrid& g, const VectorXcd& data,
                        const MatrixXcd& m) {
  if (g.dim == 2) {
    // x1 varies slowest: rows are x1, columns x2.
    Eigen::Map<const MatrixXcd> s(data.data(), g.pts, g.pts);
    // map is column-major, so s(i, j) = data[i + j*pts] = value at
    // (x2 index i, x1 index j); transform both axes symmetrically.
    MatrixXcd r = m * s * m.transpose();
    return Eigen::Map<const VectorXcd>(r.data(), r.size());
  }
  VectorXcd out = data;
  int pre = 1, post = g.pts * g.pts;
  for (int axis = 0; axis < 3; ++axis) {
    out = transform_axis(out, pre, g.pts, post, m);
    pre *= g.pts;
    post /= g.pts;
  }
  return out;
}

}  // namespace

TorusGrid::TorusGrid(int dim_, int pts_) : dim(dim_), pts(pts_) {
  if (dim != 2 && dim != 3) throw ConfigError("TorusGrid: dim must be 2 or 3");
  if (pts < 3 || pts % 2 == 0) {
    throw ConfigError("TorusGrid: pts must be odd and >= 3");
  }
}

int TorusGrid::total() const {
  int t = 1;
  for (int i = 0; i < dim; ++i) t *= pts;
  return t;
}

VectorXd TorusGrid::point(int flat) const {
  VectorXd x(dim);
  for (int a = dim - 1; a >= 0; --a) {
    x[a] = two_pi * (flat % pts) / pts;
    flat /= pts;
  }
  return x;
}

int TorusGrid::flat(const VectorXi& j) const {
  int f = 0;
  for (int a = 0; a < dim; ++a) f = f * pts + j[a];
  return f;
}

VectorXcd grid_to_cube(const TorusGrid& g, const VectorXcd& samples) {
  if (samples.size() != g.total()) {
    throw ConfigError("grid_to_cube: sample count mismatch");
  }
  return transform_all(g, samples, axis_forward(g.pts));
}

VectorXcd cube_to_grid(const TorusGrid& g, const VectorXcd& cube) {
  if (cube.size() != g.total()) {
    throw ConfigError("cube_to_grid: coefficient count mismatch");
  }
  return transform_all(g, cube, axis_backward(g.pts));
}

int cube_index(const TorusGrid& g, const VectorXi& k) {
  const int h = g.half();
  int idx = 0;
  for (int a = 0; a < g.dim; ++a) {
    if (std::abs(k[a]) > h) return -1;
    idx = idx * g.pts + (k[a] + h);
  }
  return idx;
}

VectorXi cube_mode(const TorusGrid& g, int idx) {
  const int h = g.half();
  VectorXi k(g.dim);
  for (int a = g.dim - 1; a >= 0; --a) {
    k[a] = idx % g.pts - h;
    idx /= g.pts;
  }
  return k;
}

VectorXcd cube_eval_at(const TorusGrid& g, const VectorXcd& cube,
                       const MatrixXd& pts_mat) {
  const int h = g.half();
  const auto npts = static_cast<int>(pts_mat.rows());
  VectorXcd out = VectorXcd::Zero(npts);
  if (g.dim == 2) {
    // Phase matrices Z_a(k+h, p) = e^{i k y_a(p)} built by recurrence.
    MatrixXcd z1(g.pts, npts), z2(g.pts, npts);
    for (int p = 0; p < npts; ++p) {
      const cx e1 = std::polar(1.0, pts_mat(p, 0));
      const cx e2 = std::polar(1.0, pts_mat(p, 1));
      z1(h, p) = 1.0;
      z2(h, p) = 1.0;
      for (int k = 1; k <= h; ++k) {
        z1(h + k, p) = z1(h + k - 1, p) * e1;
        z1(h - k, p) = std::conj(z1(h + k, p));
        z2(h + k, p) = z2(h + k - 1, p) * e2;
        z2(h - k, p) = std::conj(z2(h + k, p));
      }
    }
    Eigen::Map<const MatrixXcd> c(cube.data(), g.pts, g.pts);
    // c is column-major: c(i2, i1) holds mode (k1 = i1-h, k2 = i2-h).
    const MatrixXcd tmp = c.transpose() * z2;  // (k1, p)
    out = (z1.cwiseProduct(tmp)).colwise().sum().transpose();
    return out;
  }
  for (int p = 0; p < npts; ++p) {
    std::array<VectorXcd, 3> z;
    for (int a = 0; a < 3; ++a) {
      z[a].resize(g.pts);
      const cx e = std::polar(1.0, pts_mat(p, a));
      z[a][h] = 1.0;
      for (int k = 1; k <= h; ++k) {
        z[a][h + k] = z[a][h + k - 1] * e;
        z[a][h - k] = std::conj(z[a][h + k]);
      }
    }
    cx acc = 0.0;
    for (int i = 0; i < cube.size(); ++i) {
      const VectorXi k = cube_mode(g, i);
      acc += cube[i] * z[0][k[0] + h] * z[1][k[1] + h] * z[2][k[2] + h];
    }
    out[p] = acc;
  }
  return out;
}

double top_third_energy_fraction(const TorusGrid& g, const VectorXcd& cube) {
  const int h = g.half();
  const int edge = (2 * h) / 3;
  double top = 0.0, total = 0.0;
  for (int i = 0; i < cube.size(); ++i) {
    const double e = std::norm(cube[i]);
    total += e;
    if (cube_mode(g, i).cwiseAbs().maxCoeff() > edge) top += e;
  }
  return total > 0.0 ? top / total : 0.0;
}

MatrixXcd field_to_grid(const TorusGrid& g, const SpectralField& f) {
  const SpectralField full = fiber_to_full(f);
  const ModeSet& ms = *full.modes;
  if (ms.dim() != g.dim || ms.cutoff() > g.half()) {
    throw ConfigError("field_to_grid: grid cannot represent the ModeSet");
  }
  MatrixXcd out(g.total(), g.dim);
  VectorXcd cube(g.total());
  for (int c = 0; c < g.dim; ++c) {
    cube.setZero();
    for (int i = 0; i < ms.mode_count(); ++i) {
      cube[cube_index(g, ms.mode(i))] = full.coeffs[i * g.dim + c];
    }
    out.col(c) = cube_to_grid(g, cube);
  }
  return out;
}

SpectralField grid_to_field(const TorusGrid& g, const MatrixXcd& samples,
                            std::shared_ptr<const ModeSet> ms,
                            double alias_tol) {
  if (ms->dim() != g.dim || ms->cutoff() > g.half()) {
    throw ConfigError("grid_to_field: grid cannot represent the ModeSet");
  }
  if (samples.rows() != g.total() || samples.cols() != g.dim) {
    throw ConfigError("grid_to_field: sample matrix shape mismatch");
  }
  SpectralField out = make_zero_field(ms, Layout::full);
  for (int c = 0; c < g.dim; ++c) {
    const VectorXcd cube = grid_to_cube(g, samples.col(c));
    const double frac = top_third_energy_fraction(g, cube);
    if (frac > alias_tol) {
      throw NumericalError(
          "aliasing sentinel: top-third spectral energy fraction " +
          std::to_string(frac) + " exceeds " + std::to_string(alias_tol));
    }
    for (int i = 0; i < ms->mode_count(); ++i) {
      out.coeffs[i * g.dim + c] = cube[cube_index(g, ms->mode(i))];
    }
  }
  return out;
}

}  // namespace vvspec
