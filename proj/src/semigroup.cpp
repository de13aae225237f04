// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace vvspec {

namespace {

// Union-find over coefficient indices.
struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Per-axis tables of e^{i k x_j} on the uniform grid; k is reduced mod pts.
struct PhaseTable {
  int pts;
  VectorXcd roots;
  explicit PhaseTable(int pts_) : pts(pts_), roots(pts_) {
    for (int r = 0; r < pts; ++r) roots[r] = std::polar(1.0, two_pi * r / pts);
  }
  // e^{i k . x(flat)} for the grid point with the given flat index.
  cx at(const TorusGrid& g, const VectorXi& k, int flat) const {
    cx phase = 1.0;
    for (int a = g.dim - 1; a >= 0; --a) {
      const int j = flat % g.pts;
      flat /= g.pts;
      int r = (k[a] % pts) * j % pts;
      if (r < 0) r += pts;
      phase *= roots[r];
    }
    return phase;
  }
};

// Indices of modes whose coefficient block carries relative mass above tol.
std::vector<int> active_modes(const SpectralField& full, double tol) {
  const ModeSet& ms = *full.modes;
  const double scale = full.coeffs.norm();
  std::vector<int> act;
  for (int i = 0; i < ms.mode_count(); ++i) {
    if (full.coeffs.segment(i * ms.dim(), ms.dim()).norm() > tol * scale) {
      act.push_back(i);
    }
  }
  return act;
}

void check_grid_rule(const ModeSet& ms, int grid_pts) {
  if (grid_pts % 2 == 0 || grid_pts < 4 * ms.cutoff() + 1) {
    throw ConfigError("grid must be odd and at least 4 * cutoff + 1 points "
                      "per axis, got " + std::to_string(grid_pts));
  }
}

using PerMode = std::pair<std::vector<MatrixXd>, std::vector<double>>;

// Amplitude fundamental matrix and |xi|^2 quadrature for one lattice mode,
// seeded at every row of pts_mat.
PerMode trace_mode(const SteadyFlow& flow, const VectorXi& k, double t,
                   const MatrixXd& pts_mat, double tol) {
  const int n = flow.dim();
  PerMode out;
  out.first.reserve(static_cast<size_t>(pts_mat.rows()));
  out.second.reserve(static_cast<size_t>(pts_mat.rows()));
  const VectorXcd b0 = VectorXcd::Zero(n);
  for (int j = 0; j < pts_mat.rows(); ++j) {
    const RayResult ray = integrate_ray(flow, pts_mat.row(j).transpose(),
                                        k.cast<double>(), b0, t, tol, 1);
    out.first.push_back(ray.fundamental);
    out.second.push_back(ray.xi_quad);
  }
  return out;
}

std::vector<int> key_of(const VectorXi& k) {
  return std::vector<int>(k.data(), k.data() + k.size());
}

}  // namespace

int Propagator::dimension() const {
  int d = 0;
  for (const auto& c : component_cols) d += static_cast<int>(c.size());
  return d;
}

VectorXcd Propagator::apply(const VectorXcd& fiber_coeffs) const {
  if (fiber_coeffs.size() != dimension()) {
    throw ConfigError("Propagator::apply: coefficient length mismatch");
  }
  VectorXcd out = VectorXcd::Zero(fiber_coeffs.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& cols = component_cols[b];
    VectorXcd sub(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) sub[i] = fiber_coeffs[cols[i]];
    const VectorXcd res = blocks[b] * sub;
    for (size_t i = 0; i < cols.size(); ++i) out[cols[i]] = res[i];
  }
  return out;
}

SpectralField Propagator::apply(const SpectralField& f) const {
  if (f.layout != Layout::fiber) {
    throw ConfigError("Propagator::apply: field must be in fiber layout");
  }
  SpectralField out = f;
  out.coeffs = apply(f.coeffs);
  return out;
}

MatrixXcd Propagator::dense() const {
  const int n = dimension();
  MatrixXcd g = MatrixXcd::Zero(n, n);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& cols = component_cols[b];
    for (size_t i = 0; i < cols.size(); ++i) {
      for (size_t j = 0; j < cols.size(); ++j) {
        g(cols[i], cols[j]) = blocks[b](i, j);
      }
    }
  }
  return g;
}

VectorXcd Propagator::eigenvalues() const {
  std::vector<cx> all;
  for (const auto& blk : blocks) {
    Eigen::ComplexSchur<MatrixXcd> schur(blk, false);
    if (schur.info() != Eigen::Success) {
      throw NumericalError("Schur decomposition of a propagator block failed");
    }
    for (int i = 0; i < blk.rows(); ++i) all.push_back(schur.matrixT()(i, i));
  }
  std::sort(all.begin(), all.end(), [](cx a, cx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  return Eigen::Map<const VectorXcd>(all.data(), static_cast<int>(all.size()));
}

Propagator propagator(const GalerkinOperator& op, double t) {
  const int n = op.dimension();
  DisjointSets ds(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (op.mat(i, j) != 0.0 || op.mat(j, i) != 0.0) ds.unite(i, j);
    }
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[ds.find(i)].push_back(i);

  Propagator prop;
  prop.modes = op.modes;
  prop.t = t;
  prop.eps = op.eps;
  prop.flow_name = op.flow_name;
  for (auto& [root, cols] : groups) {
    const int m = static_cast<int>(cols.size());
    MatrixXcd sub(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) sub(i, j) = op.mat(cols[i], cols[j]);
    }
    // Gershgorin bound on Re(spectrum) guards the exponential against
    // overflow; the error names the number of legs t must be split into.
    double bound = 0.0;
    for (int i = 0; i < m; ++i) {
      double row = sub(i, i).real();
      for (int j = 0; j < m; ++j) {
        if (j != i) row += std::abs(sub(i, j));
      }
      bound = std::max(bound, row);
    }
    if (t * bound > 700.0) {
      throw NumericalError(
          "propagator: exp(" + std::to_string(t * bound) +
          ") overflows; split t into " +
          std::to_string(static_cast<long>(std::ceil(t * bound / 700.0))) +
          " legs");
    }
    prop.component_cols.push_back(cols);
    prop.blocks.push_back((t * sub).exp());
  }
  return prop;
}

int default_grid_pts(const ModeSet& ms) { return 4 * ms.cutoff() + 1; }

SpectralField apply_pdo(const SymbolFn& sigma, const SpectralField& f,
                        int grid_pts, double active_tol) {
  const SpectralField full = fiber_to_full(f);
  const ModeSet& ms = *full.modes;
  check_grid_rule(ms, grid_pts);
  const TorusGrid g(ms.dim(), grid_pts);
  const PhaseTable phases(grid_pts);

  MatrixXcd vals = MatrixXcd::Zero(g.total(), g.dim);
  for (int i : active_modes(full, active_tol)) {
    const VectorXi k = ms.mode(i);
    const VectorXcd fk = full.coeffs.segment(i * g.dim, g.dim);
    for (int j = 0; j < g.total(); ++j) {
      const MatrixXcd s = sigma(g.point(j), k);
      if (s.rows() != g.dim || s.cols() != g.dim) {
        throw ConfigError("apply_pdo: symbol must return a dim x dim matrix");
      }
      vals.row(j) += (phases.at(g, k, j) * (s * fk)).transpose();
    }
  }
  return grid_to_field(g, vals, full.modes);
}

void RayCache::require(const SteadyFlow& flow, double t_, int grid_pts_,
                       double tol) {
  if (flow_name == flow.name() && t == t_ && grid_pts == grid_pts_ &&
      ode_tol == tol) {
    return;
  }
  forward.clear();
  pulled_back.clear();
  have_backward_map = false;
  flow_name = flow.name();
  t = t_;
  grid_pts = grid_pts_;
  ode_tol = tol;
}

SpectralField apply_transported(const SteadyFlow& flow, double eps, double t,
                                const SpectralField& f, int grid_pts,
                                RayCache* cache, double ode_tol) {
  if (eps < 0.0) throw ConfigError("apply_transported: eps must be >= 0");
  const SpectralField full = fiber_to_full(f);
  const ModeSet& ms = *full.modes;
  if (ms.dim() != flow.dim()) {
    throw ConfigError("apply_transported: flow and field dimensions differ");
  }
  check_grid_rule(ms, grid_pts);
  const TorusGrid g(ms.dim(), grid_pts);
  const PhaseTable phases(grid_pts);

  RayCache local;
  RayCache& rc = cache ? *cache : local;
  rc.require(flow, t, grid_pts, ode_tol);

  MatrixXd grid_points(g.total(), g.dim);
  for (int j = 0; j < g.total(); ++j) {
    grid_points.row(j) = g.point(j).transpose();
  }

  // Amplitude transport and viscous damping, mode by mode.
  MatrixXcd vals = MatrixXcd::Zero(g.total(), g.dim);
  for (int i : active_modes(full, 1e-13)) {
    const VectorXi k = ms.mode(i);
    auto it = rc.forward.find(key_of(k));
    if (it == rc.forward.end()) {
      it = rc.forward.emplace(key_of(k), trace_mode(flow, k, t, grid_points,
                                                    ode_tol)).first;
    }
    const VectorXcd fk = full.coeffs.segment(i * g.dim, g.dim);
    for (int j = 0; j < g.total(); ++j) {
      const cx damp = std::exp(cx(-eps * it->second.second[j], 0.0));
      vals.row(j) += (phases.at(g, k, j) * damp *
                      (it->second.first[j].cast<cx>() * fk)).transpose();
    }
  }

  // Composition with the backward flow map via off-grid Fourier evaluation.
  if (!rc.have_backward_map) {
    rc.backward_points.resize(g.total(), g.dim);
    for (int j = 0; j < g.total(); ++j) {
      rc.backward_points.row(j) =
          integrate_flow_map(flow, grid_points.row(j).transpose(), -t, ode_tol)
              .x_t.transpose();
    }
    rc.have_backward_map = true;
  }
  MatrixXcd composed(g.total(), g.dim);
  for (int c = 0; c < g.dim; ++c) {
    const VectorXcd cube = grid_to_cube(g, vals.col(c));
    const double frac = top_third_energy_fraction(g, cube);
    if (frac > 1e-6) {
      throw NumericalError(
          "aliasing sentinel: transported amplitude spills " +
          std::to_string(frac) + " of its energy into the top third");
    }
    composed.col(c) = cube_eval_at(g, cube, rc.backward_points);
  }
  return full_to_fiber(project_div_free(grid_to_field(g, composed, full.modes)));
}

WavePacket make_wave_packet(std::shared_ptr<const ModeSet> ms,
                            const VectorXd& xi0, double delta) {
  const int n = ms->dim();
  if (xi0.size() != n) {
    throw ConfigError("make_wave_packet: xi0 dimension mismatch");
  }
  if (delta <= 0.0 || std::abs(1.0 / delta - std::llround(1.0 / delta)) > 1e-9) {
    throw ConfigError("make_wave_packet: 1/delta must be a positive integer");
  }
  VectorXi carrier(n);
  for (int a = 0; a < n; ++a) {
    const double c = xi0[a] / delta;
    carrier[a] = static_cast<int>(std::llround(c));
    if (std::abs(c - carrier[a]) > 1e-9) {
      throw ConfigError("make_wave_packet: xi0/delta is not a lattice vector");
    }
  }
  const int ci = ms->mode_index(carrier);
  if (ci < 0) {
    throw ConfigError("make_wave_packet: carrier mode outside the ModeSet");
  }
  if (ms->cutoff() < 2 * carrier.cwiseAbs().maxCoeff()) {
    throw ConfigError("make_wave_packet: cutoff below 2x carrier headroom");
  }

  // Fixed smooth envelope of bandwidth 1 with nonuniform modulation:
  // s(x) = 1 + cos(x_1)/2 + sin(x_2)/4.
  std::vector<std::pair<VectorXi, cx>> envelope;
  envelope.emplace_back(VectorXi::Zero(n), cx(1.0, 0.0));
  VectorXi e1 = VectorXi::Zero(n);
  e1[0] = 1;
  envelope.emplace_back(e1, cx(0.25, 0.0));
  envelope.emplace_back(-e1, cx(0.25, 0.0));
  VectorXi e2 = VectorXi::Zero(n);
  e2[1] = 1;
  envelope.emplace_back(e2, cx(0.0, -0.125));
  envelope.emplace_back(-e2, cx(0.0, 0.125));

  const VectorXcd dir = ms->fiber_basis(ci).col(0).cast<cx>();
  SpectralField f = make_zero_field(ms, Layout::full);
  for (const auto& [m, s] : envelope) {
    const VectorXi k = carrier + m;
    const int idx = ms->mode_index(k);
    if (idx < 0) {
      throw ConfigError("make_wave_packet: envelope sideband escapes ModeSet");
    }
    f.coeffs.segment(idx * n, n) += s * dir;
  }
  WavePacket packet;
  packet.delta = delta;
  packet.carrier = carrier;
  packet.field = project_div_free(f);
  return packet;
}

double packet_residual_asym(const SteadyFlow& flow, double t,
                            const WavePacket& packet, int grid_pts,
                            const Propagator& prop0, RayCache* cache,
                            double ode_tol) {
  const ModeSet& ms = *packet.field.modes;
  check_grid_rule(ms, grid_pts);
  if (prop0.eps != 0.0) {
    throw ConfigError("packet_residual_asym: prop0 must be inviscid");
  }
  const TorusGrid g(ms.dim(), grid_pts);
  RayCache local;
  RayCache& rc = cache ? *cache : local;
  rc.require(flow, t, grid_pts, ode_tol);

  const SpectralField f_fiber = full_to_fiber(packet.field);
  if (f_fiber.coeffs.norm() == 0.0) {
    throw ConfigError("packet_residual_asym: zero packet");
  }
  const SpectralField evolved0 = fiber_to_full(prop0.apply(f_fiber));
  const MatrixXcd actual_vals = field_to_grid(g, evolved0);

  if (!rc.have_backward_map) {
    rc.backward_points.resize(g.total(), g.dim);
    for (int j = 0; j < g.total(); ++j) {
      rc.backward_points.row(j) =
          integrate_flow_map(flow, g.point(j), -t, ode_tol).x_t.transpose();
    }
    rc.have_backward_map = true;
  }
  auto it = rc.pulled_back.find(key_of(packet.carrier));
  if (it == rc.pulled_back.end()) {
    it = rc.pulled_back.emplace(key_of(packet.carrier),
                                trace_mode(flow, packet.carrier, t,
                                           rc.backward_points, ode_tol)).first;
  }
  const MatrixXcd f_vals = field_to_grid(g, packet.field);
  MatrixXcd f_at_y(g.total(), g.dim);
  for (int c = 0; c < g.dim; ++c) {
    f_at_y.col(c) = cube_eval_at(g, grid_to_cube(g, f_vals.col(c)),
                                 rc.backward_points);
  }
  MatrixXcd leading(g.total(), g.dim);
  for (int j = 0; j < g.total(); ++j) {
    leading.row(j) =
        (it->second.first[j].cast<cx>() * f_at_y.row(j).transpose())
            .transpose();
  }
  return (actual_vals - leading).norm() / f_vals.norm();
}

double packet_residual_decomp(const SteadyFlow& flow, double t,
                              const WavePacket& packet, int grid_pts,
                              const Propagator& prop_eps, RayCache* cache,
                              double ode_tol) {
  const SpectralField f_fiber = full_to_fiber(packet.field);
  const double f_norm = f_fiber.coeffs.norm();
  if (f_norm == 0.0) throw ConfigError("packet_residual_decomp: zero packet");
  const SpectralField transported = apply_transported(
      flow, prop_eps.eps, t, packet.field, grid_pts, cache, ode_tol);
  return (prop_eps.apply(f_fiber.coeffs) - transported.coeffs).norm() / f_norm;
}

PacketResidual packet_residual(const SteadyFlow& flow, double t,
                               const WavePacket& packet, double eps,
                               int grid_pts, RayCache* cache, double ode_tol) {
  RayCache local;
  RayCache& rc = cache ? *cache : local;
  const Propagator prop_eps =
      propagator(assemble(flow, packet.field.modes, eps), t);
  PacketResidual res;
  res.r_decomp = packet_residual_decomp(flow, t, packet, grid_pts, prop_eps,
                                        &rc, ode_tol);
  const Propagator prop0 =
      eps == 0.0 ? prop_eps
                 : propagator(assemble(flow, packet.field.modes, 0.0), t);
  res.r_asym =
      packet_residual_asym(flow, t, packet, grid_pts, prop0, &rc, ode_tol);
  return res;
}

std::vector<PacketSweepRow> packet_sweep(const SteadyFlow& flow, double t,
                                         const std::vector<double>& deltas,
                                         const std::vector<double>& eps_list,
                                         const VectorXd& xi0, double ode_tol) {
  std::vector<PacketSweepRow> rows;
  for (double delta : deltas) {
    // Size the ModeSet by the headroom rule for this carrier.
    int cmax = 0;
    for (int a = 0; a < xi0.size(); ++a) {
      cmax = std::max(cmax,
                      static_cast<int>(std::llround(std::abs(xi0[a]) / delta)));
    }
    const int cutoff = 2 * cmax + 2;
    auto ms = std::make_shared<const ModeSet>(static_cast<int>(xi0.size()),
                                              cutoff);
    const WavePacket packet = make_wave_packet(ms, xi0, delta);
    const int grid_pts = default_grid_pts(*ms);
    RayCache cache;
    const Propagator prop0 = propagator(assemble(flow, ms, 0.0), t);
    const double r_asym = packet_residual_asym(flow, t, packet, grid_pts,
                                               prop0, &cache, ode_tol);
    for (double eps : eps_list) {
      const Propagator prop_eps =
          eps == 0.0 ? prop0 : propagator(assemble(flow, ms, eps), t);
      const double r_decomp = packet_residual_decomp(
          flow, t, packet, grid_pts, prop_eps, &cache, ode_tol);
      rows.push_back({delta, eps, r_asym, r_decomp});
    }
  }
  return rows;
}

DecompFit fit_decomp_model(const std::vector<PacketSweepRow>& rows) {
  if (rows.size() < 3) {
    throw ConfigError("fit_decomp_model: needs at least 3 rows");
  }
  const int n = static_cast<int>(rows.size());
  MatrixXd x(n, 2);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rows[i].delta;
    x(i, 1) = std::sqrt(rows[i].eps);
    y[i] = rows[i].r_decomp;
  }
  const VectorXd beta = x.colPivHouseholderQr().solve(y);
  const double ss_res = (y - x * beta).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  DecompFit fit;
  fit.c_delta = beta[0];
  fit.c_sqrteps = beta[1];
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::vector<EssentialRadiusRow> essential_radius_diagnostic(
    const SteadyFlow& flow, const std::vector<int>& cutoffs, double t,
    double mu, double delta, double axis_band) {
  if (cutoffs.empty()) {
    throw ConfigError("essential_radius_diagnostic: no cutoffs");
  }
  for (size_t i = 1; i < cutoffs.size(); ++i) {
    if (cutoffs[i] <= cutoffs[i - 1]) {
      throw ConfigError("essential_radius_diagnostic: cutoffs must ascend");
    }
  }
  const auto ms_max =
      std::make_shared<const ModeSet>(flow.dim(), cutoffs.back());
  const Propagator prop = propagator(assemble(flow, ms_max, 0.0), t);
  const MatrixXcd g_full = prop.dense();

  std::vector<EssentialRadiusRow> rows;
  for (int n : cutoffs) {
    EssentialRadiusRow row;
    row.cutoff = n;

    const auto ms = std::make_shared<const ModeSet>(flow.dim(), n);
    const GalerkinOperator op = assemble(flow, ms, 0.0);
    Eigen::ComplexSchur<MatrixXcd> schur(op.mat, false);
    if (schur.info() != Eigen::Success) {
      throw NumericalError("Schur decomposition failed at cutoff " +
                           std::to_string(n));
    }
    for (int i = 0; i < op.dimension(); ++i) {
      const double re = schur.matrixT()(i, i).real();
      if (re > mu + delta) ++row.count_above;
      if (std::abs(re) <= axis_band) ++row.count_near_axis;
    }

    // Compression of the largest-cutoff propagator onto modes outside the
    // Euclidean ball |k| < n.
    std::vector<int> outside;
    for (int c = 0; c < ms_max->dimension(); ++c) {
      const auto [mi, slot] = ms_max->mode_of_col(c);
      (void)slot;
      if (ms_max->mode_norm2(mi) >= static_cast<double>(n) * n) {
        outside.push_back(c);
      }
    }
    row.complement_growth = 0.0;
    if (!outside.empty()) {
      MatrixXcd gcc(outside.size(), outside.size());
      for (size_t i = 0; i < outside.size(); ++i) {
        for (size_t j = 0; j < outside.size(); ++j) {
          gcc(i, j) = g_full(outside[i], outside[j]);
        }
      }
      Eigen::ComplexSchur<MatrixXcd> cs(gcc, false);
      if (cs.info() != Eigen::Success) {
        throw NumericalError("Schur decomposition of the complement failed");
      }
      for (int i = 0; i < gcc.rows(); ++i) {
        row.complement_growth =
            std::max(row.complement_growth, std::abs(cs.matrixT()(i, i)));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace vvspec
