// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/cocycle.hpp"

#include <cmath>
#include <random>

#include "vvspec/ode.hpp"

namespace vvspec {

namespace {

// State layout: [x (n), xi (n), B (n*n), q (1)].
int ray_state_size(int n) { return 2 * n + n * n + 1; }

VectorXd ray_rhs(const SteadyFlow& flow, const VectorXd& v) {
  const int n = flow.dim();
  VectorXd dv(v.size());
  const VectorXd x = v.head(n);
  const VectorXd xi = v.segment(n, n);
  Eigen::Map<const MatrixXd> B(v.data() + 2 * n, n, n);
  const MatrixXd du = flow.grad(x);
  dv.head(n) = flow.velocity(x);
  dv.segment(n, n) = -du.transpose() * xi;
  const MatrixXd a0 =
      (2.0 * xi * xi.transpose() / xi.squaredNorm() - MatrixXd::Identity(n, n)) *
      du;
  Eigen::Map<MatrixXd>(dv.data() + 2 * n, n, n) = a0 * B;
  dv[2 * n + n * n] = xi.squaredNorm();
  return dv;
}

VectorXd pack_ray(const VectorXd& x, const VectorXd& xi) {
  const int n = static_cast<int>(x.size());
  VectorXd v = VectorXd::Zero(ray_state_size(n));
  v.head(n) = x;
  v.segment(n, n) = xi;
  Eigen::Map<MatrixXd>(v.data() + 2 * n, n, n) = MatrixXd::Identity(n, n);
  return v;
}

double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

// Box-Muller on raw 64-bit draws: deterministic across standard libraries,
// unlike std::normal_distribution.
double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Least-squares slope of (t_i, y_i).
double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const size_t n = t.size();
  double tm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (t[i] - tm) * (y[i] - ym);
    den += (t[i] - tm) * (t[i] - tm);
  }
  return num / den;
}

}  // namespace

MatrixXd amplitude_symbol(const SteadyFlow& flow, const VectorXd& x,
                          const VectorXd& xi) {
  const int n = flow.dim();
  if (xi.squaredNorm() == 0.0) {
    throw ConfigError("amplitude_symbol: xi must be nonzero");
  }
  return (2.0 * xi * xi.transpose() / xi.squaredNorm() -
          MatrixXd::Identity(n, n)) *
         flow.grad(x);
}

RayResult integrate_ray(const SteadyFlow& flow, const VectorXd& x0,
                        const VectorXd& xi0, const VectorXcd& b0, double t,
                        double tol, int checkpoints) {
  const int n = flow.dim();
  if (xi0.squaredNorm() == 0.0) {
    throw ConfigError("integrate_ray: xi0 must be nonzero");
  }
  if (x0.size() != n || xi0.size() != n || b0.size() != n) {
    throw ConfigError("integrate_ray: state dimension mismatch");
  }
  if (checkpoints < 1) checkpoints = 1;

  RayResult out;
  VectorXd v = pack_ray(x0, xi0);
  auto rhs = [&flow](const VectorXd& s, double) { return ray_rhs(flow, s); };
  auto record = [&](double tc) {
    CocycleState cs;
    cs.x = v.head(n);
    cs.xi = v.segment(n, n);
    cs.b = Eigen::Map<const MatrixXd>(v.data() + 2 * n, n, n).cast<cx>() * b0;
    cs.t = tc;
    out.path.push_back(std::move(cs));
  };
  record(0.0);
  for (int i = 1; i <= checkpoints; ++i) {
    const double t_prev = t * (i - 1) / checkpoints;
    const double t_cur = t * i / checkpoints;
    ode::integrate(rhs, v, t_prev, t_cur, tol);
    record(t_cur);
  }
  out.fundamental = Eigen::Map<const MatrixXd>(v.data() + 2 * n, n, n);
  out.xi_quad = v[2 * n + n * n];
  return out;
}

double viscous_damping(const SteadyFlow& flow, const VectorXd& x0,
                       const VectorXd& xi0, double t, double eps, double tol) {
  if (eps < 0.0) throw ConfigError("viscous_damping: eps must be >= 0");
  const RayResult r = integrate_ray(flow, x0, xi0,
                                    VectorXcd::Zero(flow.dim()), t, tol, 1);
  return std::exp(-eps * r.xi_quad);
}

LyapunovEstimate lyapunov_exponent(const SteadyFlow& flow,
                                   const LyapunovParams& params) {
  const int n = flow.dim();
  if (params.samples < 1) throw ConfigError("lyapunov: samples must be >= 1");
  if (params.renorm_dt <= 0.0 || params.horizon < 2.0 * params.renorm_dt) {
    throw ConfigError("lyapunov: horizon must cover several renormalizations");
  }
  const int segs =
      std::max(2, static_cast<int>(std::llround(params.horizon /
                                                params.renorm_dt)));

  std::mt19937_64 rng(params.seed);
  LyapunovEstimate est;
  est.weight_m = params.weight_m;
  est.samples = params.samples;
  est.horizon = segs * params.renorm_dt;

  for (int s = 0; s < params.samples; ++s) {
    VectorXd x0(n), xi0(n);
    for (int i = 0; i < n; ++i) x0[i] = two_pi * uniform01(rng);
    do {
      for (int i = 0; i < n; ++i) xi0[i] = gaussian(rng);
    } while (xi0.norm() < 1e-8);
    xi0.normalize();

    // Orthonormal frame of F(xi0) used as amplitude seeds.
    MatrixXd frame(n, n - 1);
    if (n == 2) {
      frame.col(0) << -xi0[1], xi0[0];
    } else {
      int a = 0;
      for (int i = 1; i < 3; ++i) {
        if (std::abs(xi0[i]) < std::abs(xi0[a])) a = i;
      }
      VectorXd f1 = VectorXd::Unit(3, a);
      f1 -= f1.dot(xi0) * xi0;
      f1.normalize();
      frame.col(0) = f1;
      frame.col(1) << xi0[1] * f1[2] - xi0[2] * f1[1],
          xi0[2] * f1[0] - xi0[0] * f1[2], xi0[0] * f1[1] - xi0[1] * f1[0];
    }

    double best = -std::numeric_limits<double>::infinity();
    for (int fcol = 0; fcol < n - 1; ++fcol) {
      VectorXd x = x0;
      VectorXd xi = xi0;
      VectorXd w = frame.col(fcol);
      double log_b = 0.0, log_xi = 0.0;
      std::vector<double> ts, ys;
      ts.reserve(segs);
      ys.reserve(segs);
      auto rhs = [&flow](const VectorXd& v, double) {
        return ray_rhs(flow, v);
      };
      for (int j = 1; j <= segs; ++j) {
        VectorXd v = pack_ray(x, xi);
        ode::integrate(rhs, v, 0.0, params.renorm_dt, params.ode_tol);
        x = v.head(n);
        xi = v.segment(n, n);
        Eigen::Map<const MatrixXd> B(v.data() + 2 * n, n, n);
        w = B * w;
        log_b += std::log(w.norm());
        w.normalize();
        log_xi += std::log(xi.norm());
        xi.normalize();
        ts.push_back(j * params.renorm_dt);
        ys.push_back(log_b + params.weight_m * log_xi);
      }
      const size_t half = ts.size() / 2;
      std::vector<double> t2(ts.begin() + half, ts.end());
      std::vector<double> y2(ys.begin() + half, ys.end());
      best = std::max(best, fit_slope(t2, y2));
    }
    est.per_sample.push_back({x0, xi0, best});
  }

  est.mu = est.per_sample[0].rate;
  for (const auto& r : est.per_sample) est.mu = std::max(est.mu, r.rate);

  std::vector<double> rates;
  rates.reserve(est.per_sample.size());
  for (const auto& r : est.per_sample) rates.push_back(r.rate);
  std::sort(rates.rbegin(), rates.rend());
  const size_t decile = std::max<size_t>(1, rates.size() / 10);
  est.confidence_halfwidth = (rates.front() - rates[decile - 1]) / 2.0;
  return est;
}

}  // namespace vvspec
