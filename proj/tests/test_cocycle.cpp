// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vvspec/cocycle.hpp"
#include "vvspec/flows.hpp"

#include "oracles.hpp"

using namespace vvspec;

TEST_CASE("amplitude symbol: zero flow gives the zero matrix") {
  const SteadyFlow f = SteadyFlow::zero(2);
  VectorXd x(2), xi(2);
  x << 1.0, 2.0;
  xi << 0.3, -0.8;
  CHECK(amplitude_symbol(f, x, xi).norm() == 0.0);
}

TEST_CASE("amplitude symbol: hand evaluation for the unit shear") {
  // At x = 0 the shear gradient is [[0,1],[0,0]]; with xi = e2 the reflector
  // 2 xi xi^T/|xi|^2 - I is diag(-1, 1), so the product is [[0,-1],[0,0]].
  const SteadyFlow f = SteadyFlow::shear(1, 1.0);
  VectorXd x = VectorXd::Zero(2), xi(2);
  xi << 0.0, 1.0;
  const MatrixXd a = amplitude_symbol(f, x, xi);
  CHECK(a(0, 0) == doctest::Approx(0.0));
  CHECK(a(0, 1) == doctest::Approx(-1.0));
  CHECK(a(1, 0) == doctest::Approx(0.0));
  CHECK(a(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("amplitude symbol: zero-homogeneous in xi, rejects xi = 0") {
  const SteadyFlow f = SteadyFlow::cellular(1.0);
  VectorXd x(2), xi(2);
  x << 0.7, 1.1;
  xi << 0.4, -1.2;
  const MatrixXd a1 = amplitude_symbol(f, x, xi);
  const MatrixXd a7 = amplitude_symbol(f, x, 7.0 * xi);
  CHECK((a1 - a7).norm() <= 1e-14 * a1.norm());
  CHECK_THROWS_AS(amplitude_symbol(f, x, VectorXd::Zero(2)), ConfigError);
}

TEST_CASE("zero flow rays are constant in x, xi, and b") {
  const SteadyFlow f = SteadyFlow::zero(2);
  VectorXd x0(2), xi0(2);
  x0 << 0.2, 5.1;
  xi0 << 1.0, 2.0;
  VectorXcd b0(2);
  b0 << cx(1.0, 0.5), cx(-2.0, 0.0);
  const RayResult r = integrate_ray(f, x0, xi0, b0, 7.0);
  for (const CocycleState& s : r.path) {
    CHECK((s.x - x0).norm() == 0.0);
    CHECK((s.xi - xi0).norm() == 0.0);
    CHECK((s.b - b0).norm() == 0.0);
  }
  CHECK((r.fundamental - MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK(r.xi_quad == doctest::Approx(7.0 * xi0.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("shear ray: xi follows the closed form (1, -t cos x2)") {
  const SteadyFlow f = SteadyFlow::shear(1, 1.0);
  const double x2 = two_pi / 6.0;  // pi/3, cos = 1/2
  VectorXd x0(2), xi0(2);
  x0 << 0.0, x2;
  xi0 << 1.0, 0.0;
  VectorXcd b0(2);
  b0 << cx(0.0, 0.0), cx(1.0, 0.0);  // orthogonal to xi0
  const RayResult r = integrate_ray(f, x0, xi0, b0, 4.0);
  for (const CocycleState& s : r.path) {
    CHECK(s.xi[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.xi[1] == doctest::Approx(-s.t * std::cos(x2)).epsilon(1e-8));
  }
  // |xi(s)|^2 = 1 + s^2 cos^2(x2) integrates to t + cos^2(x2) t^3/3.
  CHECK(r.xi_quad ==
        doctest::Approx(4.0 + std::pow(4.0, 3) / 3.0 * std::pow(std::cos(x2), 2))
            .epsilon(1e-8));
}

TEST_CASE("ray conservation laws across the catalog") {
  std::vector<SteadyFlow> flows = {SteadyFlow::shear(1, 1.0),
                                   SteadyFlow::kolmogorov(2, 1.0),
                                   SteadyFlow::cellular(1.0)};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(0.0, two_pi);
  for (const SteadyFlow& f : flows) {
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd x0(2), xi0(2);
      x0 << ux(rng), ux(rng);
      const double th = ux(rng);
      xi0 << std::cos(th), std::sin(th);
      VectorXcd b0(2);
      b0 << cx(-xi0[1], 0.2), cx(xi0[0], -0.2 * xi0[0] / std::max(1e-12, xi0[1]));
      // Force exact initial orthogonality.
      b0[1] = -b0[0] * xi0[0] / xi0[1];
      const RayResult r = integrate_ray(f, x0, xi0, b0, 10.0);
      const double c0 = xi0.dot(f.velocity(x0));
      for (const CocycleState& s : r.path) {
        CHECK(std::abs(s.xi.dot(f.velocity(s.x)) - c0) <= 1e-8);
        const double rel = std::abs(s.xi.cast<cx>().dot(s.b)) /
                           std::max(1e-300, s.xi.norm() * s.b.norm());
        CHECK(rel <= 1e-8);
      }
    }
  }
}

TEST_CASE("xi transport equals the inverse-transpose Jacobian of the flow "
          "map") {
  const SteadyFlow f = SteadyFlow::cellular(1.0);
  VectorXd x0(2), xi0(2);
  x0 << 1.2, 0.4;
  xi0 << 0.6, -1.0;
  const double t = 3.0;
  const RayResult r = integrate_ray(f, x0, xi0, VectorXcd::Ones(2), t);
  const FlowMapResult m = integrate_flow_map(f, x0, t);
  const VectorXd expected = m.inverse_transpose_jacobian * xi0;
  CHECK((r.path.back().xi - expected).norm() <= 1e-6 * expected.norm());
}

TEST_CASE("ray checkpoints cover [0, t] uniformly and scale with the "
          "requested count") {
  const SteadyFlow f = SteadyFlow::shear(1, 1.0);
  VectorXd x0(2), xi0(2);
  x0 << 0.1, 0.2;
  xi0 << 1.0, 1.0;
  const RayResult r =
      integrate_ray(f, x0, xi0, VectorXcd::Ones(2), 2.0, 1e-10, 8);
  REQUIRE(r.path.size() == 9);
  CHECK(r.path.front().t == 0.0);
  CHECK(r.path.back().t == doctest::Approx(2.0));
  for (size_t i = 1; i < r.path.size(); ++i) {
    CHECK(r.path[i].t - r.path[i - 1].t == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("zero xi is rejected") {
  const SteadyFlow f = SteadyFlow::shear(1, 1.0);
  VectorXd x0 = VectorXd::Zero(2);
  CHECK_THROWS_AS(
      integrate_ray(f, x0, VectorXd::Zero(2), VectorXcd::Ones(2), 1.0),
      ConfigError);
}

TEST_CASE("viscous damping: exact closed forms and monotonicity") {
  const SteadyFlow z = SteadyFlow::zero(2);
  VectorXd x0(2), xi0(2);
  x0 << 0.3, 0.9;
  xi0 << 3.0, 4.0;  // |xi| = 5
  CHECK(viscous_damping(z, x0, xi0, 2.0, 0.0) == 1.0);
  CHECK(viscous_damping(z, x0, xi0, 2.0, 0.01) ==
        doctest::Approx(std::exp(-0.01 * 25.0 * 2.0)).epsilon(1e-9));

  const SteadyFlow f = SteadyFlow::cellular(1.0);
  const double d1 = viscous_damping(f, x0, xi0, 1.0, 0.01);
  const double d2 = viscous_damping(f, x0, xi0, 2.0, 0.01);
  const double d3 = viscous_damping(f, x0, xi0, 2.0, 0.02);
  CHECK(d1 > 0.0);
  CHECK(d1 <= 1.0);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d3 == doctest::Approx(d2 * d2).epsilon(1e-8));  // linear in eps
}

TEST_CASE("growth estimate: zero flow rate is exactly zero") {
  LyapunovParams p;
  p.samples = 8;
  p.horizon = 50.0;
  p.seed = 2;
  const LyapunovEstimate e = lyapunov_exponent(SteadyFlow::zero(2), p);
  CHECK(e.mu == 0.0);
  CHECK(e.samples == 8);
  for (const SampleRate& s : e.per_sample) CHECK(s.rate == 0.0);
}

TEST_CASE("growth estimate: deterministic in the seed, sensitive to it") {
  LyapunovParams p;
  p.samples = 16;
  p.horizon = 40.0;
  p.seed = 9;
  const SteadyFlow f = SteadyFlow::cellular(1.0);
  const LyapunovEstimate a = lyapunov_exponent(f, p);
  const LyapunovEstimate b = lyapunov_exponent(f, p);
  CHECK(a.mu == b.mu);
  REQUIRE(a.per_sample.size() == b.per_sample.size());
  for (size_t i = 0; i < a.per_sample.size(); ++i) {
    CHECK(a.per_sample[i].rate == b.per_sample[i].rate);
    CHECK((a.per_sample[i].x0 - b.per_sample[i].x0).norm() == 0.0);
  }
  p.seed = 10;
  const LyapunovEstimate c = lyapunov_exponent(f, p);
  CHECK(a.mu != c.mu);
}

TEST_CASE("growth estimate: invariant under doubling the renormalization "
          "frequency") {
  LyapunovParams p;
  p.samples = 16;
  p.horizon = 60.0;
  p.seed = 4;
  p.renorm_dt = 1.0;
  const SteadyFlow f = SteadyFlow::cellular(1.0);
  const double mu1 = lyapunov_exponent(f, p).mu;
  p.renorm_dt = 0.5;
  const double mu2 = lyapunov_exponent(f, p).mu;
  CHECK(std::abs(mu1 - mu2) <= 0.02);
}

TEST_CASE("shear growth is at most polynomial: fitted rate near zero") {
  LyapunovParams p;
  p.samples = 32;
  p.horizon = 200.0;
  p.seed = 7;
  const double mu = lyapunov_exponent(SteadyFlow::shear(1, 1.0), p).mu;
  CHECK(std::abs(mu) <= 0.05);
}

TEST_CASE("weighting by |xi|^m: saddle stretching shows at m = 2, cancels "
          "at m = 1") {
  // At the stagnation point of the cellular flow, b decays at rate -A while
  // |xi| grows at +A, so log(|b| |xi|^m) grows at (m-1) A.  The fitted
  // finite-horizon max rate reproduces that ordering.
  const SteadyFlow f = SteadyFlow::cellular(1.0);
  const double a_saddle = oracle::stagnation_stretching_rate(f);
  CHECK(a_saddle == doctest::Approx(1.0).epsilon(1e-8));

  LyapunovParams p;
  p.samples = 32;
  p.horizon = 10.0;
  p.seed = 7;
  p.weight_m = 1;
  const double mu1 = lyapunov_exponent(f, p).mu;
  CHECK(std::abs(mu1) <= 0.05);

  p.weight_m = 2;
  const double mu2 = lyapunov_exponent(f, p).mu;
  CHECK(mu2 >= 0.5 * a_saddle);
  CHECK(mu2 <= 1.1 * a_saddle);
}

TEST_CASE("stagnation stretching oracle: shear stagnation lines are "
          "degenerate, so the reported stretching is zero") {
  CHECK(oracle::stagnation_stretching_rate(SteadyFlow::shear(1, 1.0)) == 0.0);
  CHECK(oracle::stagnation_stretching_rate(SteadyFlow::zero(2)) == 0.0);
}
