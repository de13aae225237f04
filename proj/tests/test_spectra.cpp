// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "vvspec/galerkin.hpp"
#include "vvspec/spectra.hpp"

#include "oracles.hpp"

using namespace vvspec;

namespace {

// Shell structure of the dissipation spectrum, counted from the lattice
// itself: |k|^2 -> number of divergence-free columns.
std::map<int, int> shell_counts(const ModeSet& ms) {
  std::map<int, int> counts;
  for (int i = 0; i < ms.mode_count(); ++i) {
    counts[static_cast<int>(std::lround(ms.mode_norm2(i)))] +=
        ms.fibers_per_mode();
  }
  return counts;
}

MatrixXcd shell_projector(const ModeSet& ms, int norm2) {
  MatrixXcd p = MatrixXcd::Zero(ms.dimension(), ms.dimension());
  for (int i = 0; i < ms.mode_count(); ++i) {
    if (std::lround(ms.mode_norm2(i)) != norm2) continue;
    for (int s = 0; s < ms.fibers_per_mode(); ++s) {
      const int c = ms.col(i, s);
      p(c, c) = 1.0;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("dissipation spectrum: shells, multiplicities, residuals, order") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const GalerkinOperator l = assemble(SteadyFlow::zero(2), ms, 0.1);
  const SpectrumResult s = eigen_decompose(l);
  REQUIRE(s.eigenvalues.size() == ms->dimension());
  REQUIRE(s.vectors.cols() == ms->dimension());
  REQUIRE(s.residuals.size() == ms->dimension());

  // Every eigenvalue is -0.1 |k|^2 with the multiplicity of its shell.
  std::map<int, int> seen;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    CHECK(std::abs(s.eigenvalues[i].imag()) <= 1e-12);
    const double n2 = -s.eigenvalues[i].real() / 0.1;
    const int shell = static_cast<int>(std::lround(n2));
    CHECK(std::abs(n2 - shell) <= 1e-10);
    seen[shell] += 1;
    CHECK(s.residuals[i] <= 1e-8);
    CHECK(std::abs(s.vectors.col(i).norm() - 1.0) <= 1e-12);
  }
  CHECK(seen == shell_counts(*ms));

  // Sorted by decreasing real part, ties by increasing imaginary part.
  for (Eigen::Index i = 0; i + 1 < s.eigenvalues.size(); ++i) {
    const cx a = s.eigenvalues[i], b = s.eigenvalues[i + 1];
    CHECK((a.real() > b.real() ||
           (a.real() == b.real() && a.imag() <= b.imag())));
  }
}

TEST_CASE("eigen pairs of an advective operator satisfy their own residual "
          "bound") {
  auto ms = std::make_shared<const ModeSet>(2, 5);
  const GalerkinOperator l = assemble(SteadyFlow::cellular(1.0), ms, 0.02);
  const SpectrumResult s = eigen_decompose(l);
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double direct =
        (l.mat * s.vectors.col(i) - s.eigenvalues[i] * s.vectors.col(i))
            .norm();
    CHECK(direct <= 1e-8);
    CHECK(std::abs(direct - s.residuals[i]) <= 1e-12);
  }
}

TEST_CASE("unstable_set applies a strict threshold on the real part") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const SpectrumResult s =
      eigen_decompose(assemble(SteadyFlow::zero(2), ms, 0.1));

  CHECK(unstable_set(s, 0.0, 0.01).empty());
  // Threshold exactly on the leading shell: strict comparison excludes it.
  CHECK(unstable_set(s, -0.2, 0.1).empty());
  // Threshold just below the leading shell: exactly its four columns.
  const std::vector<int> idx = unstable_set(s, -0.2, 0.05);
  REQUIRE(idx.size() == 4);
  for (size_t i = 0; i < idx.size(); ++i) {
    CHECK(idx[i] == static_cast<int>(i));  // leading block of sorted order
    CHECK(s.eigenvalues[idx[i]].real() == doctest::Approx(-0.1).epsilon(1e-12));
  }

  const SpectrumResult sh =
      eigen_decompose(assemble(SteadyFlow::shear(2, 1.0),
                               std::make_shared<const ModeSet>(2, 8), 0.0));
  const std::vector<int> up = unstable_set(sh, 0.0, 0.05);
  CHECK(!up.empty());
  for (int i : up) CHECK(sh.eigenvalues[i].real() > 0.05);
  for (Eigen::Index i = 0; i < sh.eigenvalues.size(); ++i) {
    if (std::find(up.begin(), up.end(), static_cast<int>(i)) == up.end()) {
      CHECK(sh.eigenvalues[i].real() <= 0.05);
    }
  }
}

TEST_CASE("resolvent solves match the analytic diagonal inverse and refuse "
          "singular shifts") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const GalerkinOperator l = assemble(SteadyFlow::zero(2), ms, 0.1);

  std::mt19937 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXcd rhs(l.dimension());
  for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = cx(g(rng), g(rng));

  const cx zeta(0.03, 0.02);
  const VectorXcd x = resolvent_solve(l, zeta, rhs);
  for (int i = 0; i < ms->mode_count(); ++i) {
    const int c = ms->col(i, 0);
    const cx expect = rhs[c] / (cx(-0.1 * ms->mode_norm2(i), 0.0) - zeta);
    CHECK(std::abs(x[c] - expect) <= 1e-12 * std::abs(expect));
  }

  CHECK_THROWS_AS(resolvent_solve(l, cx(-0.1, 0.0), rhs), NumericalError);
  CHECK_THROWS_AS(resolvent_solve(l, zeta, VectorXcd::Zero(3)), ConfigError);
}

TEST_CASE("contour projection onto a dissipation shell: trace, defect, and "
          "the exact projector") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const GalerkinOperator l = assemble(SteadyFlow::zero(2), ms, 0.1);

  const RieszProjection p = riesz_projection(l, cx(-0.1, 0.0), 0.04);
  CHECK(std::abs(p.trace - cx(4.0, 0.0)) <= 1e-10);
  CHECK(multiplicity(p) == 4);
  CHECK(p.idempotency_defect <= 1e-6);
  CHECK(p.nodes == 64);
  CHECK(p.radius == 0.04);

  const MatrixXcd exact = shell_projector(*ms, 1);
  CHECK((p.matrix - exact).norm() <= 1e-10);

  // Fewer quadrature nodes leave a visible but quantifiable error; the
  // trapezoid rule on a circle converges geometrically in the node count.
  const RieszProjection p16 = riesz_projection(l, cx(-0.1, 0.0), 0.04, 16);
  CHECK((p16.matrix - exact).norm() <= 1e-4);
  CHECK((p16.matrix - exact).norm() > (p.matrix - exact).norm());
}

TEST_CASE("contour quadrature rejects bad parameters and guarded spectra") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const GalerkinOperator l = assemble(SteadyFlow::zero(2), ms, 0.1);

  CHECK_THROWS_AS(riesz_projection(l, cx(-0.1, 0.0), 0.04, 8), ConfigError);
  CHECK_THROWS_AS(riesz_projection(l, cx(-0.1, 0.0), 0.0), ConfigError);
  CHECK_THROWS_AS(riesz_projection(l, cx(-0.1, 0.0), -1.0), ConfigError);

  // The shell at -0.2 sits exactly on this circle.
  CHECK_THROWS_AS(riesz_projection(l, cx(-0.1, 0.0), 0.1), NumericalError);
  // And within the 5% guard band of this one.
  CHECK_THROWS_AS(riesz_projection(l, cx(-0.15, 0.0), 0.0505),
                  NumericalError);
}

TEST_CASE("multiplicity demands a near-integer, near-real trace") {
  RieszProjection p;
  p.trace = cx(2.0, 0.0);
  CHECK(multiplicity(p) == 2);
  p.trace = cx(2.04, 0.0);
  CHECK(multiplicity(p) == 2);
  p.trace = cx(1.5, 0.0);
  CHECK_THROWS_AS(multiplicity(p), NumericalError);
  p.trace = cx(2.06, 0.0);
  CHECK_THROWS_AS(multiplicity(p), NumericalError);
  p.trace = cx(2.0, 1e-3);
  CHECK_THROWS_AS(multiplicity(p), NumericalError);
  p.trace = cx(0.0, 0.0);
  CHECK(multiplicity(p) == 0);
}

TEST_CASE("scalar chain oracle is internally consistent and matches the "
          "full assembly") {
  // The characteristic function vanishes at the reported root and changes
  // sign across it.
  const double root = oracle::shear_leading_eigenvalue(2, 1.0, 1, 0.01, 12);
  const double f0 = oracle::shear_characteristic(2, 1.0, 1, 0.01, root, 12);
  CHECK(std::abs(f0) <= 1e-9);
  const double fl =
      oracle::shear_characteristic(2, 1.0, 1, 0.01, root - 0.01, 12);
  const double fr =
      oracle::shear_characteristic(2, 1.0, 1, 0.01, root + 0.01, 12);
  CHECK(fl * fr < 0.0);

  // Same truncation, two routes: scalar chain vs full two-component
  // assembly.  The rightmost eigenvalue must agree to solver precision.
  auto ms = std::make_shared<const ModeSet>(2, 8);
  const SpectrumResult s =
      eigen_decompose(assemble(SteadyFlow::shear(2, 1.0), ms, 0.01));
  const double chain = oracle::shear_leading_eigenvalue(2, 1.0, 1, 0.01, 8);
  CHECK(std::abs(s.eigenvalues[0].real() - chain) <= 1e-9);
  CHECK(std::abs(s.eigenvalues[0].imag()) <= 1e-9);
}

TEST_CASE("isolation radius is half the gap to the nearest distinct "
          "eigenvalue") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const SpectrumResult s =
      eigen_decompose(assemble(SteadyFlow::zero(2), ms, 0.1));
  // Shells -0.1 and -0.2: the four copies of -0.1 cluster, the gap is 0.1.
  CHECK(isolation_radius(s, cx(-0.1, 0.0)) ==
        doctest::Approx(0.05).epsilon(1e-12));

  const SpectrumResult flat =
      eigen_decompose(assemble(SteadyFlow::zero(2), ms, 0.0));
  CHECK_THROWS_AS(isolation_radius(flat, cx(0.0, 0.0)), NumericalError);
}

TEST_CASE("viscosity continuation on the dissipation spectrum: exclusion, "
          "empty contours, and exact projector distances") {
  auto ms = std::make_shared<const ModeSet>(2, 2);
  const SteadyFlow z = SteadyFlow::zero(2);

  // Grid validation.
  CHECK_THROWS_AS(continue_in_viscosity(z, ms, cx(-0.1, 0.0), 0.085,
                                        {0.1, 0.1}),
                  ConfigError);
  CHECK_THROWS_AS(continue_in_viscosity(z, ms, cx(-0.1, 0.0), 0.085,
                                        {0.1, -0.01}),
                  ConfigError);

  // A contour invalid at the reference point is fatal: at eps = 0 the whole
  // spectrum sits at 0, exactly on the circle of radius 0.1 around -0.1.
  CHECK_THROWS_AS(continue_in_viscosity(z, ms, cx(-0.1, 0.0), 0.1, {0.2}),
                  NumericalError);

  // At eps = 0.1 the leading shell -0.1 is enclosed; at eps = 0.0925 the
  // second shell lands exactly on the circle (|-0.185 + 0.1| = 0.085); at
  // eps = 0.001 and 0 every eigenvalue is outside.
  const BranchCurve c = continue_in_viscosity(z, ms, cx(-0.1, 0.0), 0.085,
                                              {0.1, 0.0925, 0.001});
  REQUIRE(c.points.size() == 4);  // 0 appended
  CHECK(c.points[3].eps == 0.0);

  const BranchPoint& a = c.points[0];
  CHECK(!a.excluded);
  CHECK(a.has_lambda);
  CHECK(a.inside.size() == 4);
  CHECK(std::abs(a.lambda - cx(-0.1, 0.0)) <= 1e-12);
  CHECK(a.mult == 4);
  CHECK(a.rightmost_re == doctest::Approx(-0.1).epsilon(1e-12));
  // P_eps is the shell projector and the reference projection is the zero
  // matrix, so the operator distance is 1 up to the geometric quadrature
  // tail of the nearest outside eigenvalue, (0.1 / 0.085)^{-64} ~ 3e-5.
  CHECK(std::abs(a.proj_dist - 1.0) <= 1e-4);

  CHECK(c.points[1].excluded);
  CHECK(!c.points[1].has_lambda);
  CHECK(c.points[1].inside.empty());

  for (size_t i : {size_t{2}, size_t{3}}) {
    CHECK(!c.points[i].excluded);
    CHECK(!c.points[i].has_lambda);
    CHECK(c.points[i].inside.empty());
    CHECK(c.points[i].mult == 0);
    CHECK(c.points[i].proj_dist == 0.0);
  }
  CHECK(c.points[3].rightmost_re == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("viscosity continuation tracks the unstable shear eigenvalue") {
  auto ms = std::make_shared<const ModeSet>(2, 8);
  const SteadyFlow f = SteadyFlow::shear(2, 1.0);

  const SpectrumResult s0 = eigen_decompose(assemble(f, ms, 0.0));
  const cx lambda0 = s0.eigenvalues[0];
  // Cross-checked against the scalar chain at the same truncation.
  CHECK(std::abs(lambda0 - cx(0.521316657741707, 0.0)) <= 1e-9);
  CHECK(std::abs(lambda0.real() -
                 oracle::shear_leading_eigenvalue(2, 1.0, 1, 0.0, 8)) <=
        1e-9);
  const double radius = isolation_radius(s0, lambda0);
  CHECK(radius == doctest::Approx(0.24090518265358202).epsilon(1e-9));

  const BranchCurve c =
      continue_in_viscosity(f, ms, lambda0, radius, {0.03, 0.01, 0.003}, 32);
  REQUIRE(c.points.size() == 4);
  CHECK(c.lambda0 == lambda0);
  CHECK(c.radius == radius);

  double prev_gap = std::numeric_limits<double>::infinity();
  double prev_dist = std::numeric_limits<double>::infinity();
  for (const BranchPoint& pt : c.points) {
    CHECK(!pt.excluded);
    CHECK(pt.has_lambda);
    CHECK(pt.mult == 2);
    CHECK(pt.rightmost_re > 0.0);
    const double gap = std::abs(pt.lambda - lambda0);
    CHECK(gap < prev_gap);
    CHECK(pt.proj_dist < prev_dist);
    prev_gap = gap;
    prev_dist = pt.proj_dist;
  }
  CHECK(std::abs(c.points[3].lambda - lambda0) <= 1e-10);
  CHECK(c.points[3].proj_dist <= 1e-12);
}

TEST_CASE("finite-section reduction: root counts on the dissipation "
          "propagator") {
  const ModeSet ms(2, 2);
  // Time-one dissipation propagator at eps = 0.1, built directly.
  MatrixXcd g = MatrixXcd::Zero(ms.dimension(), ms.dimension());
  for (int i = 0; i < ms.mode_count(); ++i) {
    g(ms.col(i, 0), ms.col(i, 0)) = std::exp(-0.1 * ms.mode_norm2(i));
  }

  // Inner ball |k| <= 1.2 captures the leading shell; the complement has
  // spectral radius e^{-0.2}.
  const RootCount rc =
      reduction_roots(g, ms, 1.2, cx(std::exp(-0.1), 0.0), 0.04);
  CHECK(rc.count == 4);
  CHECK(std::abs(rc.sum - cx(4.0 * std::exp(-0.1), 0.0)) <= 1e-8);
  CHECK(rc.winding_residual <= 1e-6);

  // Second shell, with a deeper split so the contour stays valid.
  const RootCount rc2 =
      reduction_roots(g, ms, 2.2, cx(std::exp(-0.2), 0.0), 0.04);
  CHECK(rc2.count == 4);
  CHECK(std::abs(rc2.sum - cx(4.0 * std::exp(-0.2), 0.0)) <= 1e-8);

  // An empty circle has winding number zero.
  const RootCount rc0 = reduction_roots(g, ms, 1.2, cx(0.95, 0.1), 0.02);
  CHECK(rc0.count == 0);
  CHECK(std::abs(rc0.sum) <= 1e-8);

  // Determinant evaluation below the complement spectral radius is refused.
  CHECK_THROWS_AS(reduction_determinant(g, ms, 1.2, cx(0.5, 0.0)),
                  NumericalError);
  // As is a split with no interior modes, a mismatched matrix, or a
  // quadrature that is too coarse.
  CHECK_THROWS_AS(reduction_determinant(g, ms, 0.5, cx(0.95, 0.0)),
                  ConfigError);
  CHECK_THROWS_AS(
      reduction_determinant(MatrixXcd::Identity(3, 3), ms, 1.2, cx(2.0, 0.0)),
      ConfigError);
  CHECK_THROWS_AS(
      reduction_roots(g, ms, 1.2, cx(std::exp(-0.1), 0.0), 0.04, 8),
      ConfigError);
}
