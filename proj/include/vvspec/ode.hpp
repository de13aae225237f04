// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Selective includes: the odeint umbrella header drags in ublas and, with
// it, fusion headers that do not preprocess under C++20 in this Boost.
// Order matters: the Eigen adapter expects the dispatcher bases first.
#include <boost/numeric/odeint/algebra/algebra_dispatcher.hpp>
#include <boost/numeric/odeint/algebra/vector_space_algebra.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
// Both generation headers are required: the dopri5 one maps the stepper to
// its controller type, the controlled_runge_kutta one provides the factory
// that forwards tolerances into the error checker.  With only the former,
// the generic factory misroutes rel_error into the step-size cap.
#include <boost/numeric/odeint/stepper/generation/generation_controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation/generation_runge_kutta_dopri5.hpp>
#include <boost/numeric/odeint/integrate/integrate_adaptive.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <cmath>

#include "vvspec/types.hpp"

namespace vvspec::ode {

// Adaptive Dormand-Prince 5(4) on y' = f(y, t), integrated from t0 to t1
// (either direction) with the endpoint hit exactly.  tol is applied as both
// the absolute and relative local error bound per step.
template <class F>
void integrate(F&& f, VectorXd& y, double t0, double t1, double tol) {
  namespace odei = boost::numeric::odeint;
  if (t1 == t0) return;
  using stepper_t =
      odei::runge_kutta_dopri5<VectorXd, double, VectorXd, double,
                               odei::vector_space_algebra>;
  auto stepper = odei::make_controlled<stepper_t>(tol, tol);
  auto sys = [&f](const VectorXd& v, VectorXd& dvdt, double t) {
    dvdt = f(v, t);
  };
  const double dt0 = (t1 - t0) / 64.0;
  odei::integrate_adaptive(stepper, sys, y, t0, t1, dt0);
}

}  // namespace vvspec::ode
