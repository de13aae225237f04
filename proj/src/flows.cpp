// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/flows.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "vvspec/ode.hpp"

namespace vvspec {

namespace {

std::string mode_str(const std::vector<int>& k) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
  os << ")";
  return os.str();
}

void validate_coeffs(int dim, const SteadyFlow::CoeffMap& coeffs) {
  for (const auto& [k, u] : coeffs) {
    if (static_cast<int>(k.size()) != dim || u.size() != dim) {
      throw ConfigError("flow coefficient at " + mode_str(k) +
                        " has wrong dimension");
    }
    cx div = 0.0;
    for (int i = 0; i < dim; ++i) div += static_cast<double>(k[i]) * u[i];
    if (std::abs(div) > 1e-12 * (1.0 + u.norm())) {
      throw ConfigError("flow is not divergence-free at mode " + mode_str(k));
    }
    std::vector<int> neg(k);
    for (auto& c : neg) c = -c;
    auto it = coeffs.find(neg);
    if (it == coeffs.end() || (it->second.conjugate() - u).norm() > 1e-12) {
      throw ConfigError("flow coefficients are not conjugate-symmetric at "
                        "mode " + mode_str(k));
    }
  }
}

}  // namespace

SteadyFlow SteadyFlow::zero(int dim) {
  if (dim != 2 && dim != 3) throw ConfigError("flow dim must be 2 or 3");
  SteadyFlow f;
  f.kind_ = Kind::zero;
  f.name_ = "zero";
  f.dim_ = dim;
  return f;
}

SteadyFlow SteadyFlow::shear(int m, double amplitude) {
  if (m < 1) throw ConfigError("shear: m must be >= 1");
  SteadyFlow f;
  f.kind_ = Kind::shear;
  f.name_ = "shear(" + std::to_string(m) + "," + std::to_string(amplitude) +
            ")";
  f.dim_ = 2;
  f.m_ = m;
  f.amp_ = amplitude;
  VectorXcd up(2), um(2);
  up << cx(0, -amplitude / 2), 0.0;  // A sin(m x2) = A/(2i) (e^{imx2}-e^{-imx2})
  um << cx(0, amplitude / 2), 0.0;
  f.coeffs_[{0, m}] = up;
  f.coeffs_[{0, -m}] = um;
  return f;
}

SteadyFlow SteadyFlow::kolmogorov(int m, double amplitude) {
  SteadyFlow f = shear(m, amplitude);
  f.name_ = "kolmogorov(" + std::to_string(m) + "," +
            std::to_string(amplitude) + ")";
  return f;
}

SteadyFlow SteadyFlow::cellular(double amplitude) {
  SteadyFlow f;
  f.kind_ = Kind::cellular;
  f.name_ = "cellular(" + std::to_string(amplitude) + ")";
  f.dim_ = 2;
  f.amp_ = amplitude;
  for (int s1 : {-1, 1}) {
    for (int s2 : {-1, 1}) {
      VectorXcd u(2);
      u << cx(0, -amplitude * s1 / 4.0), cx(0, amplitude * s2 / 4.0);
      f.coeffs_[{s1, s2}] = u;
    }
  }
  return f;
}

SteadyFlow SteadyFlow::custom(int dim, CoeffMap coeffs) {
  if (dim != 2 && dim != 3) throw ConfigError("flow dim must be 2 or 3");
  validate_coeffs(dim, coeffs);
  SteadyFlow f;
  f.kind_ = Kind::custom;
  f.name_ = "custom";
  f.dim_ = dim;
  f.coeffs_ = std::move(coeffs);
  return f;
}

VectorXd SteadyFlow::velocity(const VectorXd& x) const {
  VectorXd u = VectorXd::Zero(dim_);
  switch (kind_) {
    case Kind::zero:
      break;
    case Kind::shear:
      u[0] = amp_ * std::sin(m_ * x[1]);
      break;
    case Kind::cellular:
      u[0] = amp_ * std::sin(x[0]) * std::cos(x[1]);
      u[1] = -amp_ * std::cos(x[0]) * std::sin(x[1]);
      break;
    case Kind::custom: {
      VectorXcd acc = VectorXcd::Zero(dim_);
      for (const auto& [k, uk] : coeffs_) {
        double phase = 0.0;
        for (int i = 0; i < dim_; ++i) phase += k[i] * x[i];
        acc += uk * std::exp(cx(0.0, phase));
      }
      u = acc.real();  // conjugate symmetry makes the sum real
      break;
    }
  }
  return u;
}

MatrixXd SteadyFlow::grad(const VectorXd& x) const {
  MatrixXd g = MatrixXd::Zero(dim_, dim_);
  switch (kind_) {
    case Kind::zero:
      break;
    case Kind::shear:
      g(0, 1) = amp_ * m_ * std::cos(m_ * x[1]);
      break;
    case Kind::cellular:
      g(0, 0) = amp_ * std::cos(x[0]) * std::cos(x[1]);
      g(0, 1) = -amp_ * std::sin(x[0]) * std::sin(x[1]);
      g(1, 0) = amp_ * std::sin(x[0]) * std::sin(x[1]);
      g(1, 1) = -amp_ * std::cos(x[0]) * std::cos(x[1]);
      break;
    case Kind::custom: {
      MatrixXcd acc = MatrixXcd::Zero(dim_, dim_);
      for (const auto& [k, uk] : coeffs_) {
        double phase = 0.0;
        for (int i = 0; i < dim_; ++i) phase += k[i] * x[i];
        const cx e = std::exp(cx(0.0, phase));
        for (int i = 0; i < dim_; ++i) {
          for (int j = 0; j < dim_; ++j) {
            acc(i, j) += uk[i] * cx(0.0, k[j]) * e;
          }
        }
      }
      g = acc.real();
      break;
    }
  }
  return g;
}

SteadyFlow flow_from_json(const nlohmann::json& j) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "zero") return SteadyFlow::zero(j.value("dim", 2));
  if (name == "shear" || name == "kolmogorov") {
    const int m = j.value("m", 1);
    const double amp = j.value("amplitude", 1.0);
    return name == "shear" ? SteadyFlow::shear(m, amp)
                           : SteadyFlow::kolmogorov(m, amp);
  }
  if (name == "cellular") return SteadyFlow::cellular(j.value("amplitude", 1.0));
  if (name == "custom") {
    const int dim = j.at("dim").get<int>();
    SteadyFlow::CoeffMap coeffs;
    for (const auto& e : j.at("coeffs")) {
      const auto k = e.at("k").get<std::vector<int>>();
      const auto re = e.at("re").get<std::vector<double>>();
      const auto im = e.at("im").get<std::vector<double>>();
      if (re.size() != k.size() || im.size() != k.size()) {
        throw ConfigError("custom flow: re/im length mismatch at mode " +
                          mode_str(k));
      }
      VectorXcd u(k.size());
      for (size_t i = 0; i < k.size(); ++i) u[i] = cx(re[i], im[i]);
      coeffs[k] = u;
    }
    return SteadyFlow::custom(dim, std::move(coeffs));
  }
  throw ConfigError("unknown flow name: " + name);
}

FlowMapResult integrate_flow_map(const SteadyFlow& flow, const VectorXd& x0,
                                 double t, double tol, double t_max) {
  const int n = flow.dim();
  if (x0.size() != n) throw ConfigError("integrate_flow_map: x0 dim mismatch");
  if (std::abs(t) > t_max) {
    throw ConfigError("integrate_flow_map: |t| exceeds t_max; pass a larger "
                      "t_max to integrate further");
  }
  VectorXd y(n + n * n);
  y.head(n) = x0;
  Eigen::Map<MatrixXd>(y.data() + n, n, n) = MatrixXd::Identity(n, n);
  auto rhs = [&flow, n](const VectorXd& v, double) {
    VectorXd dv(v.size());
    const VectorXd x = v.head(n);
    Eigen::Map<const MatrixXd> J(v.data() + n, n, n);
    dv.head(n) = flow.velocity(x);
    Eigen::Map<MatrixXd>(dv.data() + n, n, n) = flow.grad(x) * J;
    return dv;
  };
  ode::integrate(rhs, y, 0.0, t, tol);

  FlowMapResult r;
  r.t = t;
  r.x_t = y.head(n);
  r.jacobian = Eigen::Map<const MatrixXd>(y.data() + n, n, n);
  // Cofactor inverse; the determinant is 1 up to integration error, but we
  // divide by the computed value rather than assuming it.
  const MatrixXd& J = r.jacobian;
  MatrixXd inv(n, n);
  if (n == 2) {
    const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    inv << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
    inv /= det;
  } else {
    Eigen::Matrix3d m = J;
    inv = m.inverse();  // Eigen uses the 3x3 cofactor formula here
  }
  r.inverse_transpose_jacobian = inv.transpose();
  return r;
}

}  // namespace vvspec
