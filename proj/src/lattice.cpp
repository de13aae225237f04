// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
#include "vvspec/lattice.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

namespace vvspec {

namespace {

std::vector<int> to_key(const VectorXi& k) {
  return std::vector<int>(k.data(), k.data() + k.size());
}

// 2D convention: k_perp/|k| with the first nonzero component positive.
// 3D convention: Gram-Schmidt applied to the two coordinate axes along which
// |k| is smallest (ties broken by axis index).  Both are sign-deterministic,
// so serialized operators reload against identical bases.
MatrixXd fiber_basis_for(const VectorXi& k) {
  const int n = static_cast<int>(k.size());
  const VectorXd kd = k.cast<double>();
  MatrixXd basis(n, n - 1);
  if (n == 2) {
    VectorXd perp(2);
    perp << -kd[1], kd[0];
    if (perp[0] < 0.0 || (perp[0] == 0.0 && perp[1] < 0.0)) perp = -perp;
    basis.col(0) = perp / perp.norm();
    return basis;
  }
  std::array<int, 3> axes = {0, 1, 2};
  std::sort(axes.begin(), axes.end(), [&](int a, int b) {
    return std::abs(k[a]) != std::abs(k[b]) ? std::abs(k[a]) < std::abs(k[b])
                                            : a < b;
  });
  const VectorXd khat = kd / kd.norm();
  int filled = 0;
  for (int a : axes) {
    if (filled == 2) break;
    VectorXd v = VectorXd::Unit(3, a);
    v -= v.dot(khat) * khat;
    for (int j = 0; j < filled; ++j) v -= v.dot(basis.col(j)) * basis.col(j);
    if (v.norm() < 1e-12) continue;  // seed parallel to k
    basis.col(filled++) = v / v.norm();
  }
  return basis;
}

}  // namespace

ModeSet::ModeSet(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  if (dim != 2 && dim != 3) throw ConfigError("ModeSet: dim must be 2 or 3");
  if (cutoff < 1) throw ConfigError("ModeSet: cutoff must be >= 1");
  VectorXi k(dim);
  // Nested ascending loops enumerate lexicographically by construction.
  for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
    for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
      if (dim == 2) {
        if (k1 == 0 && k2 == 0) continue;
        k << k1, k2;
        index_[to_key(k)] = static_cast<int>(modes_.size());
        modes_.push_back(k);
      } else {
        for (int k3 = -cutoff; k3 <= cutoff; ++k3) {
          if (k1 == 0 && k2 == 0 && k3 == 0) continue;
          k << k1, k2, k3;
          index_[to_key(k)] = static_cast<int>(modes_.size());
          modes_.push_back(k);
        }
      }
    }
  }
  bases_.reserve(modes_.size());
  for (const auto& m : modes_) bases_.push_back(fiber_basis_for(m));
}

double ModeSet::mode_norm2(int i) const {
  return modes_[static_cast<size_t>(i)].cast<double>().squaredNorm();
}

int ModeSet::mode_index(const VectorXi& k) const {
  if (k.size() != dim_) return -1;
  auto it = index_.find(to_key(k));
  return it == index_.end() ? -1 : it->second;
}

void to_json(nlohmann::json& j, const ModeSet& ms) {
  j = nlohmann::json{{"dim", ms.dim()},
                     {"cutoff", ms.cutoff()},
                     {"mode_count", ms.mode_count()},
                     {"dimension", ms.dimension()}};
}

ModeSet modeset_from_json(const nlohmann::json& j) {
  ModeSet ms(j.at("dim").get<int>(), j.at("cutoff").get<int>());
  if (j.contains("mode_count") &&
      j.at("mode_count").get<int>() != ms.mode_count()) {
    throw ConfigError("ModeSet JSON: mode_count does not match rebuild");
  }
  if (j.contains("dimension") &&
      j.at("dimension").get<int>() != ms.dimension()) {
    throw ConfigError("ModeSet JSON: dimension does not match rebuild");
  }
  return ms;
}

MatrixXd leray_fiber_projector(const VectorXi& k) {
  if (k.squaredNorm() == 0) {
    throw ConfigError("leray_fiber_projector: k = 0 has no fiber");
  }
  const VectorXd kd = k.cast<double>();
  const int n = static_cast<int>(k.size());
  return MatrixXd::Identity(n, n) - kd * kd.transpose() / kd.squaredNorm();
}

SpectralField make_zero_field(std::shared_ptr<const ModeSet> ms, Layout lay) {
  SpectralField f;
  f.layout = lay;
  f.coeffs = VectorXcd::Zero(lay == Layout::fiber
                                 ? ms->dimension()
                                 : ms->mode_count() * ms->dim());
  f.modes = std::move(ms);
  return f;
}

SpectralField fiber_to_full(const SpectralField& f) {
  if (f.layout == Layout::full) return f;
  const ModeSet& ms = *f.modes;
  SpectralField out = make_zero_field(f.modes, Layout::full);
  const int n = ms.dim();
  for (int i = 0; i < ms.mode_count(); ++i) {
    const MatrixXd& e = ms.fiber_basis(i);
    for (int s = 0; s < n - 1; ++s) {
      out.coeffs.segment(i * n, n) += f.coeffs[ms.col(i, s)] * e.col(s);
    }
  }
  return out;
}

SpectralField full_to_fiber(const SpectralField& f) {
  if (f.layout == Layout::fiber) return f;
  const ModeSet& ms = *f.modes;
  SpectralField out = make_zero_field(f.modes, Layout::fiber);
  const int n = ms.dim();
  for (int i = 0; i < ms.mode_count(); ++i) {
    const MatrixXd& e = ms.fiber_basis(i);
    for (int s = 0; s < n - 1; ++s) {
      out.coeffs[ms.col(i, s)] =
          e.col(s).cast<cx>().dot(f.coeffs.segment(i * n, n));
    }
  }
  return out;
}

SpectralField project_div_free(const SpectralField& f) {
  if (f.layout != Layout::full) {
    throw ConfigError("project_div_free expects the full layout");
  }
  const ModeSet& ms = *f.modes;
  SpectralField out = f;
  const int n = ms.dim();
  for (int i = 0; i < ms.mode_count(); ++i) {
    const VectorXd kd = ms.mode(i).cast<double>();
    const VectorXcd v = f.coeffs.segment(i * n, n);
    out.coeffs.segment(i * n, n) =
        v - kd.cast<cx>() * (kd.cast<cx>().dot(v) / kd.squaredNorm());
  }
  return out;
}

SpectralField truncate(const SpectralField& f, double n_prime) {
  const ModeSet& ms = *f.modes;
  SpectralField out = f;
  const int block = f.layout == Layout::fiber ? ms.fibers_per_mode() : ms.dim();
  for (int i = 0; i < ms.mode_count(); ++i) {
    if (ms.mode_norm2(i) >= n_prime * n_prime) {
      out.coeffs.segment(i * block, block).setZero();
    }
  }
  return out;
}

}  // namespace vvspec
