// Copyright 2026 The mrwlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "mrwlab/error.hpp"

namespace mrwlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2i = Eigen::Vector2i;

/// The three kinds of two-dimensional closed subgroups of the plane.
enum class LatticeVariant { H1, H2, H3 };

/// Closed subgroup S of R^2: the whole plane (H1), a family of parallel
/// lines b*Z*u + R*v (H2), or a full-rank lattice B*Z^2 (H3).
///
/// Instances are immutable and always valid; use the named factories.
class Lattice {
 public:
  static constexpr double kOrthoTol = 1e-9;

  static Lattice plane() { return Lattice(LatticeVariant::H1, 1.0, Vec2::UnitX(), Vec2::UnitY(), Mat2::Identity()); }

  static Lattice lines(double b, const Vec2& u, const Vec2& v) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::invalid_lattice, "H2 pitch b must be positive");
    }
    if (std::abs(u.norm() - 1.0) > kOrthoTol || std::abs(v.norm() - 1.0) > kOrthoTol ||
        std::abs(u.dot(v)) > kOrthoTol) {
      throw Error(ErrorCode::invalid_lattice, "H2 requires an orthonormal pair (u, v)");
    }
    Mat2 basis;
    basis.col(0) = b * u;
    basis.col(1) = v;
    return Lattice(LatticeVariant::H2, b, u, v, basis);
  }

  static Lattice grid(const Mat2& basis) {
    if (!basis.allFinite()) {
      throw Error(ErrorCode::invalid_lattice, "H3 basis has non-finite entries");
    }
    const double det = basis.determinant();
    const double scale = std::max(1.0, basis.cwiseAbs().maxCoeff());
    if (std::abs(det) <= 1e-14 * scale * scale) {
      throw Error(ErrorCode::invalid_lattice, "H3 basis is singular");
    }
    return Lattice(LatticeVariant::H3, 0.0, Vec2::UnitX(), Vec2::UnitY(), basis);
  }

  static Lattice integer_grid() { return grid(Mat2::Identity()); }

  LatticeVariant variant() const { return variant_; }
  double pitch() const { return b_; }
  const Vec2& u() const { return u_; }
  const Vec2& v() const { return v_; }
  /// H3 basis B (columns generate S); for H2 the columns are b*u and v.
  const Mat2& basis() const { return basis_; }

  /// eps_S: radius below which a ball around a point of S meets S in a
  /// single point (H3) or a single segment (H2).
  double epsilon_s() const { return epsilon_s_; }

  /// c_S, the lattice factor of the local limit constant.
  double c_s() const {
    return variant_ == LatticeVariant::H3 ? std::abs(basis_.determinant()) : epsilon_s_;
  }

  /// Generators of the dual group S* = {t : <t, s> in 2*pi*Z for all s in S}.
  std::vector<Vec2> dual_generators() const {
    switch (variant_) {
      case LatticeVariant::H1: return {};
      case LatticeVariant::H2: return {dual_pitch() * u_};
      case LatticeVariant::H3: {
        const Mat2 dual = dual_basis();
        return {dual.col(0), dual.col(1)};
      }
    }
    return {};
  }

  /// A = 2*pi*(B^T)^{-1}; only meaningful for H3.
  Mat2 dual_basis() const { return 2.0 * std::numbers::pi * basis_.transpose().inverse(); }

  /// a = 2*pi/b; only meaningful for H2.
  double dual_pitch() const { return 2.0 * std::numbers::pi / b_; }

  /// Distance from p to the nearest element of S.
  double distance_to(const Vec2& p) const {
    switch (variant_) {
      case LatticeVariant::H1: return 0.0;
      case LatticeVariant::H2: {
        const double c = p.dot(u_) / b_;
        return b_ * std::abs(c - std::round(c));
      }
      case LatticeVariant::H3: {
        const Vec2 k = basis_.inverse() * p;
        double best = std::numeric_limits<double>::infinity();
        const Vec2 base(std::floor(k.x()), std::floor(k.y()));
        for (int i = 0; i <= 1; ++i) {
          for (int j = 0; j <= 1; ++j) {
            best = std::min(best, (p - basis_ * (base + Vec2(i, j))).norm());
          }
        }
        return best;
      }
    }
    return 0.0;
  }

  bool contains(const Vec2& p) const { return distance_to(p) < 1e-9 * (1.0 + p.norm()); }

  /// Integer coordinates k with B*k == p (H3 only; p must be in S).
  Vec2i coordinates(const Vec2& p) const {
    require_h3("coordinates");
    require_member(p);
    const Vec2 k = basis_.inverse() * p;
    return Vec2i(static_cast<int>(std::lround(k.x())), static_cast<int>(std::lround(k.y())));
  }

  Vec2 point(const Vec2i& k) const { return basis_ * k.cast<double>(); }

  /// Haar measure of B(s, eps): Lebesgue area (H1), segment length (H2),
  /// counting measure (H3).
  double haar_ball(const Vec2& s, double eps) const {
    if (!(eps > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
    }
    require_member(s);
    if (variant_ != LatticeVariant::H1 && eps >= epsilon_s_) {
      std::ostringstream os;
      os << "eps=" << eps << " must be below eps_S=" << epsilon_s_;
      throw Error(ErrorCode::ball_too_large, os.str());
    }
    switch (variant_) {
      case LatticeVariant::H1: return std::numbers::pi * eps * eps;
      case LatticeVariant::H2: return 2.0 * eps;
      case LatticeVariant::H3: return 1.0;
    }
    return 0.0;
  }

  /// Representative of t in the fundamental domain of R^2 / S*.
  Vec2 reduce_mod_dual(const Vec2& t) const {
    switch (variant_) {
      case LatticeVariant::H1: return t;
      case LatticeVariant::H2: {
        const double a = dual_pitch();
        const double c = t.dot(u_);
        return t - a * std::floor(c / a + 0.5) * u_;
      }
      case LatticeVariant::H3: {
        const Mat2 dual = dual_basis();
        const Vec2 y = dual.inverse() * t;
        const Vec2 shift(std::floor(y.x() + 0.5), std::floor(y.y() + 0.5));
        return t - dual * shift;
      }
    }
    return t;
  }

  /// Euclidean distance from t to the dual group S*.
  double distance_to_dual(const Vec2& t) const {
    const Vec2 r = reduce_mod_dual(t);
    switch (variant_) {
      case LatticeVariant::H1: return t.norm();
      case LatticeVariant::H2: return r.norm();
      case LatticeVariant::H3: {
        const Mat2 dual = dual_basis();
        double best = r.norm();
        for (int i = -1; i <= 1; ++i) {
          for (int j = -1; j <= 1; ++j) {
            best = std::min(best, (r - dual * Vec2(i, j)).norm());
          }
        }
        return best;
      }
    }
    return r.norm();
  }

  /// D_S = c_S / (2*pi*sqrt(det Gamma)).
  double llt_constant(const Mat2& gamma) const {
    const double det = gamma.determinant();
    if (!gamma.allFinite() || std::abs(gamma(0, 1) - gamma(1, 0)) > 1e-9 * (1.0 + gamma.norm())) {
      throw Error(ErrorCode::invalid_argument, "covariance must be a finite symmetric matrix");
    }
    if (!(det > 1e-12) || gamma(0, 0) <= 0.0) {
      std::ostringstream os;
      os << "det(Gamma)=" << det << " is not positive";
      throw Error(ErrorCode::degenerate_covariance, os.str());
    }
    return c_s() / (2.0 * std::numbers::pi * std::sqrt(det));
  }

 private:
  Lattice(LatticeVariant variant, double b, const Vec2& u, const Vec2& v, const Mat2& basis)
      : variant_(variant), b_(b), u_(u), v_(v), basis_(basis) {
    switch (variant_) {
      case LatticeVariant::H1: epsilon_s_ = 1.0; break;
      case LatticeVariant::H2: epsilon_s_ = b_; break;
      case LatticeVariant::H3: epsilon_s_ = shortest_vector_norm(basis_); break;
    }
  }

  // The shortest vector B*k satisfies |k|_inf <= sigma_max/sigma_min; the box
  // below is twice that.
  static double shortest_vector_norm(const Mat2& basis) {
    const Eigen::JacobiSVD<Mat2> svd(basis);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    const int bound = static_cast<int>(std::ceil(2.0 * smax / smin));
    double best = std::numeric_limits<double>::infinity();
    for (int i = -bound; i <= bound; ++i) {
      for (int j = -bound; j <= bound; ++j) {
        if (i == 0 && j == 0) continue;
        best = std::min(best, (basis * Vec2(i, j)).norm());
      }
    }
    return best;
  }

  void require_h3(const char* what) const {
    if (variant_ != LatticeVariant::H3) {
      throw Error(ErrorCode::invalid_lattice, std::string(what) + " requires an H3 lattice");
    }
  }

  void require_member(const Vec2& p) const {
    if (!contains(p)) {
      std::ostringstream os;
      os << "point (" << p.x() << ", " << p.y() << ") is not in S";
      throw Error(ErrorCode::off_lattice, os.str());
    }
  }

  LatticeVariant variant_;
  double b_;
  Vec2 u_;
  Vec2 v_;
  Mat2 basis_;
  double epsilon_s_ = 1.0;
};

}  // namespace mrwlab
