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
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/lattice.hpp"
#include "mrwlab/parallel.hpp"

namespace mrwlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Q(t): entry (x,y) is Q(x,y) * E[exp(i<t, v>) | x, y].
struct FourierMatrix {
  Vec2 t;
  CMatrix entries;
};

inline FourierMatrix fourier_matrix(const FiniteMRW& model, const Vec2& t) {
  const int n = model.n_states();
  CMatrix m = CMatrix::Zero(n, n);
  for (const auto& e : model.edges()) {
    cplx phi = 0.0;
    for (const auto& a : e.atoms) phi += a.p * std::polar(1.0, t.dot(a.v));
    m(e.from, e.to) = model.kernel()(e.from, e.to) * phi;
  }
  return {t, std::move(m)};
}

/// Eigen-structure of Q(t) around its dominant eigenvalue.
struct SpectralSummary {
  Vec2 t;
  bool lambda_defined = false;
  cplx lambda{0.0, 0.0};
  CMatrix projector;  // Pi(t); empty when lambda is undefined
  double radius = 0.0;
  double gap = 0.0;   // modulus of the second eigenvalue
  CVector eigenvalues;  // sorted by decreasing modulus
};

inline constexpr double kLambdaSeparation = 1e-9;

namespace detail {

struct SortedEigen {
  CVector values;
  CMatrix vectors;
};

inline SortedEigen sorted_eigen(const CMatrix& m, bool with_vectors) {
  const Eigen::ComplexEigenSolver<CMatrix> solver(m, with_vectors);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::numeric, "complex eigen solver did not converge");
  const auto n = solver.eigenvalues().size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(solver.eigenvalues()(a)) > std::abs(solver.eigenvalues()(b));
  });
  SortedEigen out;
  out.values.resize(n);
  if (with_vectors) out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(order[static_cast<std::size_t>(i)]);
    if (with_vectors) out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace detail

inline SpectralSummary spectral_summary(const FiniteMRW& model, const Vec2& t) {
  const FourierMatrix q = fourier_matrix(model, t);
  const auto eig = detail::sorted_eigen(q.entries, true);
  SpectralSummary s;
  s.t = t;
  s.eigenvalues = eig.values;
  s.radius = std::abs(eig.values(0));
  s.gap = eig.values.size() > 1 ? std::abs(eig.values(1)) : 0.0;
  if (eig.values.size() == 1 || s.radius - s.gap > kLambdaSeparation) {
    const CMatrix inverse = eig.vectors.inverse();
    if (!inverse.allFinite()) throw Error(ErrorCode::numeric, "eigenvector matrix of Q(t) is singular");
    s.lambda_defined = true;
    s.lambda = eig.values(0);
    s.projector = eig.vectors.col(0) * inverse.row(0);
  }
  return s;
}

/// Spectral radius of Q(t) without eigenvectors.
inline double spectral_radius(const FiniteMRW& model, const Vec2& t) {
  const FourierMatrix q = fourier_matrix(model, t);
  if (q.entries.rows() == 1) return std::abs(q.entries(0, 0));
  return std::abs(detail::sorted_eigen(q.entries, false).values(0));
}

/// Dominant eigenvalue lambda(t); throws shrink_radius when it is not simple.
inline cplx dominant_eigenvalue(const FiniteMRW& model, const Vec2& t) {
  const FourierMatrix q = fourier_matrix(model, t);
  if (q.entries.rows() == 1) return q.entries(0, 0);
  const auto eig = detail::sorted_eigen(q.entries, false);
  if (std::abs(eig.values(0)) - std::abs(eig.values(1)) <= kLambdaSeparation) {
    std::ostringstream os;
    os << "dominant eigenvalue is not simple at t = (" << t.x() << ", " << t.y() << ")";
    throw Error(ErrorCode::shrink_radius, os.str());
  }
  return eig.values(0);
}

// ---------------------------------------------------------------------------
// Perturbation at t = 0

namespace detail {

inline void require_centered_ergodic(const FiniteMRW& model, const StationaryLaw& law) {
  (void)ergodicity_gap(model);
  const Vec2 d = drift(model, law);
  if (d.norm() > FiniteMRW::kDriftTol) {
    std::ostringstream os;
    os << "drift (" << d.x() << ", " << d.y() << ") is not zero";
    throw Error(ErrorCode::not_centered, os.str());
  }
}

/// Fundamental matrix Z = (I - Q + Pi)^{-1}.
inline Eigen::MatrixXd fundamental_matrix(const Eigen::MatrixXd& q, const Eigen::VectorXd& pi) {
  const auto n = q.rows();
  const Eigen::MatrixXd proj = Eigen::VectorXd::Ones(n) * pi.transpose();
  return (Eigen::MatrixXd::Identity(n, n) - q + proj).inverse();
}

}  // namespace detail

/// Gradient of lambda at 0: i * E_{(pi,0)}[S_1].
inline Eigen::Vector2cd lambda_gradient(const FiniteMRW& model) {
  const StationaryLaw law = stationary(model);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.n_states());
  Eigen::Vector2cd g;
  for (int j = 0; j < 2; ++j) g(j) = cplx(0.0, law.pi.dot(model.first_moment(j) * ones));
  return g;
}

/// Asymptotic covariance Gamma = -Hess lambda(0), from first- and
/// second-order eigenvalue perturbation of Q(t) at t = 0:
///   Gamma_jk = pi M2_jk 1 + pi M1_j Z M1_k 1 + pi M1_k Z M1_j 1,
/// where M1_j = Q * E[v_j], M2_jk = Q * E[v_j v_k] edgewise.
inline Mat2 covariance(const FiniteMRW& model) {
  const StationaryLaw law = stationary(model);
  detail::require_centered_ergodic(model, law);
  const Eigen::MatrixXd z = detail::fundamental_matrix(model.kernel(), law.pi);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.n_states());
  const Eigen::MatrixXd m1[2] = {model.first_moment(0), model.first_moment(1)};
  Mat2 gamma;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const double direct = law.pi.dot(model.second_moment(j, k) * ones);
      const double cross = law.pi.dot(m1[j] * z * m1[k] * ones) + law.pi.dot(m1[k] * z * m1[j] * ones);
      gamma(j, k) = direct + cross;
    }
  }
  return 0.5 * (gamma + gamma.transpose());
}

inline bool is_degenerate(const Mat2& gamma, double tol = 1e-12) { return !(gamma.determinant() > tol); }

struct ExpansionReport {
  double max_residual = 0.0;  // max |lambda(t) - 1 + <t, Gamma t>/2| / |t|^2
  Vec2 worst_t = Vec2::Zero();
  double decay_rate = 0.0;    // largest a with |lambda(t)| <= exp(-a |t|^2) on the grid
  int points = 0;
};

/// Second-order expansion of lambda(t) on a grid_n x grid_n grid over B(0, radius).
inline ExpansionReport expansion_check(const FiniteMRW& model, const Mat2& gamma, double radius, int grid_n) {
  if (!(radius > 0.0) || grid_n < 2) throw Error(ErrorCode::invalid_argument, "need radius > 0 and grid_n >= 2");
  ExpansionReport report;
  report.decay_rate = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vec2 t(radius * (-1.0 + 2.0 * i / (grid_n - 1)), radius * (-1.0 + 2.0 * j / (grid_n - 1)));
      const double r2 = t.squaredNorm();
      if (r2 > radius * radius * (1.0 + 1e-12) || r2 == 0.0) continue;
      const cplx lambda = dominant_eigenvalue(model, t);
      const double residual = std::abs(lambda - 1.0 + 0.5 * t.dot(gamma * t)) / r2;
      if (residual > report.max_residual) {
        report.max_residual = residual;
        report.worst_t = t;
      }
      report.decay_rate = std::min(report.decay_rate, -std::log(std::abs(lambda)) / r2);
      ++report.points;
    }
  }
  if (report.points == 0) report.decay_rate = 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Arithmeticity

struct ScanOptions {
  int grid_n = 64;
  double tol = 1e-6;
  /// Radius of the neighbourhood of S* excluded from the margin; defaults to one grid cell.
  std::optional<double> alpha;
  /// Half-width of the scanned window along directions where S* is trivial (H1, and v for H2).
  double window = std::numbers::pi;
  int workers = 0;
};

struct GPoint {
  Vec2 t;
  double radius;
};

struct ScanReport {
  int grid_n = 0;
  double tol = 0.0;
  std::vector<GPoint> g_points;
  bool arithmetic = false;
  double delta_margin = 1.0;  // 1 - max r(Q(t)) over grid points at distance >= alpha from S*
  Vec2 delta_argmax = Vec2::Zero();
  double alpha = 0.0;
  double cell_diameter = 0.0;
  double lipschitz_slack = 0.0;
};

inline std::string_view verdict_name(const ScanReport& r) { return r.arithmetic ? "ARITHMETIC" : "NON_ARITHMETIC"; }

/// Scans r(Q(t)) over the fundamental domain of R^2/S*. The walk is
/// non-arithmetic iff r(Q(t)) < 1 off S*; G points are the grid points with
/// r >= 1 - tol.
inline ScanReport arithmeticity_scan(const FiniteMRW& model, const ScanOptions& opt = {}) {
  if (opt.grid_n < 2) throw Error(ErrorCode::invalid_argument, "grid_n must be at least 2");
  const Lattice& lat = model.lattice();
  const int n = opt.grid_n;
  Vec2 e1, e2, origin;
  switch (lat.variant()) {
    case LatticeVariant::H3: {
      const Mat2 a = lat.dual_basis();
      e1 = a.col(0) / n;
      e2 = a.col(1) / n;
      origin = -0.5 * (a.col(0) + a.col(1));
      break;
    }
    case LatticeVariant::H2: {
      const double a = lat.dual_pitch();
      e1 = a / n * lat.u();
      e2 = 2.0 * opt.window / n * lat.v();
      origin = -0.5 * a * lat.u() - opt.window * lat.v();
      break;
    }
    case LatticeVariant::H1: {
      e1 = Vec2(2.0 * opt.window / n, 0.0);
      e2 = Vec2(0.0, 2.0 * opt.window / n);
      origin = Vec2(-opt.window, -opt.window);
      break;
    }
  }
  ScanReport report;
  report.grid_n = n;
  report.tol = opt.tol;
  report.cell_diameter = std::max((e1 + e2).norm(), (e1 - e2).norm());
  report.alpha = opt.alpha.value_or(report.cell_diameter);

  std::vector<double> radii(static_cast<std::size_t>(n) * n);
  parallel_for(static_cast<std::size_t>(n), opt.workers, [&](std::size_t i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 t = origin + static_cast<double>(i) * e1 + j * e2;
      radii[i * n + static_cast<std::size_t>(j)] = spectral_radius(model, t);
    }
  });

  double worst = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 t = origin + i * e1 + j * e2;
      const double r = radii[static_cast<std::size_t>(i) * n + j];
      const double dist = lat.distance_to_dual(t);
      if (r >= 1.0 - opt.tol) {
        report.g_points.push_back({t, r});
        if (dist > report.cell_diameter * (1.0 + 1e-9)) report.arithmetic = true;
      }
      if (dist >= report.alpha && r > worst) {
        worst = r;
        report.delta_argmax = t;
      }
    }
  }
  report.delta_margin = worst < 0.0 ? 1.0 : 1.0 - worst;

  // |d/dt Q(t)| is bounded row-wise by E[|S_1| | X_0 = x].
  double lip = 0.0;
  for (int x = 0; x < model.n_states(); ++x) {
    double row = 0.0;
    for (int y = 0; y < model.n_states(); ++y) {
      for (const auto& a : model.atoms(x, y)) row += model.kernel()(x, y) * a.p * a.v.norm();
    }
    lip = std::max(lip, row);
  }
  report.lipschitz_slack = 0.5 * lip * report.cell_diameter;
  return report;
}

/// Unimodular eigen-pair of Q(t) at t outside S*: Q(t) w = lambda w with |w| = 1.
struct ArithmeticWitness {
  Vec2 t;
  cplx lambda;
  double beta;           // arg lambda
  CVector w;             // normalized so that w(0) = 1
  Eigen::VectorXd phase; // arg w(x); the correction chi(x) satisfies <t, chi(x)> = phase(x) mod 2*pi
};

inline ArithmeticWitness extract_witness(const FiniteMRW& model, const Vec2& t, double tol = 1e-6) {
  if (model.lattice().distance_to_dual(t) < 1e-9) {
    throw Error(ErrorCode::invalid_argument, "witness frequency must lie outside S*");
  }
  const FourierMatrix q = fourier_matrix(model, t);
  const auto eig = detail::sorted_eigen(q.entries, true);
  const double radius = std::abs(eig.values(0));
  if (radius < 1.0 - tol) {
    std::ostringstream os;
    os << "r(Q(t)) = " << radius << " < 1 - tol at t = (" << t.x() << ", " << t.y() << ")";
    throw Error(ErrorCode::not_arithmetic_at_t, os.str());
  }
  ArithmeticWitness wit;
  wit.t = t;
  wit.lambda = eig.values(0);
  wit.beta = std::arg(wit.lambda);
  CVector w = eig.vectors.col(0);
  if (std::abs(w(0)) < 1e-12) throw Error(ErrorCode::hypothesis_violation, "eigenvector vanishes at state 0");
  w /= w(0);
  const double residual = (q.entries * w - wit.lambda * w).cwiseAbs().maxCoeff();
  const double spread = (w.cwiseAbs().array() - 1.0).abs().maxCoeff();
  if (residual > 1e-8 || spread > 1e-6) {
    std::ostringstream os;
    os << "unimodular eigenvector check failed (residual " << residual << ", | |w| - 1 | up to " << spread << ")";
    throw Error(ErrorCode::hypothesis_violation, os.str());
  }
  wit.w = w;
  wit.phase.resize(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) wit.phase(i) = std::arg(w(i));
  return wit;
}

// ---------------------------------------------------------------------------
// Normalization sequences

enum class NormalizerKind { standard, nlogn };

inline NormalizerKind parse_normalizer(std::string_view name) {
  if (name == "standard") return NormalizerKind::standard;
  if (name == "nlogn") return NormalizerKind::nlogn;
  throw Error(ErrorCode::invalid_argument, "unknown normalizer '" + std::string(name) + "'");
}

inline std::string_view to_string(NormalizerKind k) { return k == NormalizerKind::standard ? "standard" : "nlogn"; }

/// A_n: sqrt(n) or sqrt(n log n).
inline double normalizer(NormalizerKind kind, double n) {
  if (kind == NormalizerKind::standard) {
    if (!(n >= 1.0)) throw Error(ErrorCode::domain, "standard normalizer needs n >= 1");
    return std::sqrt(n);
  }
  if (!(n >= 2.0)) throw Error(ErrorCode::domain, "nlogn normalizer needs n >= 2");
  return std::sqrt(n * std::log(n));
}

/// a_n = A_n^{-2}.
inline double llt_weight(NormalizerKind kind, double n) {
  const double a = normalizer(kind, n);
  return 1.0 / (a * a);
}

/// sum_{n=first}^{last} a_n.
inline double weight_sum(NormalizerKind kind, long first, long last) {
  double total = 0.0;
  for (long n = first; n <= last; ++n) total += llt_weight(kind, static_cast<double>(n));
  return total;
}

}  // namespace mrwlab
