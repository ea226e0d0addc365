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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mrwlab/fixtures.hpp"
#include "mrwlab/spectral.hpp"
#include "oracles.hpp"

namespace {

using namespace mrwlab;
constexpr double kPi = std::numbers::pi;

double lazy_phi(const Vec2& t) { return (1.0 + std::cos(t.x()) + std::cos(t.y())) / 3.0; }

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mrwlab::Error thrown";
  return ErrorCode::numeric;
}

TEST(Spectral, FourierMatrixScalarCases) {
  const auto lazy = fixtures::lazy2d();
  EXPECT_NEAR(std::abs(fourier_matrix(lazy, Vec2::Zero()).entries(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fourier_matrix(lazy, Vec2(kPi, 0)).entries(0, 0) - 1.0 / 3.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fourier_matrix(fixtures::srw2d(), Vec2(kPi, kPi)).entries(0, 0) + 1.0), 0.0, 1e-15);
}

TEST(Spectral, FourierMatrixAtZeroIsKernel) {
  const auto ts1 = fixtures::ts1();
  const CMatrix q0 = fourier_matrix(ts1, Vec2::Zero()).entries;
  EXPECT_EQ((q0 - ts1.kernel().cast<cplx>()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spectral, FourierMatrixMatchesDirectAssembly) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (const auto& name : fixtures::finite_names()) {
    const auto m = *fixtures::by_name(name);
    for (int i = 0; i < 20; ++i) {
      const Vec2 t(u(gen), u(gen));
      const auto ref = oracle::twisted_kernel(m, t.x(), t.y());
      EXPECT_LT((fourier_matrix(m, t).entries - ref).cwiseAbs().maxCoeff(), 1e-14) << name;
      for (int x = 0; x < m.n_states(); ++x) {
        for (int y = 0; y < m.n_states(); ++y) {
          EXPECT_LE(std::abs(ref(x, y)), m.kernel()(x, y) + 1e-15);
        }
      }
    }
  }
}

TEST(Spectral, Periodicity) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_int_distribution<int> k(-5, 5);
  for (const auto& name : fixtures::finite_names()) {
    const auto m = *fixtures::by_name(name);
    const Mat2 a = m.lattice().dual_basis();
    for (int i = 0; i < 100; ++i) {
      const Vec2 t(u(gen), u(gen));
      const Vec2 g = a * Vec2(k(gen), k(gen));
      EXPECT_LT((fourier_matrix(m, t + g).entries - fourier_matrix(m, t).entries).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Spectral, RadiusAtMostOne) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (const auto& name : fixtures::finite_names()) {
    const auto m = *fixtures::by_name(name);
    for (int i = 0; i < 100; ++i) EXPECT_LE(spectral_radius(m, Vec2(u(gen), u(gen))), 1.0 + 1e-12);
  }
}

TEST(Spectral, SummaryAtZero) {
  const auto ts1 = fixtures::ts1();
  const auto s = spectral_summary(ts1, Vec2::Zero());
  ASSERT_TRUE(s.lambda_defined);
  EXPECT_NEAR(std::abs(s.lambda - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(s.radius, 1.0, 1e-14);
  const auto pi = stationary(ts1).pi;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) EXPECT_NEAR(std::abs(s.projector(x, y) - pi(y)), 0.0, 1e-10);
  }
}

TEST(Spectral, SummaryScalarCases) {
  const auto s = spectral_summary(fixtures::srw2d(), Vec2(kPi, kPi));
  EXPECT_NEAR(std::abs(s.lambda + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(s.radius, 1.0, 1e-15);
  const Vec2 t(0.1, 0.2);
  const auto l = spectral_summary(fixtures::lazy2d(), t);
  EXPECT_NEAR(l.radius, std::abs(lazy_phi(t)), 1e-15);
  EXPECT_NEAR(l.radius, 0.99169, 1e-5);
}

TEST(Spectral, ProjectorIdentities) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto ts1 = fixtures::ts1();
  for (int i = 0; i < 50; ++i) {
    const auto s = spectral_summary(ts1, Vec2(u(gen), u(gen)));
    ASSERT_TRUE(s.lambda_defined);
    const CMatrix q = fourier_matrix(ts1, s.t).entries;
    EXPECT_LT((s.projector * s.projector - s.projector).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((q * s.projector - s.lambda * s.projector).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Spectral, ProjectorIsContinuousAtZero) {
  const auto ts1 = fixtures::ts1();
  const auto pi = stationary(ts1).pi;
  std::mt19937_64 gen(4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10; ++i) {
    const Vec2 t = 1e-3 * Vec2(n(gen), n(gen)).normalized();
    const auto s = spectral_summary(ts1, t);
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) EXPECT_LT(std::abs(s.projector(x, y) - pi(y)), 1e-2);
    }
  }
}

TEST(Spectral, Covariance) {
  EXPECT_LT((covariance(fixtures::lazy2d()) - Mat2::Identity() / 3.0).cwiseAbs().maxCoeff(), 1e-14);
  Mat2 ts1_gamma;
  ts1_gamma << 2.0 / 7.0, 0.0, 0.0, 3.0 / 14.0;
  EXPECT_LT((covariance(fixtures::ts1()) - ts1_gamma).cwiseAbs().maxCoeff(), 1e-13);
  const auto line = fixtures::single_state({{Vec2(1, 0), 0.5}, {Vec2(-1, 0), 0.5}});
  Mat2 one;
  one << 1, 0, 0, 0;
  const Mat2 g = covariance(line);
  EXPECT_LT((g - one).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(is_degenerate(g));
}

TEST(Spectral, CovarianceRequiresCenteredErgodic) {
  const auto pushed = fixtures::single_state({{Vec2(1, 0), 1.0}}, Lattice::integer_grid(), Centering::skip);
  EXPECT_EQ(code_of([&] { (void)covariance(pushed); }), ErrorCode::not_centered);
}

// Markov-modulated walk whose steps depend on the transition, with
// correlated increments across time: checks the Z-terms of the formula.
FiniteMRW correlated() {
  Eigen::MatrixXd q(2, 2);
  q << 0.2, 0.8, 0.6, 0.4;
  const Lattice z2 = Lattice::integer_grid();
  return FiniteMRW(q,
                   {{0, 0, {{Vec2(1, 0), 0.5}, {Vec2(-1, 0), 0.5}}},
                    {0, 1, {{Vec2(1, 1), 1.0}}},
                    {1, 0, {{Vec2(-1, -1), 1.0}}},
                    {1, 1, {{Vec2(0, 1), 0.5}, {Vec2(0, -1), 0.5}}}},
                   z2);
}

TEST(Spectral, HessianMatchesFiniteDifferences) {
  const double h = 1e-4;
  const auto lambda = [](const FiniteMRW& m, const Vec2& t) { return dominant_eigenvalue(m, t); };
  std::vector<FiniteMRW> models = {fixtures::lazy2d(), fixtures::srw2d(), fixtures::ts1()};
  for (const auto& m : models) {
    const Mat2 gamma = covariance(m);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const Vec2 ej = h * Vec2::Unit(j), ek = h * Vec2::Unit(k);
        const cplx d2 = (lambda(m, ej + ek) - lambda(m, ej - ek) - lambda(m, -ej + ek) + lambda(m, -ej - ek)) / (4 * h * h);
        EXPECT_NEAR(-d2.real(), gamma(j, k), 1e-6);
        EXPECT_NEAR(d2.imag(), 0.0, 1e-6);
      }
    }
    EXPECT_LT(lambda_gradient(m).norm(), 1e-10);
  }
}

TEST(Spectral, CovarianceOfCorrelatedChainMatchesCurvature) {
  const auto m = correlated();
  const Mat2 gamma = covariance(m);
  const double h = 1e-4;
  for (int j = 0; j < 2; ++j) {
    const Vec2 e = h * Vec2::Unit(j);
    const cplx d2 = (dominant_eigenvalue(m, e) - 2.0 + dominant_eigenvalue(m, -e)) / (h * h);
    EXPECT_NEAR(-d2.real(), gamma(j, j), 1e-6);
  }
}

// Gamma = E_pi[v v^T] + sum_{k>=1} (C_k + C_k^T), C_k = E_pi[v_1 v_{1+k}^T], summed directly.
Mat2 long_run_covariance(const FiniteMRW& m) {
  const int n = m.n_states();
  const Eigen::VectorXd pi = stationary(m).pi;
  Eigen::MatrixXd mean(n, 2);  // E[v_1 | X_0 = x]
  mean.setZero();
  Mat2 second = Mat2::Zero();
  std::vector<Eigen::MatrixXd> edge_mean(static_cast<std::size_t>(n * n), Eigen::MatrixXd::Zero(1, 2));
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      for (const auto& a : m.atoms(x, y)) {
        mean.row(x) += m.kernel()(x, y) * a.p * a.v.transpose();
        second += pi(x) * m.kernel()(x, y) * a.p * a.v * a.v.transpose();
        edge_mean[static_cast<std::size_t>(x * n + y)] += a.p * a.v.transpose();
      }
    }
  }
  Mat2 cross = Mat2::Zero();
  Eigen::MatrixXd future = mean;  // Q^{k-1} mean
  for (int k = 1; k <= 400; ++k) {
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        cross += pi(x) * m.kernel()(x, y) * edge_mean[static_cast<std::size_t>(x * n + y)].transpose() * future.row(y);
      }
    }
    future = m.kernel() * future;
  }
  return second + cross + cross.transpose();
}

TEST(Spectral, CovarianceMatchesAutocovarianceSum) {
  for (const auto& m : {fixtures::ts1(), correlated(), fixtures::lazy2d()}) {
    EXPECT_LT((covariance(m) - long_run_covariance(m)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Spectral, GradientOfDriftedModelIsDrift) {
  // i * E[S_1]; computed without the centering requirement
  const auto pushed = fixtures::single_state({{Vec2(1, 0), 0.5}, {Vec2(0, 0), 0.5}}, Lattice::integer_grid(), Centering::skip);
  const double h = 1e-6;
  const cplx d = (dominant_eigenvalue(pushed, Vec2(h, 0)) - dominant_eigenvalue(pushed, Vec2(-h, 0))) / (2 * h);
  EXPECT_NEAR(d.imag(), 0.5, 1e-8);
}

TEST(Spectral, ExpansionCheck) {
  const auto lazy = fixtures::lazy2d();
  const auto r = expansion_check(lazy, covariance(lazy), 0.01, 21);
  EXPECT_GT(r.points, 0);
  EXPECT_LT(r.max_residual, 1e-5);
  EXPECT_GE(r.decay_rate, 0.16);
}

TEST(Spectral, ScanLazyIsNonArithmetic) {
  const auto lazy = fixtures::lazy2d();
  ScanOptions opt;
  opt.grid_n = 64;
  const auto r = arithmeticity_scan(lazy, opt);
  EXPECT_FALSE(r.arithmetic);
  for (const auto& g : r.g_points) EXPECT_LE(lazy.lattice().distance_to_dual(g.t), r.cell_diameter);
  EXPECT_GT(r.delta_margin, 0.0);
}

TEST(Spectral, ScanSrwFindsCorner) {
  const auto r = arithmeticity_scan(fixtures::srw2d(), {});
  EXPECT_TRUE(r.arithmetic);
  bool corner = false;
  for (const auto& g : r.g_points) corner = corner || std::abs(std::abs(g.t.x()) - kPi) < 1e-12 && std::abs(std::abs(g.t.y()) - kPi) < 1e-12;
  EXPECT_TRUE(corner);
}

TEST(Spectral, ScanDiagonalFindsLine) {
  const auto r = arithmeticity_scan(fixtures::diag2d(), {});
  EXPECT_TRUE(r.arithmetic);
  EXPECT_GE(r.g_points.size(), 64u);
  for (const auto& g : r.g_points) {
    const double phase = (g.t.x() + g.t.y()) / kPi;
    EXPECT_NEAR(phase, std::round(phase), 1e-9);
  }
}

TEST(Spectral, ScanResultDoesNotDependOnWorkers) {
  ScanOptions a, b;
  a.workers = 1;
  b.workers = 4;
  const auto ra = arithmeticity_scan(fixtures::ts1(), a), rb = arithmeticity_scan(fixtures::ts1(), b);
  ASSERT_EQ(ra.g_points.size(), rb.g_points.size());
  for (std::size_t i = 0; i < ra.g_points.size(); ++i) EXPECT_EQ(ra.g_points[i].t, rb.g_points[i].t);
  EXPECT_EQ(ra.delta_margin, rb.delta_margin);
}

TEST(Spectral, Witness) {
  const auto w = extract_witness(fixtures::srw2d(), Vec2(kPi, kPi));
  EXPECT_NEAR(std::abs(w.lambda + 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(w.beta), kPi, 1e-12);
  EXPECT_NEAR(std::abs(w.w(0) - 1.0), 0.0, 1e-15);
  const auto d = extract_witness(fixtures::diag2d(), Vec2(kPi / 2, kPi / 2));
  EXPECT_NEAR(std::abs(d.lambda), 1.0, 1e-12);
  EXPECT_EQ(code_of([] { (void)extract_witness(fixtures::lazy2d(), Vec2(kPi, kPi)); }), ErrorCode::not_arithmetic_at_t);
  EXPECT_EQ(code_of([] { (void)extract_witness(fixtures::lazy2d(), Vec2(2 * kPi, 0)); }), ErrorCode::invalid_argument);
}

TEST(Spectral, MarkovWitnessHasUnimodularEigenvector) {
  // Periodic-in-space two-state walk: the step sign flips with the state.
  Eigen::MatrixXd q(2, 2);
  q << 0.5, 0.5, 0.5, 0.5;
  const Lattice z2 = Lattice::integer_grid();
  std::vector<Atom> up = {{Vec2(1, 0), 0.5}, {Vec2(0, 1), 0.5}}, down = {{Vec2(-1, 0), 0.5}, {Vec2(0, -1), 0.5}};
  const FiniteMRW m(q, {{0, 0, up}, {0, 1, up}, {1, 0, down}, {1, 1, down}}, z2, Centering::skip);
  // every step has odd coordinate sum, so t = (pi, pi) gives |lambda| = 1
  const auto w = extract_witness(m, Vec2(kPi, kPi));
  EXPECT_NEAR(std::abs(w.lambda), 1.0, 1e-10);
  for (int x = 0; x < 2; ++x) EXPECT_NEAR(std::abs(w.w(x)), 1.0, 1e-10);
}

TEST(Spectral, Normalizers) {
  EXPECT_DOUBLE_EQ(normalizer(NormalizerKind::standard, 100), 10.0);
  EXPECT_NEAR(normalizer(NormalizerKind::nlogn, std::exp(2.0)), std::sqrt(2 * std::exp(2.0)), 1e-12);
  EXPECT_NEAR(normalizer(NormalizerKind::nlogn, 7), 3.690, 1e-3);
  EXPECT_EQ(code_of([] { (void)normalizer(NormalizerKind::nlogn, 1); }), ErrorCode::domain);
  double h = 0.0;
  for (int n = 1; n <= 1000; ++n) h += 1.0 / n;
  EXPECT_NEAR(weight_sum(NormalizerKind::standard, 1, 1000), h, 1e-12);
  EXPECT_EQ(parse_normalizer("nlogn"), NormalizerKind::nlogn);
  EXPECT_EQ(code_of([] { (void)parse_normalizer("cubic"); }), ErrorCode::invalid_argument);
}

}  // namespace
