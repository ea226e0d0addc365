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

#include <gtest/gtest.h>

#include "mrwlab/exactdist.hpp"
#include "mrwlab/fixtures.hpp"
#include "mrwlab/montecarlo.hpp"
#include "mrwlab/random.hpp"
#include "oracles.hpp"

namespace {

using namespace mrwlab;

TEST(Random, PhiloxKnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Random, StreamsAreDistinctAndRepeatable) {
  RandomStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    (void)c;
    (void)d;
  }
  RandomStream e(42, 0), f(42, 1), g(43, 0);
  int same_stream = 0, same_seed = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = e.next_u32();
    same_stream += x == f.next_u32();
    same_seed += x == g.next_u32();
  }
  EXPECT_LT(same_stream, 3);
  EXPECT_LT(same_seed, 3);
}

TEST(Random, UniformAndNormalMoments) {
  RandomStream r(7, 3);
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u, su2 += u * u;
    const double z = r.normal();
    sn += z, sn2 += z * z, sn4 += z * z * z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(su2 / n, 1.0 / 3.0, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.015);
  EXPECT_NEAR(sn4 / n, 3.0, 0.08);
}

TEST(MonteCarlo, SeedDeterminismAcrossWorkerCounts) {
  SimOptions opt;
  opt.n_steps = 200;
  opt.n_traj = 300;
  opt.seed = 99;
  opt.checkpoints = {50, 200};
  opt.targets = {{Vec2::Zero(), 0.5}};
  opt.workers = 1;
  const auto a = simulate(fixtures::ts1(), opt);
  opt.workers = 3;
  const auto b = simulate(fixtures::ts1(), opt);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 0; t < 300; ++t) EXPECT_EQ(a.sums[c][t], b.sums[c][t]);
  }
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.pair_sum, b.pair_sum);
  opt.seed = 100;
  const auto c = simulate(fixtures::ts1(), opt);
  EXPECT_NE(a.sums[1][0], c.sums[1][0]);
}

TEST(MonteCarlo, LazyReturnProbabilityAgainstOracle) {
  SimOptions opt;
  opt.n_steps = 100;
  opt.n_traj = 10000;
  opt.seed = 5;
  opt.targets = {{Vec2::Zero(), 0.5}};
  const auto batch = simulate(fixtures::lazy2d(), opt);
  const auto hits = empirical_hits(batch, Lattice::integer_grid(), Vec2::Zero(), 0.5);
  const double p = oracle::lazy_point(100, 0, 0);
  EXPECT_LT(std::abs(hits.p_hat.back() - p), 3.0 * std::sqrt(p * (1 - p) / 10000));
}

TEST(MonteCarlo, FiniteSimulationAgreesWithExactDistribution) {
  const auto ts1 = fixtures::ts1();
  SimOptions opt;
  opt.n_steps = 40;
  opt.n_traj = 20000;
  opt.seed = 8;
  opt.checkpoints = {10, 40};
  const auto batch = simulate(ts1, opt);
  LatticeDistribution d = LatticeDistribution::initial(stationary(ts1).pi);
  long n = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    while (n < batch.checkpoints[c]) d = evolve(ts1, d, {}), ++n;
    std::map<std::pair<long, long>, long> counts;
    for (const auto& s : batch.sums[c]) ++counts[{std::lround(s.x()), std::lround(s.y())}];
    const Window& w = d.window();
    for (int i = w.lo.x(); i <= w.hi.x(); ++i) {
      for (int j = w.lo.y(); j <= w.hi.y(); ++j) {
        const double p = d.mass(0, Vec2i(i, j)) + d.mass(1, Vec2i(i, j));
        if (p < 1e-3) continue;
        const double phat = static_cast<double>(counts[{i, j}]) / opt.n_traj;
        EXPECT_LT(std::abs(phat - p), 4.0 * std::sqrt(p * (1 - p) / opt.n_traj)) << i << "," << j;
      }
    }
  }
}

TEST(MonteCarlo, LazyCovarianceStabilizes) {
  SimOptions opt;
  opt.n_steps = 4000;
  opt.n_traj = 4000;
  opt.seed = 12;
  opt.checkpoints = {1000, 4000};
  const auto batch = simulate(fixtures::lazy2d(), opt);
  const auto clt = empirical_clt(batch, NormalizerKind::standard);
  for (const auto& c : clt.checkpoints) {
    EXPECT_NEAR(c.cov(0, 0), 1.0 / 3.0, 0.05 / 3.0 * 2);
    EXPECT_NEAR(c.cov(1, 1), 1.0 / 3.0, 0.05 / 3.0 * 2);
    EXPECT_NEAR(c.cov(0, 1), 0.0, 0.02);
    EXPECT_GT(c.p_value, 0.001);
  }
}

TEST(MonteCarlo, DegenerateAffineIsIidClt) {
  AffineRecursion zero;
  zero.sample = [](RandomStream& r) {
    AffineDraw d;
    d.a.setZero();
    const double b0 = r.normal();
    d.b = Vec2(b0, r.normal());
    return d;
  };
  zero.m0 = Vec2::Zero();
  SimOptions opt;
  opt.n_steps = 400;
  opt.n_traj = 4000;
  opt.seed = 2;
  opt.checkpoints = {100, 400};
  opt.skip_audit = true;  // E|A|^2 = 0 by construction
  const auto clt = empirical_clt(simulate(zero, opt), NormalizerKind::standard);
  for (const auto& c : clt.checkpoints) EXPECT_LT((c.cov - Mat2::Identity()).cwiseAbs().maxCoeff(), 0.08);
  EXPECT_NEAR(clt.stabilization.front(), 1.0, 0.08);
}

TEST(MonteCarlo, AffineAuditRejectsExpandingMaps) {
  AffineRecursion big;
  big.sample = [](RandomStream& r) {
    AffineDraw d;
    d.a = 1.2 * Mat2::Identity();
    d.b = Vec2(r.normal(), 0);
    return d;
  };
  big.m0 = Vec2::Zero();
  EXPECT_FALSE(affine_audit(big, 10000).passed);
  SimOptions opt;
  opt.n_steps = 10;
  opt.n_traj = 10;
  EXPECT_THROW((void)simulate(big, opt), Error);
}

TEST(MonteCarlo, Af1Audit) {
  const auto audit = affine_audit(fixtures::af1(), 1000000);
  EXPECT_GE(audit.mean_a2, 0.99);
  EXPECT_LE(audit.mean_a2, 1.01);
  EXPECT_TRUE(std::isfinite(audit.mean_a2_log));
  EXPECT_NEAR(audit.mean_b2, 2.0, 0.02);
}

TEST(MonteCarlo, AffineMeanEstimate) {
  AffineRecursion shifted;
  shifted.sample = [](RandomStream& r) {
    AffineDraw d;
    d.a = 0.5 * Mat2::Identity();
    d.b = Vec2(1.0 + r.normal(), -2.0);
    return d;
  };
  // stationary mean solves m = m/2 + E[B]
  EXPECT_LT((estimate_affine_mean(shifted, 1000, 200000) - Vec2(2.0, -4.0)).norm(), 0.02);
}

TEST(MonteCarlo, LipschitzIfsClt) {
  const auto ifs = fixtures::ifs1();
  EXPECT_LT(lipschitz_audit(ifs), 1.0);
  SimOptions opt;
  opt.n_steps = 2000;
  opt.n_traj = 3000;
  opt.seed = 31;
  opt.checkpoints = {500, 2000};
  const auto batch = simulate(ifs, opt);
  const auto clt = empirical_clt(batch, NormalizerKind::standard);
  EXPECT_NEAR(clt.stabilization.front(), 1.0, 0.1);

  // long-run variance by batch means along one long path
  RandomStream rng(77, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const int blocks = 400, len = 500;
  std::vector<double> means;
  for (int b = 0; b < blocks; ++b) {
    double s = 0;
    for (int k = 0; k < len; ++k) {
      x = ifs.map(x, ifs.sample_noise(rng));
      s += ifs.observable(x).x();
    }
    means.push_back(s / std::sqrt(static_cast<double>(len)));
  }
  double mean = 0, var = 0;
  for (double m : means) mean += m / blocks;
  for (double m : means) var += (m - mean) * (m - mean) / (blocks - 1);
  EXPECT_NEAR(clt.checkpoints.back().cov(0, 0) / var, 1.0, 0.15);
}

TEST(MonteCarlo, ExpandingIfsFailsAudit) {
  auto ifs = fixtures::ifs1();
  ifs.map = [](const Eigen::VectorXd& x, const Eigen::VectorXd& e) -> Eigen::VectorXd { return 1.5 * x + e; };
  SimOptions opt;
  opt.n_steps = 10;
  opt.n_traj = 10;
  try {
    (void)simulate(ifs, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::hypothesis_violation);
  }
}

TEST(MonteCarlo, OverflowingTrajectoriesAreExcluded) {
  AffineRecursion wild;
  wild.sample = [](RandomStream& r) {
    AffineDraw d;
    d.a = (r.uniform() < 0.95 ? 100.0 : 0.0) * Mat2::Identity();
    d.b = Vec2(1.0, 0.0);
    return d;
  };
  wild.m0 = Vec2::Zero();
  SimOptions opt;
  opt.n_steps = 200;
  opt.n_traj = 50;
  opt.skip_audit = true;
  const auto batch = simulate(wild, opt);
  EXPECT_GT(batch.n_excluded, 0);
  EXPECT_EQ(batch.used() + batch.n_excluded, 50);
}

TEST(MonteCarlo, Af1HitFrequenciesDecayLikeInverseNLogN) {
  SimOptions opt;
  opt.n_steps = 4096;
  opt.n_traj = 3000;
  opt.seed = 61;
  opt.targets = {{Vec2::Zero(), 1.0}};
  const auto batch = simulate(fixtures::af1(), opt);
  const auto h = empirical_hits(batch, Lattice::plane(), Vec2::Zero(), 1.0);
  // dyadic bins [2^k, 2^{k+1}) from 64 on; regress log(mean p) on log(bin centre)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int bins = 0;
  for (long lo = 64; lo < 4096; lo *= 2) {
    double mean = 0;
    for (long n = lo; n < 2 * lo; ++n) mean += h.p_hat[static_cast<std::size_t>(n - 1)];
    mean /= static_cast<double>(lo);
    const double centre = std::log(1.5 * static_cast<double>(lo));
    const double y = std::log(mean);
    sx += centre, sy += y, sxx += centre * centre, sxy += centre * y;
    ++bins;
  }
  const double slope = (bins * sxy - sx * sy) / (bins * sxx - sx * sx);
  // 1/(n log n) has local slope -1 - 1/log n, about -1.15 here
  EXPECT_GT(slope, -1.4);
  EXPECT_LT(slope, -0.9);
}

TEST(MonteCarlo, HugeBallIsAlwaysHit) {
  SimOptions opt;
  opt.n_steps = 50;
  opt.n_traj = 100;
  opt.targets = {{Vec2::Zero(), 1e6}};
  const auto batch = simulate(fixtures::ifs1(), opt);
  const auto h = empirical_hits(batch, Lattice::plane(), Vec2::Zero(), 1e6);
  for (double p : h.p_hat) EXPECT_EQ(p, 1.0);
}

TEST(MonteCarlo, UnderpoweredDiagnostic) {
  SimOptions opt;
  opt.n_steps = 5;
  opt.n_traj = 10;
  opt.targets = {{Vec2(50, 50), 0.5}};
  const auto batch = simulate(fixtures::lazy2d(), opt);
  try {
    (void)empirical_hits(batch, Lattice::integer_grid(), Vec2(50, 50), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::underpowered);
    EXPECT_NE(std::string(e.what()).find("n_traj"), std::string::npos);
  }
}

TEST(MonteCarlo, PairCountsMatchExactJointSums) {
  const auto lazy = fixtures::lazy2d();
  SimOptions opt;
  opt.n_steps = 60;
  opt.n_traj = 40000;
  opt.seed = 4;
  opt.start_state = 0;
  opt.targets = {{Vec2::Zero(), 0.5}};
  const auto batch = simulate(lazy, opt);
  const auto mc = monte_carlo_kochen_stone(batch, Vec2::Zero(), 0.5);
  const auto exact = kochen_stone_inputs(lazy, 0, {Vec2::Zero()}, 30).front();
  ASSERT_EQ(mc.inputs.joint_cumulative.size(), 30u);
  for (std::size_t i : {4u, 14u, 29u}) {
    const double se = (mc.joint_upper[i] - mc.inputs.joint_cumulative[i]) / 1.96;
    EXPECT_LT(std::abs(mc.inputs.joint_cumulative[i] - exact.joint_cumulative[i]), 4 * se + 1e-12) << i;
    EXPECT_LE(mc.p_lower[i], mc.inputs.p[i]);
  }
}

TEST(MonteCarlo, WilsonInterval) {
  const auto [lo, hi] = wilson_interval(0, 100);
  EXPECT_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 0.0370, 1e-4);
  const auto [a, b] = wilson_interval(50, 100);
  EXPECT_NEAR(a, 0.4038, 1e-4);
  EXPECT_NEAR(b, 0.5962, 1e-4);
}

TEST(MonteCarlo, DegenerateSampleCovariance) {
  SimOptions opt;
  opt.n_steps = 100;
  opt.n_traj = 200;
  opt.checkpoints = {50, 100};
  const auto batch = simulate(fixtures::single_state({{Vec2(1, 0), 0.5}, {Vec2(-1, 0), 0.5}}), opt);
  try {
    (void)empirical_clt(batch, NormalizerKind::standard);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_covariance);
  }
}

TEST(MonteCarlo, MardiaKurtosisOfGaussianSample) {
  RandomStream r(1, 1);
  std::vector<Vec2> xs;
  for (int i = 0; i < 20000; ++i) {
    const double a = r.normal();
    xs.push_back(Vec2(a, 0.5 * a + r.normal()));
  }
  EXPECT_NEAR(mardia_kurtosis(xs), 8.0, 0.2);
  EXPECT_NEAR(robust_covariance(xs)(0, 1), 0.5, 0.05);
}

}  // namespace
