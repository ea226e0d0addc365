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
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/exactdist.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/random.hpp"
#include "mrwlab/recurrence.hpp"
#include "mrwlab/spectral.hpp"

namespace mrwlab {

/// Iterated Lipschitz maps X_n = F(X_{n-1}, noise_n) observed through xi.
struct LipschitzIFS {
  int dim = 1;
  std::function<Eigen::VectorXd(RandomStream&)> sample_noise;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> map;
  std::function<Vec2(const Eigen::VectorXd&)> observable;
  /// Draws points for the contraction audit.
  std::function<Eigen::VectorXd(RandomStream&)> sample_state;
};

/// One draw (A, B) of an affine recursion X_n = A_n X_{n-1} + B_n.
struct AffineDraw {
  Mat2 a;
  Vec2 b;
};

struct AffineRecursion {
  std::function<AffineDraw(RandomStream&)> sample;
  /// Mean of the stationary law; estimated by a burn-in run when empty.
  std::optional<Vec2> m0;
};

using SimModel = std::variant<FiniteMRW, LipschitzIFS, AffineRecursion>;

// ---------------------------------------------------------------------------
// Audits

/// Largest |F(x, e) - F(y, e)| / |x - y| over sampled (x, y, e).
inline double lipschitz_audit(const LipschitzIFS& ifs, int samples = 10000, std::uint64_t seed = 0x1f5) {
  RandomStream rng(seed, 0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd noise = ifs.sample_noise(rng);
    const Eigen::VectorXd x = ifs.sample_state(rng), y = ifs.sample_state(rng);
    const double d = (x - y).norm();
    if (d == 0.0) continue;
    worst = std::max(worst, (ifs.map(x, noise) - ifs.map(y, noise)).norm() / d);
  }
  return worst;
}

struct AffineAudit {
  long draws = 0;
  double mean_a2 = 0.0;       // E|A|^2 (operator norm)
  double se_a2 = 0.0;
  double mean_a2_log = 0.0;   // E[|A|^2 log|A|]
  double mean_b2 = 0.0;       // E|B|^2
  bool passed = false;
};

inline AffineAudit affine_audit(const AffineRecursion& model, long draws = 1000000, std::uint64_t seed = 0xaff1) {
  RandomStream rng(seed, 0);
  AffineAudit audit;
  audit.draws = draws;
  double s2 = 0.0, s4 = 0.0;
  for (long i = 0; i < draws; ++i) {
    const AffineDraw d = model.sample(rng);
    const double norm = Eigen::JacobiSVD<Mat2>(d.a).singularValues()(0);
    const double n2 = norm * norm;
    s2 += n2;
    s4 += n2 * n2;
    audit.mean_a2_log += norm > 0.0 ? n2 * std::log(norm) : 0.0;
    audit.mean_b2 += d.b.squaredNorm();
  }
  const double n = static_cast<double>(draws);
  audit.mean_a2 = s2 / n;
  audit.se_a2 = std::sqrt(std::max(0.0, s4 / n - audit.mean_a2 * audit.mean_a2) / n);
  audit.mean_a2_log /= n;
  audit.mean_b2 /= n;
  audit.passed = std::abs(audit.mean_a2 - 1.0) <= 4.0 * audit.se_a2 + 1e-12 && std::isfinite(audit.mean_a2_log) &&
                 std::isfinite(audit.mean_b2);
  return audit;
}

/// Long-run average of X_n after a burn-in; stands in for m0 when it is not supplied.
inline Vec2 estimate_affine_mean(const AffineRecursion& model, long burn_in = 10000, long steps = 1000000,
                                 std::uint64_t seed = 0x3a0) {
  RandomStream rng(seed, 0);
  Vec2 x = Vec2::Zero(), sum = Vec2::Zero();
  for (long i = 0; i < burn_in + steps; ++i) {
    const AffineDraw d = model.sample(rng);
    x = d.a * x + d.b;
    if (i >= burn_in) sum += x;
  }
  return sum / static_cast<double>(steps);
}

// ---------------------------------------------------------------------------
// Simulation

/// Open ball B(s, eps) whose visits are counted at every step.
struct HitTarget {
  Vec2 s = Vec2::Zero();
  double eps = 0.5;
};

struct SimOptions {
  long n_steps = 100;
  long n_traj = 1000;
  std::uint64_t seed = 1;
  std::vector<long> checkpoints;  // times at which S_n is stored; defaults to {n_steps}
  std::vector<HitTarget> targets;
  std::optional<int> start_state;       // finite chains; drawn from pi when empty
  std::optional<Eigen::VectorXd> x0;    // continuous models; zero when empty
  bool skip_audit = false;
  int workers = 0;
};

struct TrajectoryBatch {
  std::uint64_t seed = 0;
  long n_traj = 0;
  long n_steps = 0;
  std::vector<long> checkpoints;
  std::vector<std::vector<Vec2>> sums;  // [checkpoint][trajectory]
  std::vector<char> excluded;           // overflowed trajectories, left out of every statistic
  long n_excluded = 0;
  std::vector<HitTarget> targets;
  std::vector<std::vector<long>> hits;  // [target][n-1]: trajectories inside B(s, eps) at time n
  /// [target][N-1] for N <= n_steps/2: sum over trajectories of the pair count
  /// c(N) = #{n <= N, 1 <= m <= N : S_n and S_{n+m} both in the ball}, and of c(N)^2.
  std::vector<std::vector<double>> pair_sum;
  std::vector<std::vector<double>> pair_sq;
  long used() const { return n_traj - n_excluded; }
};

namespace detail {

inline constexpr double kOverflow = 1e150;

struct TrajectoryState {
  std::vector<std::vector<long>> hit_times;  // per target
};

struct Stepper {
  // Returns the increment of S for this step.
  std::function<Vec2(RandomStream&)> step;
};

/// Cumulative tables for sampling a finite chain, built once per batch.
struct FiniteTables {
  std::vector<std::vector<double>> rows;   // [x] cumulative Q(x, .)
  std::vector<std::vector<double>> edges;  // [x * N + y] cumulative step law
  std::vector<double> start;               // cumulative pi
};

inline FiniteTables finite_tables(const FiniteMRW& m) {
  FiniteTables t;
  const int ns = m.n_states();
  t.edges.resize(static_cast<std::size_t>(ns * ns));
  for (int x = 0; x < ns; ++x) {
    std::vector<double> row;
    double acc = 0.0;
    for (int y = 0; y < ns; ++y) {
      row.push_back(acc += m.kernel()(x, y));
      double a = 0.0;
      for (const auto& atom : m.atoms(x, y)) t.edges[static_cast<std::size_t>(x * ns + y)].push_back(a += atom.p);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Stepper make_stepper(const SimModel& model, const SimOptions& opt, const Vec2& affine_mean,
                            const FiniteTables* tables, RandomStream& rng) {
  return std::visit(
      [&](const auto& m) -> Stepper {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiniteMRW>) {
          const int ns = m.n_states();
          int state = opt.start_state ? *opt.start_state : rng.discrete(tables->start);
          return {[&m, tables, ns, state](RandomStream& r) mutable -> Vec2 {
            const int next = r.discrete(tables->rows[static_cast<std::size_t>(state)]);
            const auto& cum = tables->edges[static_cast<std::size_t>(state * ns + next)];
            const Vec2 v = m.atoms(state, next)[static_cast<std::size_t>(r.discrete(cum))].v;
            state = next;
            return v;
          }};
        } else if constexpr (std::is_same_v<T, LipschitzIFS>) {
          Eigen::VectorXd x = opt.x0.value_or(Eigen::VectorXd::Zero(m.dim));
          return {[&m, x](RandomStream& r) mutable -> Vec2 {
            x = m.map(x, m.sample_noise(r));
            return m.observable(x);
          }};
        } else {
          Vec2 x = opt.x0 ? Vec2((*opt.x0)(0), (*opt.x0)(1)) : Vec2::Zero();
          return {[&m, x, affine_mean](RandomStream& r) mutable -> Vec2 {
            const AffineDraw d = m.sample(r);
            x = d.a * x + d.b;
            return x - affine_mean;
          }};
        }
      },
      model);
}

}  // namespace detail

/// Simulates n_traj independent trajectories of S_n. Trajectory i draws
/// from stream i of the seed, so the batch is bit-identical for any worker count.
inline TrajectoryBatch simulate(const SimModel& model, const SimOptions& opt) {
  if (opt.n_steps < 1 || opt.n_traj < 1) throw Error(ErrorCode::invalid_argument, "need n_steps >= 1 and n_traj >= 1");
  TrajectoryBatch batch;
  batch.seed = opt.seed;
  batch.n_traj = opt.n_traj;
  batch.n_steps = opt.n_steps;
  batch.checkpoints = opt.checkpoints.empty() ? std::vector<long>{opt.n_steps} : opt.checkpoints;
  std::sort(batch.checkpoints.begin(), batch.checkpoints.end());
  for (long c : batch.checkpoints) {
    if (c < 1 || c > opt.n_steps) throw Error(ErrorCode::invalid_argument, "checkpoint outside [1, n_steps]");
  }
  batch.targets = opt.targets;

  Vec2 affine_mean = Vec2::Zero();
  std::optional<detail::FiniteTables> tables;
  if (const auto* fin = std::get_if<FiniteMRW>(&model)) {
    tables = detail::finite_tables(*fin);
    if (opt.start_state) {
      if (*opt.start_state < 0 || *opt.start_state >= fin->n_states()) {
        throw Error(ErrorCode::invalid_argument, "start state out of range");
      }
    } else {
      const Eigen::VectorXd pi = stationary(*fin).pi;
      double a = 0.0;
      for (Eigen::Index i = 0; i < pi.size(); ++i) tables->start.push_back(a += pi(i));
    }
  }
  if (const auto* ifs = std::get_if<LipschitzIFS>(&model); ifs && !opt.skip_audit) {
    if (const double lip = lipschitz_audit(*ifs); !(lip < 1.0)) {
      throw Error(ErrorCode::hypothesis_violation, "empirical Lipschitz constant " + std::to_string(lip) + " >= 1");
    }
  }
  if (const auto* aff = std::get_if<AffineRecursion>(&model)) {
    if (!opt.skip_audit) {
      const AffineAudit audit = affine_audit(*aff, 200000);
      if (!audit.passed) {
        throw Error(ErrorCode::hypothesis_violation, "E|A|^2 = " + std::to_string(audit.mean_a2) + " is not 1");
      }
    }
    affine_mean = aff->m0.value_or(estimate_affine_mean(*aff));
  }

  const auto n_cp = batch.checkpoints.size();
  const auto n_tg = batch.targets.size();
  const long pair_horizon = opt.n_steps / 2;
  batch.sums.assign(n_cp, std::vector<Vec2>(static_cast<std::size_t>(opt.n_traj), Vec2::Zero()));
  batch.excluded.assign(static_cast<std::size_t>(opt.n_traj), 0);
  std::vector<std::vector<std::vector<long>>> hit_times(static_cast<std::size_t>(opt.n_traj));

  parallel_for(static_cast<std::size_t>(opt.n_traj), opt.workers, [&](std::size_t traj) {
    RandomStream rng(opt.seed, traj);
    auto stepper = detail::make_stepper(model, opt, affine_mean, tables ? &*tables : nullptr, rng);
    std::vector<std::vector<long>> times(n_tg);
    Vec2 s = Vec2::Zero();
    std::size_t next_cp = 0;
    for (long n = 1; n <= opt.n_steps; ++n) {
      s += stepper.step(rng);
      if (!s.allFinite() || s.cwiseAbs().maxCoeff() > detail::kOverflow) {
        batch.excluded[traj] = 1;
        return;
      }
      for (std::size_t q = 0; q < n_tg; ++q) {
        if ((s - batch.targets[q].s).norm() < batch.targets[q].eps) times[q].push_back(n);
      }
      while (next_cp < n_cp && batch.checkpoints[next_cp] == n) batch.sums[next_cp++][traj] = s;
    }
    hit_times[traj] = std::move(times);
  });

  batch.hits.assign(n_tg, std::vector<long>(static_cast<std::size_t>(opt.n_steps), 0));
  batch.pair_sum.assign(n_tg, std::vector<double>(static_cast<std::size_t>(std::max(0L, pair_horizon)), 0.0));
  batch.pair_sq = batch.pair_sum;
  std::vector<long> threshold_counts(static_cast<std::size_t>(pair_horizon) + 1);
  for (std::size_t traj = 0; traj < hit_times.size(); ++traj) {
    if (batch.excluded[traj]) {
      ++batch.n_excluded;
      continue;
    }
    for (std::size_t q = 0; q < n_tg; ++q) {
      const auto& t = hit_times[traj][q];
      for (long n : t) ++batch.hits[q][static_cast<std::size_t>(n - 1)];
      if (pair_horizon < 1 || t.size() < 2) continue;
      // pair (t1 < t2) counts towards c(N) once N >= max(t1, t2 - t1)
      std::fill(threshold_counts.begin(), threshold_counts.end(), 0);
      bool any = false;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > pair_horizon) break;
        for (std::size_t j = i + 1; j < t.size(); ++j) {
          const long need = std::max(t[i], t[j] - t[i]);
          if (need <= pair_horizon) {
            ++threshold_counts[static_cast<std::size_t>(need)];
            any = true;
          } else if (t[j] - t[i] > pair_horizon) {
            break;
          }
        }
      }
      if (!any) continue;
      long running = 0;
      for (long nn = 1; nn <= pair_horizon; ++nn) {
        running += threshold_counts[static_cast<std::size_t>(nn)];
        const auto r = static_cast<double>(running);
        batch.pair_sum[q][static_cast<std::size_t>(nn - 1)] += r;
        batch.pair_sq[q][static_cast<std::size_t>(nn - 1)] += r * r;
      }
    }
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Statistics

/// Gaussian-consistent scale from the interquartile range.
inline double robust_variance(std::vector<double> x) {
  const auto q = [&](double frac) {
    const double pos = frac * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    std::nth_element(x.begin(), x.begin() + static_cast<long>(lo), x.end());
    const double a = x[lo];
    if (lo + 1 >= x.size()) return a;
    const double b = *std::min_element(x.begin() + static_cast<long>(lo) + 1, x.end());
    return a + (pos - static_cast<double>(lo)) * (b - a);
  };
  const double iqr = q(0.75) - q(0.25);
  const double sigma = iqr / 1.3489795003921634;
  return sigma * sigma;
}

/// Covariance estimated through robust variances of u, v and u +- v.
inline Mat2 robust_covariance(const std::vector<Vec2>& xs) {
  std::vector<double> u, v, plus, minus;
  for (const auto& x : xs) {
    u.push_back(x.x());
    v.push_back(x.y());
    plus.push_back(x.x() + x.y());
    minus.push_back(x.x() - x.y());
  }
  Mat2 c;
  c(0, 0) = robust_variance(u);
  c(1, 1) = robust_variance(v);
  c(0, 1) = c(1, 0) = 0.25 * (robust_variance(plus) - robust_variance(minus));
  return c;
}

inline std::pair<Vec2, Mat2> sample_moments(const std::vector<Vec2>& xs) {
  Vec2 mean = Vec2::Zero();
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Mat2 cov = Mat2::Zero();
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= static_cast<double>(xs.size() - 1);
  return {mean, cov};
}

/// Mardia's multivariate kurtosis b_{2,2}; equals 8 in expectation for Gaussian samples.
inline double mardia_kurtosis(const std::vector<Vec2>& xs) {
  const auto [mean, cov] = sample_moments(xs);
  const Mat2 inv = (cov * (static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()))).inverse();
  double b2 = 0.0;
  for (const auto& x : xs) {
    const double d = (x - mean).dot(inv * (x - mean));
    b2 += d * d;
  }
  return b2 / static_cast<double>(xs.size());
}

struct CheckpointStats {
  long n = 0;
  double a_norm = 0.0;
  Mat2 cov = Mat2::Zero();         // sample covariance of S_n / A_n
  Mat2 robust_cov = Mat2::Zero();  // quantile-based covariance of S_n / A_n
  double normality_stat = 0.0;     // |b_{2,2} - 8|
  double p_value = 1.0;            // parametric bootstrap under N(0, I)
};

struct CltReport {
  NormalizerKind kind = NormalizerKind::standard;
  std::vector<CheckpointStats> checkpoints;
  /// trace ratios between consecutive checkpoints
  std::vector<double> stabilization;
  std::vector<double> robust_stabilization;
};

inline CltReport empirical_clt(const TrajectoryBatch& batch, NormalizerKind kind, int bootstrap = 199,
                               std::uint64_t seed = 0xc17) {
  if (batch.checkpoints.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two checkpoints");
  CltReport report;
  report.kind = kind;
  for (std::size_t c = 0; c < batch.checkpoints.size(); ++c) {
    CheckpointStats st;
    st.n = batch.checkpoints[c];
    st.a_norm = normalizer(kind, static_cast<double>(st.n));
    std::vector<Vec2> xs;
    for (long t = 0; t < batch.n_traj; ++t) {
      if (!batch.excluded[static_cast<std::size_t>(t)]) xs.push_back(batch.sums[c][static_cast<std::size_t>(t)] / st.a_norm);
    }
    if (xs.size() < 8) throw Error(ErrorCode::invalid_argument, "too few usable trajectories");
    st.cov = sample_moments(xs).second;
    st.robust_cov = robust_covariance(xs);
    const double tr = st.cov.trace();
    if (!(st.cov.determinant() > 1e-12 * tr * tr)) {
      std::ostringstream os;
      os << "sample covariance at n = " << st.n << " is degenerate";
      throw Error(ErrorCode::degenerate_covariance, os.str());
    }
    st.normality_stat = std::abs(mardia_kurtosis(xs) - 8.0);
    RandomStream rng(seed, static_cast<std::uint64_t>(c));
    int exceed = 0;
    std::vector<Vec2> null_sample(xs.size());
    for (int b = 0; b < bootstrap; ++b) {
      for (auto& z : null_sample) {
        const double z0 = rng.normal();
        z = Vec2(z0, rng.normal());
      }
      if (std::abs(mardia_kurtosis(null_sample) - 8.0) >= st.normality_stat) ++exceed;
    }
    st.p_value = (1.0 + exceed) / (1.0 + bootstrap);
    report.checkpoints.push_back(st);
  }
  for (std::size_t c = 1; c < report.checkpoints.size(); ++c) {
    report.stabilization.push_back(report.checkpoints[c].cov.trace() / report.checkpoints[c - 1].cov.trace());
    report.robust_stabilization.push_back(report.checkpoints[c].robust_cov.trace() /
                                          report.checkpoints[c - 1].robust_cov.trace());
  }
  return report;
}

/// Wilson score interval for k successes out of n.
inline std::pair<double, double> wilson_interval(long k, long n, double z = 1.96) {
  const double nn = static_cast<double>(n), p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct HitSeries {
  Vec2 s = Vec2::Zero();
  double eps = 0.0;
  long n_traj = 0;
  std::vector<double> p_hat, lower, upper;  // index n-1
};

inline std::size_t target_index(const TrajectoryBatch& batch, const Vec2& s, double eps) {
  for (std::size_t q = 0; q < batch.targets.size(); ++q) {
    if ((batch.targets[q].s - s).norm() < 1e-12 && std::abs(batch.targets[q].eps - eps) < 1e-12) return q;
  }
  throw Error(ErrorCode::invalid_argument, "target " + format_point(s) + " was not tracked by this batch");
}

/// Per-n hit frequencies of the open ball B(s, eps) with Wilson intervals.
inline HitSeries empirical_hits(const TrajectoryBatch& batch, const Lattice& lattice, const Vec2& s, double eps) {
  if (lattice.variant() != LatticeVariant::H1) (void)lattice.haar_ball(s, eps);
  const std::size_t q = target_index(batch, s, eps);
  HitSeries out;
  out.s = s;
  out.eps = eps;
  out.n_traj = batch.used();
  long total = 0;
  for (long k : batch.hits[q]) {
    total += k;
    const auto [lo, hi] = wilson_interval(k, out.n_traj);
    out.p_hat.push_back(static_cast<double>(k) / static_cast<double>(out.n_traj));
    out.lower.push_back(lo);
    out.upper.push_back(hi);
  }
  if (total == 0) {
    std::ostringstream os;
    os << "no trajectory entered B(" << format_point(s) << ", " << eps << "); try n_traj >= " << 10 * batch.n_traj;
    throw Error(ErrorCode::underpowered, os.str());
  }
  return out;
}

/// Monte Carlo Kochen-Stone inputs for horizons up to n_steps/2, with
/// worst-case bounds: Wilson lower bounds on p_n and a normal upper bound on
/// the joint sums.
struct MonteCarloKochenStone {
  KochenStoneInputs inputs;
  std::vector<double> p_lower;
  std::vector<double> joint_upper;
};

inline MonteCarloKochenStone monte_carlo_kochen_stone(const TrajectoryBatch& batch, const Vec2& s, double eps,
                                                      double z = 1.96) {
  const std::size_t q = target_index(batch, s, eps);
  const long horizon = batch.n_steps / 2;
  const double n = static_cast<double>(batch.used());
  MonteCarloKochenStone out;
  out.inputs.s = s;
  for (long i = 0; i < horizon; ++i) {
    const long k = batch.hits[q][static_cast<std::size_t>(i)];
    out.inputs.p.push_back(static_cast<double>(k) / n);
    out.p_lower.push_back(wilson_interval(k, batch.used(), z).first);
    const double mean = batch.pair_sum[q][static_cast<std::size_t>(i)] / n;
    const double var = std::max(0.0, batch.pair_sq[q][static_cast<std::size_t>(i)] / n - mean * mean);
    out.inputs.joint_cumulative.push_back(mean);
    out.joint_upper.push_back(mean + z * std::sqrt(var / n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixtures

namespace fixtures {

/// Affine recursion on R^2 with A = rho * R(theta): rho log-normal with
/// E[rho^2] = 1, theta uniform, B ~ N(0, b^2 I). Rotation invariance gives m0 = 0.
inline AffineRecursion af1(double log_sigma = 0.5, double b_scale = 1.0) {
  AffineRecursion m;
  m.sample = [log_sigma, b_scale](RandomStream& rng) {
    const double rho = std::exp(log_sigma * rng.normal() - log_sigma * log_sigma);
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    AffineDraw d;
    d.a << rho * std::cos(theta), -rho * std::sin(theta), rho * std::sin(theta), rho * std::cos(theta);
    const double b0 = rng.normal();
    d.b = Vec2(b_scale * b0, b_scale * rng.normal());
    return d;
  };
  m.m0 = Vec2::Zero();
  return m;
}

/// X_n = X_{n-1}/2 + noise on R^2, noise ~ N(0, I); observed through tanh.
inline LipschitzIFS ifs1() {
  LipschitzIFS m;
  m.dim = 2;
  m.sample_noise = [](RandomStream& rng) {
    Eigen::VectorXd e(2);
    e(0) = rng.normal();
    e(1) = rng.normal();
    return e;
  };
  m.map = [](const Eigen::VectorXd& x, const Eigen::VectorXd& e) -> Eigen::VectorXd { return 0.5 * x + e; };
  m.observable = [](const Eigen::VectorXd& x) { return Vec2(std::tanh(x(0)), std::tanh(x(1))); };
  m.sample_state = [](RandomStream& rng) {
    Eigen::VectorXd x(2);
    x(0) = 4.0 * rng.normal();
    x(1) = 4.0 * rng.normal();
    return x;
  };
  return m;
}

}  // namespace fixtures

}  // namespace mrwlab
