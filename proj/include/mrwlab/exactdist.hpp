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
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/lattice.hpp"
#include "mrwlab/spectral.hpp"

namespace mrwlab {

/// Inclusive box of lattice coordinates.
struct Window {
  Vec2i lo = Vec2i::Zero();
  Vec2i hi = Vec2i::Zero();

  int rows() const { return hi.x() - lo.x() + 1; }
  int cols() const { return hi.y() - lo.y() + 1; }
  bool contains(const Vec2i& k) const {
    return k.x() >= lo.x() && k.x() <= hi.x() && k.y() >= lo.y() && k.y() <= hi.y();
  }
};

/// Growth limits for the evolving window.
struct WindowPolicy {
  std::optional<int> cap;     // window is clipped to [-cap, cap]^2
  double lost_budget = 1e-12; // maximal truncated mass before evolve fails
};

/// Exact joint law of (X_n, S_n) on a window of an H3 lattice; S_n = B k.
class LatticeDistribution {
 public:
  /// mu (x) delta_0: the law at n = 0.
  static LatticeDistribution initial(const Eigen::VectorXd& mu) {
    LatticeDistribution d;
    d.mass_.resize(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index x = 0; x < mu.size(); ++x) d.mass_[static_cast<std::size_t>(x)] = {mu(x)};
    return d;
  }

  static LatticeDistribution dirac(int n_states, int state) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n_states);
    mu(state) = 1.0;
    return initial(mu);
  }

  long n() const { return n_; }
  const Window& window() const { return window_; }
  double lost_mass() const { return lost_; }
  int n_states() const { return static_cast<int>(mass_.size()); }

  double mass(int state, const Vec2i& k) const {
    if (!window_.contains(k)) return 0.0;
    return mass_[static_cast<std::size_t>(state)][offset(k)];
  }

  /// Row-major (k1, then k2) masses of one state over the window.
  const std::vector<double>& state_mass(int state) const { return mass_[static_cast<std::size_t>(state)]; }

  double total_mass() const {
    // Neumaier summation; totals are compared against 1 at 1e-12.
    double sum = 0.0, comp = 0.0;
    for (const auto& m : mass_) {
      for (double v : m) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
      }
    }
    return sum + comp;
  }

 private:
  friend LatticeDistribution evolve(const FiniteMRW&, const LatticeDistribution&, const WindowPolicy&);

  std::size_t offset(const Vec2i& k) const {
    return static_cast<std::size_t>(k.x() - window_.lo.x()) * static_cast<std::size_t>(window_.cols()) +
           static_cast<std::size_t>(k.y() - window_.lo.y());
  }

  long n_ = 0;
  Window window_;
  std::vector<std::vector<double>> mass_;
  double lost_ = 0.0;
};

namespace detail {

struct LatticeStep {
  int from, to;
  Vec2i dk;
  double weight;  // Q(x,y) * p
};

inline std::vector<LatticeStep> lattice_steps(const FiniteMRW& model) {
  const Lattice& lat = model.lattice();
  if (lat.variant() != LatticeVariant::H3) {
    throw Error(ErrorCode::invalid_lattice, "exact distributions need an H3 lattice");
  }
  std::vector<LatticeStep> steps;
  for (const auto& e : model.edges()) {
    for (const auto& a : e.atoms) {
      if (a.p > 0.0) steps.push_back({e.from, e.to, lat.coordinates(a.v), model.kernel()(e.from, e.to) * a.p});
    }
  }
  return steps;
}

}  // namespace detail

/// One application of the transfer operator:
///   mass'(y, k) = sum_x sum_j mass(x, k - k_j) Q(x,y) p_j.
inline LatticeDistribution evolve(const FiniteMRW& model, const LatticeDistribution& dist,
                                  const WindowPolicy& policy = {}) {
  if (dist.n_states() != model.n_states()) throw Error(ErrorCode::invalid_argument, "state count mismatch");
  const auto steps = detail::lattice_steps(model);
  Vec2i lo_step = Vec2i::Zero(), hi_step = Vec2i::Zero();
  bool first = true;
  for (const auto& s : steps) {
    lo_step = first ? s.dk : lo_step.cwiseMin(s.dk);
    hi_step = first ? s.dk : hi_step.cwiseMax(s.dk);
    first = false;
  }

  LatticeDistribution out;
  out.n_ = dist.n_ + 1;
  out.lost_ = dist.lost_;
  out.window_.lo = dist.window_.lo + lo_step;
  out.window_.hi = dist.window_.hi + hi_step;
  if (policy.cap) {
    const Vec2i cap = Vec2i::Constant(*policy.cap);
    out.window_.lo = out.window_.lo.cwiseMax(-cap);
    out.window_.hi = out.window_.hi.cwiseMin(cap);
  }
  const int rows = out.window_.rows(), cols = out.window_.cols();
  out.mass_.assign(dist.mass_.size(), std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0));

  const int src_rows = dist.window_.rows(), src_cols = dist.window_.cols();
  double lost = 0.0;
  for (const auto& s : steps) {
    const auto& src = dist.mass_[static_cast<std::size_t>(s.from)];
    auto& dst = out.mass_[static_cast<std::size_t>(s.to)];
    // destination coordinate of source row i is dist.lo + i + dk - out.lo
    const int row_shift = dist.window_.lo.x() + s.dk.x() - out.window_.lo.x();
    const int col_shift = dist.window_.lo.y() + s.dk.y() - out.window_.lo.y();
    const int j_begin = std::max(0, -col_shift);
    const int j_end = std::min(src_cols, cols - col_shift);
    for (int i = 0; i < src_rows; ++i) {
      const double* in = src.data() + static_cast<std::size_t>(i) * src_cols;
      const int di = i + row_shift;
      if (di < 0 || di >= rows) {
        double row_total = 0.0;
        for (int j = 0; j < src_cols; ++j) row_total += in[j];
        lost += s.weight * row_total;
        continue;
      }
      double* o = dst.data() + static_cast<std::size_t>(di) * cols + col_shift;
      for (int j = 0; j < j_begin; ++j) lost += s.weight * in[j];
      for (int j = std::max(j_end, 0); j < src_cols; ++j) lost += s.weight * in[j];
      const double w = s.weight;
      for (int j = j_begin; j < j_end; ++j) o[j] += w * in[j];
    }
  }
  out.lost_ += lost;
  if (out.lost_ > policy.lost_budget) {
    std::ostringstream os;
    os << "truncated mass " << out.lost_ << " exceeds budget " << policy.lost_budget << " at n = " << out.n_;
    throw Error(ErrorCode::truncation_overflow, os.str());
  }
  return out;
}

/// Window cap for horizon n_max: `sigmas` standard deviations of S_{n_max}
/// in lattice coordinates plus one step of slack. Falls back to the
/// one-step second moment when Gamma is unavailable.
inline WindowPolicy window_policy_for(const FiniteMRW& model, long n_max, double sigmas = 8.0,
                                      double lost_budget = 1e-12) {
  const auto steps = detail::lattice_steps(model);
  const Mat2 binv = model.lattice().basis().inverse();
  Mat2 var_k;
  try {
    var_k = binv * covariance(model) * binv.transpose();
  } catch (const Error&) {
    var_k.setZero();
    for (const auto& s : steps) {
      const Eigen::Vector2d k = s.dk.cast<double>();
      var_k = var_k.cwiseMax(k * k.transpose() * 1.0);
    }
  }
  int reach = 0;
  for (const auto& s : steps) reach = std::max(reach, s.dk.cwiseAbs().maxCoeff());
  const double sd = std::sqrt(std::max(var_k(0, 0), var_k(1, 1)) * static_cast<double>(n_max));
  return {static_cast<int>(std::ceil(sigmas * sd)) + reach + 1, lost_budget};
}

inline Eigen::VectorXd stationary_start(const FiniteMRW& model) { return stationary(model).pi; }

/// E[f(X_n) 1_B(S_n)] for B = B(s, eps) with eps < eps_S, i.e. the single lattice point s.
inline double ball_mass(const LatticeDistribution& dist, const Lattice& lattice, const Vec2& s, double eps,
                        const std::optional<Eigen::VectorXd>& weights = std::nullopt) {
  (void)lattice.haar_ball(s, eps);
  const Vec2i k = lattice.coordinates(s);
  double total = 0.0;
  for (int x = 0; x < dist.n_states(); ++x) total += (weights ? (*weights)(x) : 1.0) * dist.mass(x, k);
  return total;
}

/// Mean and covariance of S_n over the window.
inline std::pair<Vec2, Mat2> moments(const LatticeDistribution& dist, const Lattice& lattice) {
  const Window& w = dist.window();
  double total = 0.0;
  Vec2 first = Vec2::Zero();
  Mat2 second = Mat2::Zero();
  for (int x = 0; x < dist.n_states(); ++x) {
    const auto& m = dist.state_mass(x);
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) {
        const double p = m[static_cast<std::size_t>(i) * w.cols() + j];
        if (p == 0.0) continue;
        const Vec2 s = lattice.point(Vec2i(w.lo.x() + i, w.lo.y() + j));
        total += p;
        first += p * s;
        second += p * s * s.transpose();
      }
    }
  }
  first /= total;
  second /= total;
  return {first, second - first * first.transpose()};
}

/// Per-state Fourier transform sum_k mass(x, k) exp(i <t, B k>); equals the
/// row mu Q(t)^n when nothing was truncated.
inline CVector fourier_transform(const LatticeDistribution& dist, const Lattice& lattice, const Vec2& t) {
  const Window& w = dist.window();
  CVector out = CVector::Zero(dist.n_states());
  for (int x = 0; x < dist.n_states(); ++x) {
    const auto& m = dist.state_mass(x);
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) {
        const double p = m[static_cast<std::size_t>(i) * w.cols() + j];
        if (p == 0.0) continue;
        out(x) += p * std::polar(1.0, t.dot(lattice.point(Vec2i(w.lo.x() + i, w.lo.y() + j))));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local limit series

struct LltQuery {
  Vec2 s = Vec2::Zero();
  std::optional<Eigen::VectorXd> weights;  // f over states; ones when empty
};

struct LltRow {
  long n;
  double a_norm;      // A_n
  double p;           // E_mu[f(X_n) 1{S_n = s}]
  double prediction;  // D_S pi(f) A_n^{-2} m_S(B)
  double ratio;
};

struct LltSeries {
  Vec2 s;
  double d_s = 0.0;
  double pi_f = 0.0;
  std::vector<LltRow> rows;
  double tail_average = 0.0;  // mean ratio over the last tenth of the horizon
};

struct LltOptions {
  std::optional<Eigen::VectorXd> start;  // initial law of X_0; stationary when empty
  std::optional<WindowPolicy> window;
};

/// Exact r_n = E_mu[f(X_n) 1_B(S_n)] / (D_S pi(f) a_n m_S(B)) for n = 1..n_max
/// under the standard sqrt(n) normalization.
inline std::vector<LltSeries> llt_series(const FiniteMRW& model, const std::vector<LltQuery>& queries, long n_max,
                                         const LltOptions& opt = {}) {
  if (n_max < 1) throw Error(ErrorCode::domain, "n_max must be at least 1");
  const Lattice& lat = model.lattice();
  const double eps = 0.5 * lat.epsilon_s();
  const StationaryLaw law = stationary(model);
  const double d_s = lat.llt_constant(covariance(model));
  std::vector<LltSeries> out(queries.size());
  std::vector<Eigen::VectorXd> weights;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    weights.push_back(queries[q].weights.value_or(Eigen::VectorXd::Ones(model.n_states())));
    if (weights.back().size() != model.n_states() || weights.back().minCoeff() < 0.0) {
      throw Error(ErrorCode::invalid_argument, "weights must be a non-negative vector over states");
    }
    out[q].s = queries[q].s;
    out[q].d_s = d_s;
    out[q].pi_f = law.pi.dot(weights.back());
    if (!(out[q].pi_f > 0.0)) throw Error(ErrorCode::degenerate_weight, "pi(f) = 0");
    (void)lat.haar_ball(queries[q].s, eps);
  }
  const WindowPolicy policy = opt.window.value_or(window_policy_for(model, n_max));
  LatticeDistribution dist = LatticeDistribution::initial(opt.start.value_or(law.pi));
  for (long n = 1; n <= n_max; ++n) {
    dist = evolve(model, dist, policy);
    const double a_n = normalizer(NormalizerKind::standard, static_cast<double>(n));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double p = ball_mass(dist, lat, queries[q].s, eps, weights[q]);
      const double pred = d_s * out[q].pi_f / (a_n * a_n) * lat.haar_ball(queries[q].s, eps);
      out[q].rows.push_back({n, a_n, p, pred, p / pred});
    }
  }
  const long tail_start = n_max - std::max(1L, n_max / 10) + 1;
  for (auto& series : out) {
    double sum = 0.0;
    for (long n = tail_start; n <= n_max; ++n) sum += series.rows[static_cast<std::size_t>(n - 1)].ratio;
    series.tail_average = sum / static_cast<double>(n_max - tail_start + 1);
  }
  return out;
}

inline LltSeries llt_series(const FiniteMRW& model, const LltQuery& query, long n_max, const LltOptions& opt = {}) {
  return llt_series(model, std::vector<LltQuery>{query}, n_max, opt).front();
}

namespace detail {

// g(m) = P_y(S_m = 0) for m = 1..m_max, one vector per starting state y.
inline std::vector<std::vector<double>> return_probabilities(const FiniteMRW& model, long m_max,
                                                             const WindowPolicy& policy) {
  std::vector<std::vector<double>> g(static_cast<std::size_t>(model.n_states()));
  for (int y = 0; y < model.n_states(); ++y) {
    LatticeDistribution d = LatticeDistribution::dirac(model.n_states(), y);
    for (long m = 1; m <= m_max; ++m) {
      d = evolve(model, d, policy);
      double p = 0.0;
      for (int x = 0; x < model.n_states(); ++x) p += d.mass(x, Vec2i::Zero());
      g[static_cast<std::size_t>(y)].push_back(p);
    }
  }
  return g;
}

}  // namespace detail

struct BivariateResult {
  double joint = 0.0;       // P((S_n, S_{n+m}) in B x B)
  double prediction = 0.0;  // D_S^2 a_n a_m m_S(B)^2
  double ratio = 0.0;
};

/// Bivariate local ratio. Restarts the walk at time n from each state
/// carrying mass at s; Markov additivity makes this exact.
inline BivariateResult bivariate_llt(const FiniteMRW& model, const Vec2& s, double eps, long n, long m,
                                     const LltOptions& opt = {}) {
  if (n < 1 || m < 1) throw Error(ErrorCode::domain, "bivariate ratio needs n >= 1 and m >= 1");
  const Lattice& lat = model.lattice();
  const double haar = lat.haar_ball(s, eps);
  const Vec2i ks = lat.coordinates(s);
  const double d_s = lat.llt_constant(covariance(model));
  const WindowPolicy policy = opt.window.value_or(window_policy_for(model, std::max(n, m)));
  LatticeDistribution dist = LatticeDistribution::initial(opt.start.value_or(stationary(model).pi));
  for (long i = 0; i < n; ++i) dist = evolve(model, dist, policy);
  Eigen::VectorXd at_s(model.n_states());
  for (int y = 0; y < model.n_states(); ++y) at_s(y) = dist.mass(y, ks);
  if (at_s.sum() < 1e-300) throw Error(ErrorCode::underflow, "mass at (n, s) is below 1e-300");

  BivariateResult r;
  for (int y = 0; y < model.n_states(); ++y) {
    if (at_s(y) <= 0.0) continue;
    LatticeDistribution restart = LatticeDistribution::dirac(model.n_states(), y);
    for (long i = 0; i < m; ++i) restart = evolve(model, restart, policy);
    double back = 0.0;
    for (int x = 0; x < model.n_states(); ++x) back += restart.mass(x, Vec2i::Zero());
    r.joint += at_s(y) * back;
  }
  r.prediction = d_s * d_s * llt_weight(NormalizerKind::standard, static_cast<double>(n)) *
                 llt_weight(NormalizerKind::standard, static_cast<double>(m)) * haar * haar;
  r.ratio = r.joint / r.prediction;
  return r;
}

/// Exact Kochen-Stone inputs for one start state and target:
/// p[n-1] = P_x(S_n = s) and joint_cumulative[N-1] = sum_{n,m<=N} P_x(S_n = s, S_{n+m} = s).
struct KochenStoneInputs {
  int start = 0;
  Vec2 s = Vec2::Zero();
  std::vector<double> p;
  std::vector<double> joint_cumulative;
};

inline std::vector<KochenStoneInputs> kochen_stone_inputs(const FiniteMRW& model, int start,
                                                          const std::vector<Vec2>& targets, long horizon,
                                                          std::optional<WindowPolicy> window = std::nullopt) {
  if (horizon < 1) throw Error(ErrorCode::domain, "horizon must be at least 1");
  if (start < 0 || start >= model.n_states()) throw Error(ErrorCode::invalid_argument, "start state out of range");
  const Lattice& lat = model.lattice();
  const WindowPolicy policy = window.value_or(window_policy_for(model, horizon));
  const auto g = detail::return_probabilities(model, horizon, policy);
  const int ns = model.n_states();

  std::vector<Vec2i> ks;
  for (const auto& s : targets) ks.push_back(lat.coordinates(s));
  std::vector<KochenStoneInputs> out(targets.size());
  // Running H(y) = sum_{n<=N} P_x(X_n = y, S_n = s) and G(y) = sum_{m<=N} g_y(m).
  std::vector<Eigen::VectorXd> h_cum(targets.size(), Eigen::VectorXd::Zero(ns));
  Eigen::VectorXd g_cum = Eigen::VectorXd::Zero(ns);
  LatticeDistribution dist = LatticeDistribution::dirac(ns, start);
  for (long n = 1; n <= horizon; ++n) {
    dist = evolve(model, dist, policy);
    for (int y = 0; y < ns; ++y) g_cum(y) += g[static_cast<std::size_t>(y)][static_cast<std::size_t>(n - 1)];
    for (std::size_t q = 0; q < targets.size(); ++q) {
      double p = 0.0;
      for (int y = 0; y < ns; ++y) {
        const double h = dist.mass(y, ks[q]);
        h_cum[q](y) += h;
        p += h;
      }
      out[q].p.push_back(p);
      out[q].joint_cumulative.push_back(h_cum[q].dot(g_cum));
    }
  }
  for (std::size_t q = 0; q < targets.size(); ++q) {
    out[q].start = start;
    out[q].s = targets[q];
  }
  return out;
}

}  // namespace mrwlab
