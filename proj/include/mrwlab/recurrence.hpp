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
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/exactdist.hpp"
#include "mrwlab/spectral.hpp"

namespace mrwlab {

struct KochenStoneOptions {
  /// D_S m_S(B): when set, the divergence flag also checks that the tail of
  /// sum p_n grows at the local-limit rate.
  std::optional<double> reference_rate;
  NormalizerKind normalizer = NormalizerKind::standard;
  double rate_tolerance = 0.2;
  /// d is the minimum ratio over the final quarter of horizons.
  double tail_fraction = 0.25;
  /// p_n decaying faster than n^{-1-e}/log n with e above this is classed as summable.
  double decay_threshold = 0.1;
  /// A tail-decade increment below this is classed as summable.
  double cauchy_tol = 1e-6;
  /// Worst-case inputs from simulation (Wilson lower bounds on p_n, upper bounds on the joint sums).
  std::optional<std::vector<double>> p_lower;
  std::optional<std::vector<double>> joint_upper;
};

struct KochenStoneCertificate {
  Vec2 s = Vec2::Zero();
  double eps = 0.0;
  int start = 0;
  long horizon = 0;
  double sum_p = 0.0;
  double ratio = 0.0;        // sum_{n,m<=N} p_{n,m} / (sum_{n<=N} p_n)^2 at N = horizon
  double d_est = 0.0;
  double lower_bound = 0.0;  // P(|S_n - s| < eps i.o.) >= 1/(2 d)
  double decay_exponent = 0.0;
  double tail_decade_sum = 0.0;
  bool divergence_flag = false;
  bool transient = false;
  bool amplified = false;
  std::string conclusion;
};

inline std::string format_point(const Vec2& s) {
  std::ostringstream os;
  os << "(" << s.x() << ", " << s.y() << ")";
  return os.str();
}

/// Second-moment Borel-Cantelli certificate from per-horizon series.
/// `joint_cumulative[N-1]` is sum_{n,m=1}^{N} p_{n,m}.
inline KochenStoneCertificate kochen_stone(std::span<const double> p, std::span<const double> joint_cumulative,
                                           const KochenStoneOptions& opt = {}) {
  const long horizon = static_cast<long>(p.size());
  if (horizon < 10 || joint_cumulative.size() != p.size()) {
    throw Error(ErrorCode::invalid_argument, "need matching series with at least 10 horizons");
  }
  KochenStoneCertificate c;
  c.horizon = horizon;

  std::vector<double> partial(p.size()), partial_lo(p.size());
  double acc = 0.0, acc_lo = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    acc_lo += opt.p_lower ? (*opt.p_lower)[i] : p[i];
    partial[i] = acc;
    partial_lo[i] = acc_lo;
  }
  c.sum_p = acc;

  // Summability diagnostics on the final decade [N/10, N].
  const long decade_start = std::max(3L, horizon / 10);
  for (long n = decade_start; n <= horizon; ++n) c.tail_decade_sum += p[static_cast<std::size_t>(n - 1)];
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (long n = decade_start; n <= horizon; ++n) {
    const double pn = p[static_cast<std::size_t>(n - 1)];
    if (!(pn > 0.0)) continue;
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(static_cast<double>(n) * x * pn);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    c.decay_exponent = -(count * sxy - sx * sy) / (count * sxx - sx * sx);
  } else {
    c.decay_exponent = std::numeric_limits<double>::infinity();
  }
  c.transient = c.tail_decade_sum < opt.cauchy_tol || c.decay_exponent > opt.decay_threshold;

  c.divergence_flag = !c.transient;
  if (c.divergence_flag && opt.reference_rate) {
    const long half = horizon / 2;
    double observed = 0.0;
    for (long n = half + 1; n <= horizon; ++n) observed += p[static_cast<std::size_t>(n - 1)];
    const double expected = *opt.reference_rate * weight_sum(opt.normalizer, std::max(half + 1, 2L), horizon);
    c.divergence_flag = std::abs(observed / expected - 1.0) <= opt.rate_tolerance;
  }

  c.ratio = joint_cumulative.back() / (c.sum_p * c.sum_p);
  const long tail_begin = std::max(1L, horizon - static_cast<long>(std::floor(opt.tail_fraction * horizon)));
  c.d_est = std::numeric_limits<double>::infinity();
  for (long n = tail_begin; n <= horizon; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    const double joint = opt.joint_upper ? (*opt.joint_upper)[i] : joint_cumulative[i];
    const double denom = partial_lo[i];
    if (denom > 0.0) c.d_est = std::min(c.d_est, joint / (denom * denom));
  }
  c.lower_bound = std::isfinite(c.d_est) && c.d_est > 0.0 ? std::min(1.0, 1.0 / (2.0 * c.d_est)) : 0.0;
  c.amplified = c.divergence_flag && c.lower_bound > 0.0;

  std::ostringstream os;
  if (c.transient) {
    os << "TRANSIENT: partial sums of p_n converge (tail-decade increment " << c.tail_decade_sum
       << ", decay exponent " << c.decay_exponent << ")";
  } else {
    os << "P(|S_n - s| < eps i.o.) >= 1/(2d) = " << c.lower_bound << " with d = " << c.d_est;
    if (!c.divergence_flag) os << "; divergence of sum p_n not confirmed at this horizon";
  }
  c.conclusion = os.str();
  return c;
}

inline KochenStoneCertificate kochen_stone(const KochenStoneInputs& in, double eps,
                                           const KochenStoneOptions& opt = {}) {
  auto c = kochen_stone(std::span<const double>(in.p), std::span<const double>(in.joint_cumulative), opt);
  c.s = in.s;
  c.start = in.start;
  c.eps = eps;
  return c;
}

struct AmplifyResult {
  bool recurrent_everywhere = false;
  double e_eps = 0.0;
  std::vector<std::string> failures;
  std::string statement;
};

/// A lower bound common to every (x, s) upgrades to probability one. The
/// family is a finite sample of X x S, so the verdict extrapolates.
inline AmplifyResult amplify(const std::vector<KochenStoneCertificate>& family, double min_bound = 0.0) {
  AmplifyResult r;
  if (family.empty()) throw Error(ErrorCode::invalid_argument, "empty certificate family");
  r.e_eps = 1.0;
  for (const auto& c : family) {
    r.e_eps = std::min(r.e_eps, c.lower_bound);
    if (c.transient || !c.divergence_flag || !(c.lower_bound > min_bound)) {
      std::ostringstream os;
      os << "start " << c.start << ", s = " << format_point(c.s) << ", eps = " << c.eps << ": "
         << (c.transient ? "transient" : !c.divergence_flag ? "divergence not confirmed" : "bound too small");
      r.failures.push_back(os.str());
    }
  }
  r.recurrent_everywhere = r.failures.empty();
  std::ostringstream os;
  if (r.recurrent_everywhere) {
    os << "RECURRENT-EVERYWHERE: every sampled (x, s) has P(|S_n - s| < eps i.o.) >= e = " << r.e_eps
       << "; a bound uniform over X x S forces probability one. This is extrapolated from " << family.size()
       << " sampled (x, s) pairs.";
  } else {
    os << "WITHHELD: " << r.failures.size() << " certificate(s) fail";
  }
  r.statement = os.str();
  return r;
}

// ---------------------------------------------------------------------------

struct RecurrenceRow {
  KochenStoneCertificate cert;
  double llt_ratio = 0.0;  // p_N / (D_S a_N m_S(B))
};

struct RecurrenceReport {
  bool refused = false;
  std::string refusal;
  std::optional<ArithmeticWitness> witness;
  std::string route;
  bool harris = false;
  Mat2 gamma = Mat2::Zero();
  double d_s = 0.0;
  std::vector<RecurrenceRow> rows;
  AmplifyResult verdict;
};

struct RecurrenceOptions {
  ScanOptions scan;
  KochenStoneOptions ks;
  std::optional<std::vector<int>> starts;  // all states when empty
};

/// Certificates for every (start, s, eps) plus the local-limit cross-check.
/// Refuses arithmetic or non-ergodic models.
inline RecurrenceReport recurrence_report(const FiniteMRW& model, const std::vector<Vec2>& targets,
                                          const std::vector<double>& eps_list, long horizon,
                                          const RecurrenceOptions& opt = {}) {
  RecurrenceReport report;
  report.harris = is_harris(model);
  try {
    (void)ergodicity_gap(model);
  } catch (const Error& e) {
    report.refused = true;
    report.refusal = std::string("strong ergodicity fails: ") + e.what();
    return report;
  }
  const ScanReport scan = arithmeticity_scan(model, opt.scan);
  if (scan.arithmetic) {
    report.refused = true;
    report.refusal = "walk is arithmetic (sublattice); see witness";
    for (const auto& g : scan.g_points) {
      if (model.lattice().distance_to_dual(g.t) > scan.cell_diameter) {
        try {
          report.witness = extract_witness(model, g.t, opt.scan.tol);
        } catch (const Error&) {
          continue;
        }
        break;
      }
    }
    return report;
  }
  // Dirac starts are admissible for finite chains, so the bivariate route applies from every state.
  report.route = "TheoremII";
  report.gamma = covariance(model);
  report.d_s = model.lattice().llt_constant(report.gamma);

  std::vector<int> starts;
  if (opt.starts) {
    starts = *opt.starts;
  } else {
    for (int x = 0; x < model.n_states(); ++x) starts.push_back(x);
  }
  std::vector<KochenStoneCertificate> family;
  for (int x : starts) {
    const auto inputs = kochen_stone_inputs(model, x, targets, horizon);
    for (const auto& in : inputs) {
      for (double eps : eps_list) {
        const double haar = model.lattice().haar_ball(in.s, eps);
        KochenStoneOptions ks = opt.ks;
        ks.reference_rate = report.d_s * haar;
        RecurrenceRow row;
        row.cert = kochen_stone(in, eps, ks);
        row.llt_ratio = in.p.back() / (report.d_s * haar *
                                       llt_weight(NormalizerKind::standard, static_cast<double>(horizon)));
        family.push_back(row.cert);
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.verdict = amplify(family);
  return report;
}

}  // namespace mrwlab
