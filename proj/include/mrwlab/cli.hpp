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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/exactdist.hpp"
#include "mrwlab/fixtures.hpp"
#include "mrwlab/io.hpp"
#include "mrwlab/montecarlo.hpp"
#include "mrwlab/recurrence.hpp"
#include "mrwlab/spectral.hpp"

namespace mrwlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitHypothesis = 2;

struct RunConfig {
  std::string command;
  std::string fixture;
  std::string model_path;
  long nmax = 0;
  long horizon = 2000;
  int grid = 64;
  double tol = 1e-6;
  std::vector<std::string> s;
  std::vector<double> eps;
  std::vector<std::string> pairs;  // bivariate "n,m"
  std::uint64_t seed = 1;
  long traj = 0;
  std::string normalizer;
  std::string out;
  int workers = 0;
};

/// Text that identifies the result of a run; --out and --workers do not change results.
inline std::string canonical(const RunConfig& c) {
  std::ostringstream os;
  os << c.command << "|fixture=" << c.fixture << "|model=" << c.model_path << "|nmax=" << c.nmax
     << "|N=" << c.horizon << "|grid=" << c.grid << "|tol=" << c.tol << "|seed=" << c.seed << "|traj=" << c.traj
     << "|normalizer=" << c.normalizer << "|s=";
  for (const auto& s : c.s) os << s << ';';
  os << "|eps=";
  for (double e : c.eps) os << e << ';';
  os << "|pairs=";
  for (const auto& p : c.pairs) os << p << ';';
  return os.str();
}

namespace detail {

inline bool is_hypothesis(ErrorCode c) {
  switch (c) {
    case ErrorCode::not_centered:
    case ErrorCode::ambiguous_stationary:
    case ErrorCode::non_ergodic:
    case ErrorCode::degenerate_covariance:
    case ErrorCode::hypothesis_violation:
    case ErrorCode::not_arithmetic_at_t:
    case ErrorCode::shrink_radius:
      return true;
    default:
      return false;
  }
}

inline std::pair<long, long> parse_pair(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    return {std::stol(text.substr(0, comma)), std::stol(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, std::string(flag) + " expects 'a,b', got '" + text + "'");
  }
}

inline Vec2 parse_point(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    const double x = std::stod(text.substr(0, comma));
    const double y = std::stod(text.substr(comma + 1));
    return {x, y};
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "--s expects 'x,y', got '" + text + "'");
  }
}

inline std::string model_name(const RunConfig& c) { return c.fixture.empty() ? c.model_path : c.fixture; }

inline FiniteMRW load_finite(const RunConfig& c, Centering centering = Centering::require) {
  if (!c.fixture.empty() && !c.model_path.empty()) throw Error(ErrorCode::invalid_argument, "give --fixture or --model, not both");
  if (!c.model_path.empty()) return io::load_model(c.model_path, centering);
  if (c.fixture.empty()) throw Error(ErrorCode::invalid_argument, "one of --fixture or --model is required");
  if (auto m = fixtures::by_name(c.fixture)) return *m;
  std::string names;
  for (const auto& n : fixtures::finite_names()) names += " " + n;
  throw Error(ErrorCode::invalid_argument, "unknown finite fixture '" + c.fixture + "'; known:" + names);
}

inline std::vector<Vec2> targets(const RunConfig& c, std::vector<Vec2> fallback) {
  if (c.s.empty()) return fallback;
  std::vector<Vec2> out;
  for (const auto& s : c.s) out.push_back(parse_point(s));
  return out;
}

inline std::vector<double> eps_list(const RunConfig& c, const Lattice& l) {
  if (!c.eps.empty()) return c.eps;
  return {l.variant() == LatticeVariant::H1 ? 1.0 : 0.5 * l.epsilon_s()};
}

/// Writes to DIR/name under --out, otherwise to `fallback`.
class Sink {
 public:
  Sink(const RunConfig& c, std::ostream& fallback) : dir_(c.out), fallback_(fallback) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& text) {
    if (dir_.empty()) {
      fallback_ << text;
      if (!text.empty() && text.back() != '\n') fallback_ << '\n';
      return;
    }
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::invalid_argument, "cannot write " + path.string());
    f << text;
    fallback_ << "wrote " << path.string() << '\n';
  }

 private:
  std::string dir_;
  std::ostream& fallback_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

/// Every hypothesis check as a PASS/FAIL row, with the implied route.
inline int cmd_analyze(const RunConfig& c, std::ostream& out) {
  const FiniteMRW model = detail::load_finite(c, Centering::skip);
  io::json checks = io::json::array();
  bool ok = true;
  const auto row = [&](const std::string& name, bool pass, io::json detail) {
    ok = ok && pass;
    checks.push_back({{"check", name}, {"status", pass ? "PASS" : "FAIL"}, {"detail", std::move(detail)}});
  };

  const auto classes = communicating_classes(model.kernel());
  bool ergodic = false;
  try {
    const double gap = ergodicity_gap(model);
    ergodic = true;
    row("strong-ergodicity", true, {{"second_eigenvalue_modulus", gap}});
  } catch (const Error& e) {
    row("strong-ergodicity", false, {{"error", e.what()}, {"classes", format_classes(classes)}});
  }
  row("harris", is_harris(model), {{"classes", format_classes(classes)}});

  io::json report = {{"model", detail::model_name(c)}};
  bool centered = false;
  if (closed_classes(model.kernel()).size() == 1) {
    const StationaryLaw law = stationary(model);
    const Vec2 d = drift(model, law);
    centered = d.norm() <= FiniteMRW::kDriftTol;
    row("centering", centered, {{"drift", io::point_json(d)}});
    report["pi"] = std::vector<double>(law.pi.data(), law.pi.data() + law.pi.size());
  } else {
    row("centering", false, {{"error", "more than one closed class"}});
  }

  std::optional<Mat2> gamma;
  if (ergodic && centered) {
    gamma = covariance(model);
    const Eigen::Vector2cd grad = lambda_gradient(model);
    row("gradient-zero", grad.norm() < 1e-10, {{"modulus", grad.norm()}});
    const bool nondeg = !is_degenerate(*gamma);
    row("non-degenerate-covariance", nondeg, {{"gamma", io::matrix_json(*gamma)}, {"det", gamma->determinant()}});
    if (nondeg) report["D_S"] = model.lattice().llt_constant(*gamma);
  }

  if (ergodic) {
    ScanOptions so;
    so.grid_n = c.grid;
    so.tol = c.tol;
    so.workers = c.workers;
    const ScanReport scan = arithmeticity_scan(model, so);
    io::json sj = io::to_json(scan);
    if (scan.arithmetic) {
      for (const auto& g : scan.g_points) {
        if (model.lattice().distance_to_dual(g.t) <= scan.cell_diameter) continue;
        try {
          sj["witness"] = io::to_json(extract_witness(model, g.t, c.tol));
          break;
        } catch (const Error&) {
        }
      }
    }
    row("non-arithmetic", !scan.arithmetic, sj);
  }

  report["checks"] = checks;
  report["route"] = ok ? io::json("TheoremII") : io::json(nullptr);
  report["harris"] = is_harris(model);
  io::stamp(report, canonical(c));
  detail::Sink(c, out).write("analyze.json", report.dump(2));
  return ok ? kExitOk : kExitHypothesis;
}

inline int cmd_llt(const RunConfig& c, std::ostream& out) {
  const FiniteMRW model = detail::load_finite(c);
  const long nmax = c.nmax > 0 ? c.nmax : 1000;
  const auto points = detail::targets(c, {Vec2::Zero()});
  std::vector<LltQuery> queries;
  for (const auto& p : points) queries.push_back({p, std::nullopt});
  const auto series = llt_series(model, queries, nmax);
  detail::Sink sink(c, out);
  io::json summary = io::json::array();
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::ostringstream csv;
    if (c.out.empty() && series.size() > 1) csv << "# s = " << format_point(series[i].s) << '\n';
    io::write_llt_csv(csv, series[i]);
    sink.write("llt_" + std::to_string(i) + ".csv", csv.str());
    summary.push_back({{"s", io::point_json(series[i].s)},
                       {"D_S", series[i].d_s},
                       {"final_ratio", series[i].rows.back().ratio},
                       {"tail_average", series[i].tail_average}});
  }
  if (!c.pairs.empty()) {
    const double eps = detail::eps_list(c, model.lattice()).front();
    std::ostringstream csv;
    csv << "s1,s2,n,m,joint,prediction,ratio\n" << std::setprecision(17);
    for (const auto& p : points) {
      for (const auto& text : c.pairs) {
        const auto [n, m] = detail::parse_pair(text, "--pair");
        const BivariateResult b = bivariate_llt(model, p, eps, n, m);
        csv << p.x() << ',' << p.y() << ',' << n << ',' << m << ',' << b.joint << ',' << b.prediction << ','
            << b.ratio << '\n';
      }
    }
    sink.write("bivariate.csv", csv.str());
  }
  if (!c.out.empty()) {
    io::json j = {{"model", detail::model_name(c)}, {"nmax", nmax}, {"series", summary}};
    io::stamp(j, canonical(c));
    sink.write("llt_summary.json", j.dump(2));
  }
  return kExitOk;
}

inline int cmd_recur(const RunConfig& c, std::ostream& out) {
  const FiniteMRW model = detail::load_finite(c, Centering::skip);
  const auto points = detail::targets(c, {Vec2(0, 0), Vec2(1, 0), Vec2(5, 3), Vec2(-2, 7)});
  RecurrenceOptions opt;
  opt.scan.grid_n = c.grid;
  opt.scan.tol = c.tol;
  opt.scan.workers = c.workers;
  RecurrenceReport r;
  const Vec2 d = closed_classes(model.kernel()).size() == 1 ? drift(model, stationary(model)) : Vec2::Zero();
  if (d.norm() > FiniteMRW::kDriftTol) {
    r.refused = true;
    r.refusal = "walk is not centered: drift " + format_point(d);
  } else if (closed_classes(model.kernel()).size() != 1) {
    r.refused = true;
    r.refusal = "driving chain has more than one closed class";
  } else {
    r = recurrence_report(model, points, detail::eps_list(c, model.lattice()), c.horizon, opt);
  }
  io::json j = io::to_json(detail::model_name(c), r);
  io::stamp(j, canonical(c));
  detail::Sink(c, out).write("recurrence.json", j.dump(2));
  return r.refused ? kExitHypothesis : kExitOk;
}

inline int cmd_arith(const RunConfig& c, std::ostream& out) {
  const FiniteMRW model = detail::load_finite(c, Centering::skip);
  ScanOptions so;
  so.grid_n = c.grid;
  so.tol = c.tol;
  so.workers = c.workers;
  const ScanReport scan = arithmeticity_scan(model, so);
  io::json j = io::to_json(scan);
  j["model"] = detail::model_name(c);
  if (scan.arithmetic) {
    io::json witnesses = io::json::array();
    for (const auto& g : scan.g_points) {
      if (model.lattice().distance_to_dual(g.t) <= scan.cell_diameter) continue;
      try {
        witnesses.push_back(io::to_json(extract_witness(model, g.t, c.tol)));
      } catch (const Error&) {
      }
    }
    j["witnesses"] = witnesses;
    // one witness per G point; merging them into a single correction is not attempted
    j["phases_merged"] = false;
  }
  io::stamp(j, canonical(c));
  detail::Sink(c, out).write("scan.json", j.dump(2));
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
  if (!c.fixture.empty() && !c.model_path.empty()) throw Error(ErrorCode::invalid_argument, "give --fixture or --model, not both");
  std::optional<SimModel> model;
  long nmax = c.nmax, traj = c.traj;
  std::optional<Lattice> lattice;
  if (c.fixture == "AF1") {
    model = fixtures::af1();
    if (nmax <= 0) nmax = 40000;
    if (traj <= 0) traj = 10000;
  } else if (c.fixture == "IFS1") {
    model = fixtures::ifs1();
  } else {
    FiniteMRW m = detail::load_finite(c);
    lattice = m.lattice();
    model = std::move(m);
  }
  if (!lattice) lattice = Lattice::plane();
  if (nmax <= 0) nmax = 4000;
  if (traj <= 0) traj = 2000;
  const NormalizerKind kind = c.normalizer.empty() ? (c.fixture == "AF1" ? NormalizerKind::nlogn : NormalizerKind::standard)
                                                   : parse_normalizer(c.normalizer);

  SimOptions so;
  so.n_steps = nmax;
  so.n_traj = traj;
  so.seed = c.seed;
  so.workers = c.workers;
  so.checkpoints = {std::max(1L, nmax / 4), nmax};
  const auto points = detail::targets(c, {});
  const auto eps = detail::eps_list(c, *lattice);
  for (const auto& p : points) {
    for (double e : eps) so.targets.push_back({p, e});
  }
  const TrajectoryBatch batch = simulate(*model, so);
  const CltReport clt = empirical_clt(batch, kind);

  io::json j = io::batch_summary_json(batch, clt);
  j["model"] = detail::model_name(c);
  io::json hits = io::json::array();
  for (const auto& t : batch.targets) {
    const HitSeries h = empirical_hits(batch, *lattice, t.s, t.eps);
    hits.push_back({{"s", io::point_json(t.s)}, {"eps", t.eps}, {"p_final", h.p_hat.back()},
                    {"ci_final", {h.lower.back(), h.upper.back()}}});
  }
  j["hits"] = hits;
  io::stamp(j, canonical(c));
  detail::Sink sink(c, out);
  sink.write("batch.json", j.dump(2));
  std::ostringstream csv;
  io::write_checkpoint_csv(csv, clt);
  sink.write("checkpoints.csv", csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Markov random walks on R^2: local limits, recurrence and arithmeticity"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  RunConfig c;
  c.workers = default_workers();

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--fixture", c.fixture, "built-in model (lazy2d, srw2d, TS1, diag2d; AF1, IFS1 for simulate)");
    sub->add_option("--model", c.model_path, "model JSON file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (default: stdout)");
    sub->add_option("--workers", c.workers, "worker threads (default: MRWLAB_WORKERS or hardware)")->check(CLI::PositiveNumber);
    sub->add_option("--grid", c.grid, "scan grid points per axis")->check(CLI::Range(2, 4096));
    sub->add_option("--tol", c.tol, "modulus tolerance for G points")->check(CLI::PositiveNumber);
    sub->add_option("--s", c.s, "target point 'x,y' (repeatable)")->allow_extra_args(false);
    sub->add_option("--eps", c.eps, "ball radius (repeatable)")->allow_extra_args(false)->check(CLI::PositiveNumber);
  };
  auto* analyze = app.add_subcommand("analyze", "hypothesis checks and theorem route");
  common(analyze);
  auto* llt = app.add_subcommand("llt", "exact local limit series");
  common(llt);
  llt->add_option("--nmax", c.nmax, "largest n")->check(CLI::PositiveNumber);
  llt->add_option("--pair", c.pairs, "bivariate time pair 'n,m' (repeatable)")->allow_extra_args(false);
  auto* recur = app.add_subcommand("recur", "Kochen-Stone certificates");
  common(recur);
  recur->add_option("--N", c.horizon, "horizon")->check(CLI::Range(10L, 100000L));
  auto* arith = app.add_subcommand("arith", "arithmeticity scan");
  common(arith);
  auto* sim = app.add_subcommand("simulate", "Monte Carlo batch");
  common(sim);
  sim->add_option("--nmax", c.nmax, "steps per trajectory")->check(CLI::PositiveNumber);
  sim->add_option("--traj", c.traj, "trajectories")->check(CLI::PositiveNumber);
  sim->add_option("--seed", c.seed, "random seed");
  sim->add_option("--normalizer", c.normalizer, "standard or nlogn")->check(CLI::IsMember({"standard", "nlogn"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze->parsed()) return (c.command = "analyze", cmd_analyze(c, out));
    if (llt->parsed()) return (c.command = "llt", cmd_llt(c, out));
    if (recur->parsed()) return (c.command = "recur", cmd_recur(c, out));
    if (arith->parsed()) return (c.command = "arith", cmd_arith(c, out));
    if (sim->parsed()) return (c.command = "simulate", cmd_simulate(c, out));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return detail::is_hypothesis(e.code()) ? kExitHypothesis : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mrwlab::cli
