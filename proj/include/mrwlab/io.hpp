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

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrwlab/chain.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/exactdist.hpp"
#include "mrwlab/lattice.hpp"
#include "mrwlab/montecarlo.hpp"
#include "mrwlab/recurrence.hpp"
#include "mrwlab/spectral.hpp"

#ifndef MRWLAB_VERSION
#define MRWLAB_VERSION "0.1.0"
#endif

namespace mrwlab::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = MRWLAB_VERSION;

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

inline Vec2 point_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::invalid_argument, std::string("field '") + field + "' must be a pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

namespace detail {

inline const json& require(const json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw Error(ErrorCode::invalid_argument, std::string("missing field '") + field + "'");
  }
  return j.at(field);
}

inline double number(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_number()) throw Error(ErrorCode::invalid_argument, std::string("field '") + field + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lattices and models

inline json to_json(const Lattice& l) {
  switch (l.variant()) {
    case LatticeVariant::H1:
      return {{"variant", "H1"}};
    case LatticeVariant::H2:
      return {{"variant", "H2"}, {"b", l.pitch()}, {"u", point_json(l.u())}, {"v", point_json(l.v())}};
    case LatticeVariant::H3: {
      const Mat2& b = l.basis();
      return {{"variant", "H3"}, {"Bmatrix", json::array({json::array({b(0, 0), b(0, 1)}), json::array({b(1, 0), b(1, 1)})})}};
    }
  }
  return {};
}

/// {"variant": "H1"|"H2"|"H3", "b", "u", "v", "Bmatrix": [[..],[..]] (rows)}
inline Lattice lattice_from_json(const json& j) {
  const json& variant = detail::require(j, "variant");
  if (!variant.is_string()) throw Error(ErrorCode::invalid_argument, "field 'variant' must be a string");
  const std::string name = variant.get<std::string>();
  if (name == "H1") return Lattice::plane();
  if (name == "H2") {
    return Lattice::lines(detail::number(j, "b"), point_from(detail::require(j, "u"), "u"),
                          point_from(detail::require(j, "v"), "v"));
  }
  if (name == "H3") {
    const json& rows = detail::require(j, "Bmatrix");
    if (!rows.is_array() || rows.size() != 2) throw Error(ErrorCode::invalid_argument, "field 'Bmatrix' must be 2x2");
    Mat2 b;
    b.row(0) = point_from(rows[0], "Bmatrix").transpose();
    b.row(1) = point_from(rows[1], "Bmatrix").transpose();
    return Lattice::grid(b);
  }
  throw Error(ErrorCode::invalid_lattice, "unknown lattice variant '" + name + "'");
}

inline json to_json(const FiniteMRW& m) {
  json kernel = json::array();
  for (int x = 0; x < m.n_states(); ++x) {
    json row = json::array();
    for (int y = 0; y < m.n_states(); ++y) row.push_back(m.kernel()(x, y));
    kernel.push_back(row);
  }
  json steps = json::array();
  for (const auto& e : m.edges()) {
    json atoms = json::array();
    for (const auto& a : e.atoms) atoms.push_back({{"v", point_json(a.v)}, {"p", a.p}});
    steps.push_back({{"from", e.from}, {"to", e.to}, {"atoms", atoms}});
  }
  return {{"lattice", to_json(m.lattice())}, {"kernel", kernel}, {"steps", steps}};
}

/// {"lattice": {...}, "kernel": [[..]], "steps": [{"from", "to", "atoms": [{"v": [x, y], "p"}]}]}
inline FiniteMRW model_from_json(const json& j, Centering centering = Centering::require) {
  const Lattice lattice = lattice_from_json(detail::require(j, "lattice"));
  const json& rows = detail::require(j, "kernel");
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::invalid_model, "field 'kernel' must be a square matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const json& row = rows[static_cast<std::size_t>(x)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorCode::invalid_model, "field 'kernel' must be a square matrix");
    }
    for (Eigen::Index y = 0; y < n; ++y) {
      if (!row[static_cast<std::size_t>(y)].is_number()) throw Error(ErrorCode::invalid_model, "kernel entries must be numbers");
      q(x, y) = row[static_cast<std::size_t>(y)].get<double>();
    }
  }
  std::vector<EdgeSteps> steps;
  const json& list = detail::require(j, "steps");
  if (!list.is_array()) throw Error(ErrorCode::invalid_model, "field 'steps' must be an array");
  for (const auto& e : list) {
    EdgeSteps es{static_cast<int>(detail::number(e, "from")), static_cast<int>(detail::number(e, "to")), {}};
    const json& atoms = detail::require(e, "atoms");
    if (!atoms.is_array()) throw Error(ErrorCode::invalid_model, "field 'atoms' must be an array");
    for (const auto& a : atoms) es.atoms.push_back({point_from(detail::require(a, "v"), "v"), detail::number(a, "p")});
    steps.push_back(std::move(es));
  }
  return FiniteMRW(std::move(q), std::move(steps), lattice, centering);
}

inline FiniteMRW load_model(const std::string& path, Centering centering = Centering::require) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, "model file " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(j, centering);
}

// ---------------------------------------------------------------------------
// Reports

inline json matrix_json(const Mat2& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

inline json to_json(const ScanReport& r) {
  json g = json::array();
  for (const auto& p : r.g_points) g.push_back({p.t.x(), p.t.y(), p.radius});
  return {{"grid_n", r.grid_n},
          {"tol", r.tol},
          {"G_points", g},
          {"verdict", std::string(verdict_name(r))},
          {"delta_margin", r.delta_margin},
          {"delta_argmax", point_json(r.delta_argmax)},
          {"alpha", r.alpha},
          {"cell_diameter", r.cell_diameter},
          {"lipschitz_slack", r.lipschitz_slack}};
}

inline json to_json(const ArithmeticWitness& w) {
  json phase = json::array();
  for (Eigen::Index i = 0; i < w.phase.size(); ++i) phase.push_back(w.phase(i));
  return {{"t", point_json(w.t)},
          {"lambda", json::array({w.lambda.real(), w.lambda.imag()})},
          {"beta", w.beta},
          {"phase", phase}};
}

inline std::string row_verdict(const KochenStoneCertificate& c) {
  if (c.transient) return "TRANSIENT";
  return c.divergence_flag ? "RECURRENT" : "UNDECIDED";
}

inline json to_json(const KochenStoneCertificate& c) {
  return {{"s", point_json(c.s)},
          {"eps", c.eps},
          {"start", c.start},
          {"N", c.horizon},
          {"sum_p", c.sum_p},
          {"ratio", c.ratio},
          {"d_est", c.d_est},
          {"bound", c.lower_bound},
          {"decay_exponent", c.decay_exponent},
          {"divergence_flag", c.divergence_flag},
          {"verdict", row_verdict(c)},
          {"conclusion", c.conclusion}};
}

inline json to_json(const std::string& model_name, const RecurrenceReport& r) {
  json out = {{"model", model_name}, {"harris", r.harris}};
  if (r.refused) {
    out["route"] = nullptr;
    out["refusal"] = r.refusal;
    if (r.witness) out["witness"] = to_json(*r.witness);
    out["rows"] = json::array();
    return out;
  }
  out["route"] = r.route;
  out["gamma"] = matrix_json(r.gamma);
  out["D_S"] = r.d_s;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = to_json(row.cert);
    j["llt_ratio"] = row.llt_ratio;
    rows.push_back(j);
  }
  out["rows"] = rows;
  out["verdict"] = r.verdict.recurrent_everywhere ? "RECURRENT-EVERYWHERE" : "WITHHELD";
  out["e_eps"] = r.verdict.e_eps;
  out["statement"] = r.verdict.statement;
  return out;
}

/// Adds version and config hash so a report can be traced to the run that produced it.
inline void stamp(json& report, const std::string& config) {
  report["version"] = kVersion;
  report["config_hash"] = config_hash(config);
}

// ---------------------------------------------------------------------------
// Series and snapshots

inline void write_llt_csv(std::ostream& out, const LltSeries& series) {
  out << "n,A_n,p_n,prediction,ratio\n" << std::setprecision(17);
  for (const auto& r : series.rows) out << r.n << ',' << r.a_norm << ',' << r.p << ',' << r.prediction << ',' << r.ratio << '\n';
}

inline json snapshot_json(const LatticeDistribution& d) {
  json states = json::array();
  for (int x = 0; x < d.n_states(); ++x) states.push_back(d.state_mass(x));
  const Window& w = d.window();
  return {{"n", d.n()},
          {"window", {{"lo", {w.lo.x(), w.lo.y()}}, {"hi", {w.hi.x(), w.hi.y()}}}},
          {"layout", "row-major over (k1, k2)"},
          {"lost_mass", d.lost_mass()},
          {"mass", states}};
}

inline json batch_summary_json(const TrajectoryBatch& b, const CltReport& clt) {
  json cps = json::array();
  for (const auto& c : clt.checkpoints) {
    cps.push_back({{"n", c.n},
                   {"A_n", c.a_norm},
                   {"cov", matrix_json(c.cov)},
                   {"robust_cov", matrix_json(c.robust_cov)},
                   {"normality_stat", c.normality_stat},
                   {"p_value", c.p_value}});
  }
  return {{"seed", b.seed},
          {"n_traj", b.n_traj},
          {"n_steps", b.n_steps},
          {"excluded", b.n_excluded},
          {"normalizer", std::string(to_string(clt.kind))},
          {"checkpoints", cps},
          {"stabilization", clt.stabilization},
          {"robust_stabilization", clt.robust_stabilization}};
}

inline void write_checkpoint_csv(std::ostream& out, const CltReport& clt) {
  out << "n,cov11,cov12,cov22,normality_stat,p_value\n" << std::setprecision(17);
  for (const auto& c : clt.checkpoints) {
    out << c.n << ',' << c.cov(0, 0) << ',' << c.cov(0, 1) << ',' << c.cov(1, 1) << ',' << c.normality_stat << ','
        << c.p_value << '\n';
  }
}

}  // namespace mrwlab::io
