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
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrwlab/error.hpp"
#include "mrwlab/lattice.hpp"

namespace mrwlab {

/// One atom of a finitely supported step law: jump v with probability p.
struct Atom {
  Vec2 v;
  double p;
};

/// Conditional law of S_1 given X_0 = from, X_1 = to.
struct EdgeSteps {
  int from;
  int to;
  std::vector<Atom> atoms;
};

enum class Centering { require, skip };

/// Finite-state Markov random walk: driving kernel Q on {0..N-1} and, for
/// each edge with Q(x,y) > 0, a finitely supported step law valued in S.
class FiniteMRW {
 public:
  static constexpr double kRowTol = 1e-12;
  static constexpr double kDriftTol = 1e-8;

  FiniteMRW(Eigen::MatrixXd kernel, std::vector<EdgeSteps> steps, Lattice lattice,
            Centering centering = Centering::require);

  int n_states() const { return static_cast<int>(kernel_.rows()); }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const Lattice& lattice() const { return lattice_; }
  const std::vector<EdgeSteps>& edges() const { return edges_; }

  /// Step atoms on edge (x, y); empty when Q(x,y) == 0.
  const std::vector<Atom>& atoms(int from, int to) const {
    static const std::vector<Atom> kEmpty;
    const int idx = edge_index_[static_cast<std::size_t>(from * n_states() + to)];
    return idx < 0 ? kEmpty : edges_[static_cast<std::size_t>(idx)].atoms;
  }

  /// Q(x,y) * E[v | x, y], one matrix per coordinate.
  Eigen::MatrixXd first_moment(int coord) const;
  /// Q(x,y) * E[v_j v_k | x, y].
  Eigen::MatrixXd second_moment(int j, int k) const;

 private:
  Eigen::MatrixXd kernel_;
  std::vector<EdgeSteps> edges_;
  std::vector<int> edge_index_;
  Lattice lattice_;
};

/// Stationary probability vector of the driving chain.
struct StationaryLaw {
  Eigen::VectorXd pi;
};

// ---------------------------------------------------------------------------
// Graph structure of the driving chain

/// Strongly connected components of the support graph of Q, in discovery
/// order of Tarjan's algorithm.
inline std::vector<std::vector<int>> communicating_classes(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<int>> classes;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w = 0; w < n; ++w) {
      if (q(v, w) <= 0.0) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> cls;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        cls.push_back(w);
      } while (w != v);
      std::sort(cls.begin(), cls.end());
      classes.push_back(std::move(cls));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return classes;
}

/// Classes with no transition leaving them.
inline std::vector<std::vector<int>> closed_classes(const Eigen::MatrixXd& q) {
  std::vector<std::vector<int>> closed;
  for (auto& cls : communicating_classes(q)) {
    std::vector<bool> inside(static_cast<std::size_t>(q.rows()), false);
    for (int x : cls) inside[static_cast<std::size_t>(x)] = true;
    bool leaves = false;
    for (int x : cls) {
      for (int y = 0; y < q.cols(); ++y) {
        if (q(x, y) > 0.0 && !inside[static_cast<std::size_t>(y)]) leaves = true;
      }
    }
    if (!leaves) closed.push_back(std::move(cls));
  }
  std::sort(closed.begin(), closed.end());
  return closed;
}

inline bool is_irreducible(const Eigen::MatrixXd& q) { return communicating_classes(q).size() == 1; }

/// Period of an irreducible chain (gcd of cycle lengths).
inline int period(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  std::vector<int> level(n, -1);
  std::vector<int> frontier{0};
  level[0] = 0;
  int g = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int x : frontier) {
      for (int y = 0; y < n; ++y) {
        if (q(x, y) <= 0.0) continue;
        if (level[y] < 0) {
          level[y] = level[x] + 1;
          next.push_back(y);
        } else {
          g = std::gcd(g, std::abs(level[x] + 1 - level[y]));
        }
      }
    }
    frontier = std::move(next);
  }
  return g == 0 ? 0 : g;
}

inline std::string format_classes(const std::vector<std::vector<int>>& classes) {
  std::ostringstream os;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    os << (i ? ", " : "") << "{";
    for (std::size_t j = 0; j < classes[i].size(); ++j) os << (j ? "," : "") << classes[i][j];
    os << "}";
  }
  return os.str();
}

namespace detail {

// Stationary law of the sub-chain restricted to a closed class.
inline Eigen::VectorXd stationary_on_class(const Eigen::MatrixXd& q, const std::vector<int>& cls) {
  const int m = static_cast<int>(cls.size());
  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) sub(i, j) = q(cls[i], cls[j]);
  }
  Eigen::VectorXd pi(m);
  if (m <= 64) {
    Eigen::MatrixXd system = sub.transpose() - Eigen::MatrixXd::Identity(m, m);
    system.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    pi = system.fullPivLu().solve(rhs);
  } else {
    // Lazy power iteration is immune to periodicity.
    const Eigen::MatrixXd lazy = 0.5 * (sub + Eigen::MatrixXd::Identity(m, m));
    pi = Eigen::VectorXd::Constant(m, 1.0 / m);
    for (int it = 0; it < 1000000; ++it) {
      Eigen::VectorXd next = lazy.transpose() * pi;
      next /= next.sum();
      const double diff = (next - pi).lpNorm<1>();
      pi = std::move(next);
      if (diff < 1e-14) break;
    }
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  Eigen::VectorXd full = Eigen::VectorXd::Zero(q.rows());
  for (int i = 0; i < m; ++i) full(cls[i]) = pi(i);
  return full;
}

inline Vec2 drift_under(const FiniteMRW& model, const Eigen::VectorXd& pi) {
  Vec2 d = Vec2::Zero();
  for (const auto& e : model.edges()) {
    for (const auto& a : e.atoms) d += pi(e.from) * model.kernel()(e.from, e.to) * a.p * a.v;
  }
  return d;
}

}  // namespace detail

/// Stationary law of the driving chain. Requires a unique closed class.
inline StationaryLaw stationary(const Eigen::MatrixXd& q) {
  const auto closed = closed_classes(q);
  if (closed.size() != 1) {
    throw Error(ErrorCode::ambiguous_stationary,
                "driving chain has several closed classes: " + format_classes(closed));
  }
  return {detail::stationary_on_class(q, closed.front())};
}

inline StationaryLaw stationary(const FiniteMRW& model) { return stationary(model.kernel()); }

/// E_{(pi,0)}[S_1].
inline Vec2 drift(const FiniteMRW& model, const StationaryLaw& law) { return detail::drift_under(model, law.pi); }

/// Second-largest eigenvalue modulus of Q; the geometric rate of Q^n -> Pi.
inline double ergodicity_gap(const Eigen::MatrixXd& q) {
  if (!is_irreducible(q)) {
    throw Error(ErrorCode::non_ergodic, "driving chain is reducible: classes " +
                                            format_classes(communicating_classes(q)));
  }
  if (const int p = period(q); p != 1) {
    throw Error(ErrorCode::non_ergodic, "driving chain has period " + std::to_string(p));
  }
  if (q.rows() == 1) return 0.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(q, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::numeric, "eigen solver failed on Q");
  std::vector<double> moduli;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) moduli.push_back(std::abs(solver.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli[1];
}

inline double ergodicity_gap(const FiniteMRW& model) { return ergodicity_gap(model.kernel()); }

/// Finite irreducible chains are Harris recurrent.
inline bool is_harris(const FiniteMRW& model) { return is_irreducible(model.kernel()); }

// ---------------------------------------------------------------------------

inline FiniteMRW::FiniteMRW(Eigen::MatrixXd kernel, std::vector<EdgeSteps> steps, Lattice lattice,
                            Centering centering)
    : kernel_(std::move(kernel)), edges_(std::move(steps)), lattice_(std::move(lattice)) {
  const int n = static_cast<int>(kernel_.rows());
  if (n < 1 || kernel_.cols() != n) throw Error(ErrorCode::invalid_model, "kernel must be a non-empty square matrix");
  if (!kernel_.allFinite() || kernel_.minCoeff() < 0.0) {
    throw Error(ErrorCode::invalid_model, "kernel entries must be finite and non-negative");
  }
  for (int x = 0; x < n; ++x) {
    if (std::abs(kernel_.row(x).sum() - 1.0) > kRowTol) {
      throw Error(ErrorCode::invalid_model, "kernel row " + std::to_string(x) + " does not sum to 1");
    }
  }
  edge_index_.assign(static_cast<std::size_t>(n * n), -1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw Error(ErrorCode::invalid_model, "edge endpoint out of range");
    }
    const auto slot = static_cast<std::size_t>(e.from * n + e.to);
    if (edge_index_[slot] >= 0) throw Error(ErrorCode::invalid_model, "duplicate edge step law");
    if (kernel_(e.from, e.to) <= 0.0) {
      throw Error(ErrorCode::invalid_model, "step law given for an edge with Q(x,y) = 0");
    }
    double total = 0.0;
    for (const auto& a : e.atoms) {
      if (!(a.p >= 0.0) || !a.v.allFinite()) throw Error(ErrorCode::invalid_model, "bad step atom");
      if (!lattice_.contains(a.v)) {
        std::ostringstream os;
        os << "step (" << a.v.x() << ", " << a.v.y() << ") on edge " << e.from << "->" << e.to << " is not in S";
        throw Error(ErrorCode::off_lattice, os.str());
      }
      total += a.p;
    }
    if (std::abs(total - 1.0) > kRowTol) {
      throw Error(ErrorCode::invalid_model, "step law on edge " + std::to_string(e.from) + "->" +
                                                std::to_string(e.to) + " does not sum to 1");
    }
    edge_index_[slot] = static_cast<int>(i);
  }
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (kernel_(x, y) > 0.0 && edge_index_[static_cast<std::size_t>(x * n + y)] < 0) {
        throw Error(ErrorCode::invalid_model,
                    "missing step law for edge " + std::to_string(x) + "->" + std::to_string(y));
      }
    }
  }
  if (centering == Centering::require) {
    // One stationary law per closed class; every one of them must see zero drift.
    for (const auto& cls : closed_classes(kernel_)) {
      const Vec2 d = detail::drift_under(*this, detail::stationary_on_class(kernel_, cls));
      if (d.norm() > kDriftTol) {
        std::ostringstream os;
        os << "drift E_pi[S_1] = (" << d.x() << ", " << d.y() << ") is not zero";
        throw Error(ErrorCode::not_centered, os.str());
      }
    }
  }
}

inline Eigen::MatrixXd FiniteMRW::first_moment(int coord) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_states(), n_states());
  for (const auto& e : edges_) {
    double mean = 0.0;
    for (const auto& a : e.atoms) mean += a.p * a.v(coord);
    m(e.from, e.to) = kernel_(e.from, e.to) * mean;
  }
  return m;
}

inline Eigen::MatrixXd FiniteMRW::second_moment(int j, int k) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_states(), n_states());
  for (const auto& e : edges_) {
    double mom = 0.0;
    for (const auto& a : e.atoms) mom += a.p * a.v(j) * a.v(k);
    m(e.from, e.to) = kernel_(e.from, e.to) * mom;
  }
  return m;
}

}  // namespace mrwlab
