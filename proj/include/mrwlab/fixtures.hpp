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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrwlab/chain.hpp"

namespace mrwlab::fixtures {

inline FiniteMRW single_state(std::vector<Atom> atoms, const Lattice& lattice = Lattice::integer_grid(),
                              Centering centering = Centering::require) {
  return FiniteMRW(Eigen::MatrixXd::Ones(1, 1), {EdgeSteps{0, 0, std::move(atoms)}}, lattice, centering);
}

/// Lazy walk on Z^2: stay w.p. 1/3, each unit move w.p. 1/6.
inline FiniteMRW lazy2d() {
  return single_state({{Vec2(0, 0), 1.0 / 3.0},
                       {Vec2(1, 0), 1.0 / 6.0},
                       {Vec2(-1, 0), 1.0 / 6.0},
                       {Vec2(0, 1), 1.0 / 6.0},
                       {Vec2(0, -1), 1.0 / 6.0}});
}

/// Simple random walk on Z^2. Arithmetic: parity of the coordinate sum flips each step.
inline FiniteMRW srw2d() {
  return single_state({{Vec2(1, 0), 0.25}, {Vec2(-1, 0), 0.25}, {Vec2(0, 1), 0.25}, {Vec2(0, -1), 0.25}});
}

/// Diagonal walk +-(1,1); lives on the proper sublattice {k1 == k2}.
inline FiniteMRW diag2d() { return single_state({{Vec2(1, 1), 0.5}, {Vec2(-1, -1), 0.5}}); }

/// Two-state Markov-modulated walk. State 0 moves horizontally, state 1
/// vertically; each holds still half the time.
inline FiniteMRW ts1() {
  Eigen::MatrixXd q(2, 2);
  q << 0.7, 0.3, 0.4, 0.6;
  const std::vector<Atom> horizontal{{Vec2(0, 0), 0.5}, {Vec2(1, 0), 0.25}, {Vec2(-1, 0), 0.25}};
  const std::vector<Atom> vertical{{Vec2(0, 0), 0.5}, {Vec2(0, 1), 0.25}, {Vec2(0, -1), 0.25}};
  return FiniteMRW(q,
                   {EdgeSteps{0, 0, horizontal}, EdgeSteps{0, 1, horizontal}, EdgeSteps{1, 0, vertical},
                    EdgeSteps{1, 1, vertical}},
                   Lattice::integer_grid());
}

inline std::vector<std::string> finite_names() { return {"lazy2d", "srw2d", "TS1", "diag2d"}; }

inline std::optional<FiniteMRW> by_name(std::string_view name) {
  if (name == "lazy2d") return lazy2d();
  if (name == "srw2d") return srw2d();
  if (name == "TS1") return ts1();
  if (name == "diag2d") return diag2d();
  return std::nullopt;
}

}  // namespace mrwlab::fixtures
