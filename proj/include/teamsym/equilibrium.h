// Copyright 2026 The Teamsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMSYM_EQUILIBRIUM_H_
#define TEAMSYM_EQUILIBRIUM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "teamsym/game.h"
#include "teamsym/payoff.h"

namespace teamsym {

struct SolverOptions {
  double tolerance = 1e-9;
  int max_newton_iters = 100;
  // Total budget of improvement-map evaluations across all fallback starts.
  int max_fixed_point_iters = 100'000;
  int multistarts = 32;
  std::uint64_t seed = 0;
  // When false, SolveSymmetricNe goes straight to the improvement-map search.
  bool support_scan = true;

  void Validate() const;
};

// A team-symmetric equilibrium together with the complementarity data that
// certifies it: every action j of team i satisfies
//   TeamActionPayoff(i, j) + slacks[i][j] == values[i],
// slacks are non-negative up to tolerance, and probs * slacks vanish.
struct EquilibriumSolution {
  SymmetricProfile profile;
  std::vector<double> values;
  std::vector<std::vector<double>> slacks;
  // max_{i,j} max(0, TeamActionPayoff(i, j) - MixedPayoff(i)).
  double residual = 0.0;
  // max_{i,j} probs[i][j] * |slacks[i][j]|.
  double complementarity = 0.0;
  std::vector<std::vector<bool>> support;
  std::string method;  // "degenerate", "support", or "fixed_point"
};

// delta[i][a] = TeamActionPayoff(i, a) - MixedPayoff(i). Rows have length
// k_i.
std::vector<std::vector<double>> DeviationGains(const PayoffTensor& game,
                                                const SymmetricProfile& profile);

// Largest positive deviation gain: the epsilon of an epsilon-Nash profile.
double NashResidual(const PayoffTensor& game, const SymmetricProfile& profile);

bool VerifyEquilibrium(const PayoffTensor& game,
                       const SymmetricProfile& profile, double eps);

// Nash's improvement map restricted to team-symmetric profiles:
//   x_i <- (x_i + sum_j max(0, delta_ij) e_j) / (1 + sum_j max(0, delta_ij)).
// Its fixed points are exactly the team-symmetric equilibria.
SymmetricProfile NashImprovementMap(const PayoffTensor& game,
                                    const SymmetricProfile& profile);

// Packs a profile with its values, slacks and residuals. Support masks use
// probabilities above `support_threshold`.
EquilibriumSolution MakeSolution(const PayoffTensor& game,
                                 const SymmetricProfile& profile,
                                 std::string method,
                                 double support_threshold = 0.0);

// True if every team's payoff is constant across the tensor, in which case
// every profile is an equilibrium.
bool IsDegenerateGame(const PayoffTensor& game);

// Support masks scanned by the solver: all combinations of non-empty
// per-team action subsets, by increasing total size then lexicographically
// on the sorted per-team action lists.
std::vector<std::vector<std::vector<int>>> CandidateSupports(
    const TeamStructure& structure);

// Solves the equal-payoff system of one support by damped Newton from
// `start`. Returns a verified equilibrium or nullopt.
std::optional<EquilibriumSolution> SolveOnSupport(
    const PayoffTensor& game, const std::vector<std::vector<int>>& support,
    const SymmetricProfile& start, const SolverOptions& opts);

// First verified equilibrium in support scan order; falls back to averaged
// improvement-map iteration. Throws kNoEquilibriumFound if the budget runs
// out.
EquilibriumSolution SolveSymmetricNe(const PayoffTensor& game,
                                     const SolverOptions& opts = {});

// Every distinct equilibrium found across all supports (deduplicated at
// max-abs distance 1e-6), in support scan order.
std::vector<EquilibriumSolution> EnumerateSymmetricNe(
    const PayoffTensor& game, const SolverOptions& opts = {});

nlohmann::json SolutionToJson(const EquilibriumSolution& solution);
nlohmann::json ProfileToJson(const SymmetricProfile& profile);

}  // namespace teamsym

#endif  // TEAMSYM_EQUILIBRIUM_H_
