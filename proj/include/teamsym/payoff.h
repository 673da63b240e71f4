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

#ifndef TEAMSYM_PAYOFF_H_
#define TEAMSYM_PAYOFF_H_

#include <optional>
#include <span>
#include <vector>

#include "teamsym/game.h"

namespace teamsym {

// A distribution over one team's actions.
struct MixedStrategy {
  std::vector<double> probs;

  static MixedStrategy Pure(int num_actions, int action);
  static MixedStrategy Uniform(int num_actions);
  // Validates non-negativity and unit sum (within 1e-12, after which the
  // vector is renormalized). Throws kInvalidInput.
  static MixedStrategy FromProbs(std::vector<double> probs);

  int size() const { return static_cast<int>(probs.size()); }
  double operator[](int action) const { return probs[action]; }
  bool IsValid(double tolerance = 1e-12) const;
};

// One mixed strategy per team, shared by every member of that team.
struct SymmetricProfile {
  std::vector<MixedStrategy> strategies;

  int num_teams() const { return static_cast<int>(strategies.size()); }
  const MixedStrategy& operator[](int team) const { return strategies[team]; }
  MixedStrategy& operator[](int team) { return strategies[team]; }

  // Throws kDimensionMismatch if the profile does not fit the structure.
  void CheckShape(const TeamStructure& structure) const;
};

SymmetricProfile UniformProfile(const TeamStructure& structure);
// Largest absolute difference between corresponding probabilities.
double MaxAbsDifference(const SymmetricProfile& a, const SymmetricProfile& b);

// n! / prod_j counts_j! * prod_j p_j^{counts_j}, with 0^0 = 1. Exact integer
// coefficients for n <= 20, log-space above.
double MultinomialPmf(const CountVector& counts, int n,
                      std::span<const double> probs);

// E[u_team(g_1 + fixed_1, ..., g_m + fixed_m)] where g_j counts draws[j]
// independent samples from profile[j]. `fixed[j]` must sum to
// n_j - draws[j]. Every focal-agent quantity below is a special case.
double ExpectedTeamPayoff(const PayoffTensor& game, int payoff_team,
                          const SymmetricProfile& profile,
                          std::span<const int> draws,
                          const std::vector<CountVector>& fixed);

// Expected payoff of one team-i agent playing `action` while its n_i - 1
// teammates mix by x_i and every other team j mixes n_j agents by x_j.
double TeamActionPayoff(const PayoffTensor& game, int team, int action,
                        const SymmetricProfile& profile);
std::vector<double> TeamActionPayoffs(const PayoffTensor& game, int team,
                                      const SymmetricProfile& profile);

// sum_a x_i[a] * TeamActionPayoff(i, a).
double MixedPayoff(const PayoffTensor& game, int team,
                   const SymmetricProfile& profile);
std::vector<double> MixedPayoffs(const PayoffTensor& game,
                                 const SymmetricProfile& profile);

// d TeamActionPayoff(team, action) / d x_{wrt_team}[wrt_action], treating
// the strategy entries as free variables of the multinomial polynomial.
double TeamActionPayoffPartial(const PayoffTensor& game, int team, int action,
                               const SymmetricProfile& profile, int wrt_team,
                               int wrt_action);

// Closed form for games linear in the counts.
double LinearTeamActionPayoff(const LinearPayoffSpec& spec, int team,
                              int action, const SymmetricProfile& profile);

// Test oracle: enumerates every joint pure profile of all n players and
// weights it by the product of per-player probabilities. With `action` set,
// the team's first player is pinned to that action. Throws kTooLarge if
// n > 12 or prod_i k_i^{n_i} > 1e7.
double BruteForcePayoff(const PayoffTensor& game, int team,
                        std::optional<int> action,
                        const SymmetricProfile& profile);

}  // namespace teamsym

#endif  // TEAMSYM_PAYOFF_H_
