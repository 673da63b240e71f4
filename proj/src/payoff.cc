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

#include "teamsym/payoff.h"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "teamsym/errors.h"

namespace teamsym {
namespace {

constexpr int kMaxExactFactorial = 20;
constexpr int kMaxBruteForcePlayers = 12;

std::uint64_t Factorial(int n) {
  static const auto table = [] {
    std::array<std::uint64_t, kMaxExactFactorial + 1> t{};
    t[0] = 1;
    for (int i = 1; i <= kMaxExactFactorial; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table[n];
}

struct TeamDraws {
  std::vector<double> weight;        // pmf of each sampled count vector
  std::vector<int> full_index;       // index of (g + fixed) among full counts
};

TeamDraws PrepareTeam(const PayoffTensor& game, int team,
                      const MixedStrategy& x, int draws,
                      const CountVector& fixed) {
  TeamDraws out;
  const int k = game.structure().num_actions(team);
  CountVector full(k);
  for (const CountVector& g : FeasibleCountVectors(draws, k)) {
    double w = MultinomialPmf(g, draws, x.probs);
    if (w == 0.0) continue;
    for (int a = 0; a < k; ++a) full[a] = g[a] + fixed[a];
    out.weight.push_back(w);
    out.full_index.push_back(game.CountIndex(team, full));
  }
  return out;
}

double Accumulate(const PayoffTensor& game, int payoff_team,
                  const std::vector<TeamDraws>& teams, int depth,
                  std::int64_t entry, double weight) {
  if (depth == static_cast<int>(teams.size())) {
    return weight * game.payoff(entry, payoff_team);
  }
  const TeamDraws& t = teams[depth];
  const std::int64_t stride = game.stride(depth);
  double total = 0.0;
  for (std::size_t c = 0; c < t.weight.size(); ++c) {
    total += Accumulate(game, payoff_team, teams, depth + 1,
                        entry + t.full_index[c] * stride, weight * t.weight[c]);
  }
  return total;
}

void CheckTeamAction(const PayoffTensor& game, int team, int action) {
  if (team < 0 || team >= game.num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch, "team index out of range");
  }
  if (action < 0 || action >= game.structure().num_actions(team)) {
    throw Error(ErrorCode::kDimensionMismatch, "action index out of range");
  }
}

// Draw counts and fixed counts for the focal-agent expectation.
void FocalSetup(const PayoffTensor& game, int team, int action,
                std::vector<int>& draws, std::vector<CountVector>& fixed) {
  const TeamStructure& s = game.structure();
  draws = s.team_sizes();
  draws[team] -= 1;
  fixed.assign(s.num_teams(), {});
  for (int j = 0; j < s.num_teams(); ++j) fixed[j].assign(s.num_actions(j), 0);
  fixed[team][action] = 1;
}

}  // namespace

MixedStrategy MixedStrategy::Pure(int num_actions, int action) {
  MixedStrategy s{std::vector<double>(num_actions, 0.0)};
  s.probs.at(action) = 1.0;
  return s;
}

MixedStrategy MixedStrategy::Uniform(int num_actions) {
  return {std::vector<double>(num_actions, 1.0 / num_actions)};
}

MixedStrategy MixedStrategy::FromProbs(std::vector<double> probs) {
  MixedStrategy s{std::move(probs)};
  if (!s.IsValid()) {
    throw Error(ErrorCode::kInvalidInput, "not a probability distribution");
  }
  double total = std::accumulate(s.probs.begin(), s.probs.end(), 0.0);
  for (double& p : s.probs) p /= total;
  return s;
}

bool MixedStrategy::IsValid(double tolerance) const {
  if (probs.empty()) return false;
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    total += p;
  }
  return std::abs(total - 1.0) <= tolerance;
}

void SymmetricProfile::CheckShape(const TeamStructure& structure) const {
  if (num_teams() != structure.num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch, "one strategy per team");
  }
  for (int i = 0; i < num_teams(); ++i) {
    if (strategies[i].size() != structure.num_actions(i)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "strategy of team " + std::to_string(i) +
                      " has the wrong number of actions");
    }
  }
}

SymmetricProfile UniformProfile(const TeamStructure& structure) {
  SymmetricProfile profile;
  for (int i = 0; i < structure.num_teams(); ++i) {
    profile.strategies.push_back(MixedStrategy::Uniform(structure.num_actions(i)));
  }
  return profile;
}

double MaxAbsDifference(const SymmetricProfile& a, const SymmetricProfile& b) {
  double d = 0.0;
  for (int i = 0; i < a.num_teams(); ++i) {
    for (int j = 0; j < a[i].size(); ++j) {
      d = std::max(d, std::abs(a[i][j] - b[i][j]));
    }
  }
  return d;
}

double MultinomialPmf(const CountVector& counts, int n,
                      std::span<const double> probs) {
  if (counts.size() != probs.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "counts and probabilities differ in length");
  }
  int total = 0;
  for (int c : counts) {
    if (c < 0) throw Error(ErrorCode::kDimensionMismatch, "negative count");
    total += c;
  }
  if (total != n) {
    throw Error(ErrorCode::kDimensionMismatch, "counts do not sum to n");
  }
  if (n <= kMaxExactFactorial) {
    std::uint64_t coeff = Factorial(n);
    double power = 1.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      coeff /= Factorial(counts[j]);
      if (counts[j] > 0) power *= std::pow(probs[j], counts[j]);
    }
    return static_cast<double>(coeff) * power;
  }
  double log_pmf = std::lgamma(n + 1.0);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) continue;
    if (probs[j] <= 0.0) return 0.0;
    log_pmf += counts[j] * std::log(probs[j]) - std::lgamma(counts[j] + 1.0);
  }
  return std::exp(log_pmf);
}

double ExpectedTeamPayoff(const PayoffTensor& game, int payoff_team,
                          const SymmetricProfile& profile,
                          std::span<const int> draws,
                          const std::vector<CountVector>& fixed) {
  const int m = game.num_teams();
  profile.CheckShape(game.structure());
  if (static_cast<int>(draws.size()) != m || static_cast<int>(fixed.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "draws and fixed need m entries");
  }
  std::vector<TeamDraws> teams;
  teams.reserve(m);
  for (int j = 0; j < m; ++j) {
    teams.push_back(PrepareTeam(game, j, profile[j], draws[j], fixed[j]));
  }
  return Accumulate(game, payoff_team, teams, 0, 0, 1.0);
}

double TeamActionPayoff(const PayoffTensor& game, int team, int action,
                        const SymmetricProfile& profile) {
  CheckTeamAction(game, team, action);
  std::vector<int> draws;
  std::vector<CountVector> fixed;
  FocalSetup(game, team, action, draws, fixed);
  return ExpectedTeamPayoff(game, team, profile, draws, fixed);
}

std::vector<double> TeamActionPayoffs(const PayoffTensor& game, int team,
                                      const SymmetricProfile& profile) {
  std::vector<double> out(game.structure().num_actions(team));
  for (int a = 0; a < static_cast<int>(out.size()); ++a) {
    out[a] = TeamActionPayoff(game, team, a, profile);
  }
  return out;
}

double MixedPayoff(const PayoffTensor& game, int team,
                   const SymmetricProfile& profile) {
  profile.CheckShape(game.structure());
  double value = 0.0;
  for (int a = 0; a < game.structure().num_actions(team); ++a) {
    if (profile[team][a] == 0.0) continue;
    value += profile[team][a] * TeamActionPayoff(game, team, a, profile);
  }
  return value;
}

std::vector<double> MixedPayoffs(const PayoffTensor& game,
                                 const SymmetricProfile& profile) {
  std::vector<double> out(game.num_teams());
  for (int i = 0; i < game.num_teams(); ++i) out[i] = MixedPayoff(game, i, profile);
  return out;
}

double TeamActionPayoffPartial(const PayoffTensor& game, int team, int action,
                               const SymmetricProfile& profile, int wrt_team,
                               int wrt_action) {
  CheckTeamAction(game, team, action);
  CheckTeamAction(game, wrt_team, wrt_action);
  std::vector<int> draws;
  std::vector<CountVector> fixed;
  FocalSetup(game, team, action, draws, fixed);
  // d/dp_b Mult(g; N, p) = N * Mult(g - e_b; N - 1, p).
  const int n_draws = draws[wrt_team];
  if (n_draws == 0) return 0.0;
  draws[wrt_team] -= 1;
  fixed[wrt_team][wrt_action] += 1;
  return n_draws * ExpectedTeamPayoff(game, team, profile, draws, fixed);
}

double LinearTeamActionPayoff(const LinearPayoffSpec& spec, int team,
                              int action, const SymmetricProfile& profile) {
  spec.Validate();
  profile.CheckShape(spec.structure);
  const auto& c = spec.CoeffsFor(team);
  const TeamStructure& s = spec.structure;
  double value = c[team][action];
  for (int k = 0; k < s.num_teams(); ++k) {
    const int agents = k == team ? s.team_size(k) - 1 : s.team_size(k);
    double mean = 0.0;
    for (int j = 0; j < s.num_actions(k); ++j) mean += c[k][j] * profile[k][j];
    value += agents * mean;
  }
  return value;
}

double BruteForcePayoff(const PayoffTensor& game, int team,
                        std::optional<int> action,
                        const SymmetricProfile& profile) {
  const TeamStructure& s = game.structure();
  profile.CheckShape(s);
  if (action) CheckTeamAction(game, team, *action);
  if (s.num_players() > kMaxBruteForcePlayers ||
      s.num_pure_profiles() > FullFormGame::kMaxProfiles) {
    throw Error(ErrorCode::kTooLarge, "joint profile space too large to enumerate");
  }
  const int n = s.num_players();
  const int focal = s.first_player(team);
  std::vector<int> actions(n, 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (int p = 0; p < n && weight != 0.0; ++p) {
      if (action && p == focal) {
        weight *= actions[p] == *action ? 1.0 : 0.0;
      } else {
        weight *= profile[s.team_of(p)][actions[p]];
      }
    }
    if (weight != 0.0) {
      total += weight * game.payoff(
                            game.EntryIndex(CountsOfProfile(s, actions)), team);
    }
    int p = n - 1;
    for (; p >= 0; --p) {
      if (++actions[p] < s.num_actions(s.team_of(p))) break;
      actions[p] = 0;
    }
    if (p < 0) break;
  }
  return total;
}

}  // namespace teamsym
