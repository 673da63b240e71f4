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

#ifndef TEAMSYM_GAME_H_
#define TEAMSYM_GAME_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace teamsym {

// Number of agents of one team playing each action. Actions are 0-indexed.
using CountVector = std::vector<int>;

// Shape of a team game: m >= 2 teams, team i has n_i >= 1 interchangeable
// players, each choosing among k_i >= 2 actions. Players are numbered team by
// team: team 0 owns players [0, n_0), team 1 owns [n_0, n_0 + n_1), etc.
class TeamStructure {
 public:
  TeamStructure(std::vector<int> team_sizes, std::vector<int> action_counts);

  int num_teams() const { return static_cast<int>(team_sizes_.size()); }
  int num_players() const { return num_players_; }
  int team_size(int team) const { return team_sizes_[team]; }
  int num_actions(int team) const { return action_counts_[team]; }
  int max_actions() const;
  const std::vector<int>& team_sizes() const { return team_sizes_; }
  const std::vector<int>& action_counts() const { return action_counts_; }

  int team_of(int player) const { return player_team_[player]; }
  int first_player(int team) const { return first_player_[team]; }

  // prod_i C(n_i + k_i - 1, k_i - 1).
  std::int64_t num_count_entries() const;
  // prod_i k_i^{n_i}, saturating at INT64_MAX.
  std::int64_t num_pure_profiles() const;

  bool operator==(const TeamStructure& other) const {
    return team_sizes_ == other.team_sizes_ &&
           action_counts_ == other.action_counts_;
  }

 private:
  std::vector<int> team_sizes_;
  std::vector<int> action_counts_;
  std::vector<int> player_team_;
  std::vector<int> first_player_;
  int num_players_ = 0;
};

// C(n, k) in 64-bit integers; callers keep arguments small.
std::int64_t Binomial(int n, int k);

// All length-k non-negative integer vectors summing to n, ascending
// lexicographic order. Length is C(n + k - 1, k - 1).
std::vector<CountVector> FeasibleCountVectors(int n, int k);

// Canonical team-symmetric common-payoff game: one payoff per team for every
// joint count tuple (g_1, ..., g_m). Entries are ordered by the joint tuple
// in lexicographic order with team 0 most significant.
class PayoffTensor {
 public:
  // All payoffs start at zero.
  explicit PayoffTensor(TeamStructure structure);

  const TeamStructure& structure() const { return structure_; }
  int num_teams() const { return structure_.num_teams(); }
  std::int64_t num_entries() const { return num_entries_; }

  // Count vectors of a full team (summing to n_i), canonical order.
  const std::vector<CountVector>& team_counts(int team) const {
    return team_counts_[team];
  }
  // Position of g within team_counts(team). Throws kInvalidInput if absent.
  int CountIndex(int team, const CountVector& counts) const;
  std::int64_t stride(int team) const { return strides_[team]; }

  std::int64_t EntryIndex(std::span<const int> per_team_index) const;
  std::int64_t EntryIndex(const std::vector<CountVector>& counts) const;
  std::vector<int> PerTeamIndex(std::int64_t entry) const;
  std::vector<CountVector> JointCounts(std::int64_t entry) const;

  double payoff(std::int64_t entry, int team) const {
    return values_[entry * num_teams() + team];
  }
  std::span<const double> payoffs(std::int64_t entry) const {
    return {values_.data() + entry * num_teams(),
            static_cast<std::size_t>(num_teams())};
  }
  std::vector<double> At(const std::vector<CountVector>& counts) const;

  void set_payoff(std::int64_t entry, int team, double value);
  void set_payoffs(std::int64_t entry, std::span<const double> values);

  bool operator==(const PayoffTensor& other) const {
    return structure_ == other.structure_ && values_ == other.values_;
  }

 private:
  TeamStructure structure_;
  std::vector<std::vector<CountVector>> team_counts_;
  std::vector<std::map<CountVector, int>> count_index_;
  std::vector<std::int64_t> strides_;
  std::int64_t num_entries_ = 0;
  std::vector<double> values_;
};

// Per-player normal-form game over joint pure profiles. Profiles are indexed
// in mixed radix with player 0 most significant.
class FullFormGame {
 public:
  static constexpr std::int64_t kMaxProfiles = 10'000'000;

  // Throws kTooLarge if prod_i k_i^{n_i} exceeds kMaxProfiles.
  explicit FullFormGame(TeamStructure structure);

  const TeamStructure& structure() const { return structure_; }
  int num_players() const { return structure_.num_players(); }
  std::int64_t num_profiles() const { return num_profiles_; }

  std::vector<int> Profile(std::int64_t index) const;
  std::int64_t ProfileIndex(std::span<const int> actions) const;

  double payoff(std::int64_t profile, int player) const {
    return values_[profile * num_players() + player];
  }
  void set_payoff(std::int64_t profile, int player, double value) {
    values_[profile * num_players() + player] = value;
  }

 private:
  TeamStructure structure_;
  std::int64_t num_profiles_ = 0;
  std::vector<std::int64_t> radix_;
  std::vector<double> values_;
};

// Per-team action tallies of a joint pure profile.
std::vector<CountVector> CountsOfProfile(const TeamStructure& structure,
                                         std::span<const int> actions);

// Common payoffs within teams: u_i(a) == u_j(a) for teammates i, j.
bool CheckCommonPayoff(const FullFormGame& game);

// Describes a failure of u_{phi(i)}(a) == u_i(a_phi) for a within-team
// permutation phi, where (a_phi)_j = a_{phi(j)}.
struct SymmetryWitness {
  std::vector<int> profile;
  std::vector<int> permutation;  // phi, as a map player -> player
  int player = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string Describe() const;
};

// Exhaustive over all within-team permutations when prod_i n_i! <= 10,000,
// otherwise over all adjacent within-team transpositions.
std::optional<SymmetryWitness> FindSymmetryViolation(const FullFormGame& game);
bool CheckTeamSymmetry(const FullFormGame& game);

// Throws kSymmetryViolation (with a witness in the message) unless the game is
// common-payoff and team-symmetric.
PayoffTensor ReduceToCountForm(const FullFormGame& game);
FullFormGame ExpandToFullForm(const PayoffTensor& tensor);

// Integer payoffs uniform on [lo, hi]. With zero_sum, team 1 gets the negation
// of team 0 (requires m == 2); otherwise every team is drawn independently.
PayoffTensor GenRandomGame(const TeamStructure& structure, int lo, int hi,
                           bool zero_sum, std::uint64_t seed);

// Generalized matching pennies: two teams of two, actions H = 0 and T = 1.
PayoffTensor GmpGame(double omega);
// The unique-equilibrium guarantee for GMP holds only for 0 < omega < 1.
bool GmpOmegaInUniqueRange(double omega);

// Payoffs linear in the counts: u(g) = sum_k sum_j c[k][j] * (g_k)_j, shared
// by every team. If per_team_coeffs is set, team i uses per_team_coeffs[i].
struct LinearPayoffSpec {
  TeamStructure structure;
  std::vector<std::vector<double>> coeffs;  // team k x action j
  std::optional<std::vector<std::vector<std::vector<double>>>> per_team_coeffs;

  // Coefficient matrix seen by `team`.
  const std::vector<std::vector<double>>& CoeffsFor(int team) const;
  void Validate() const;
};

LinearPayoffSpec ZeroLinearSpec(const TeamStructure& structure);
PayoffTensor LinearGame(const LinearPayoffSpec& spec);

}  // namespace teamsym

#endif  // TEAMSYM_GAME_H_
