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

#include "teamsym/game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "teamsym/errors.h"
#include "teamsym/rng.h"

namespace teamsym {
namespace {

constexpr double kRelativeTolerance = 1e-12;
constexpr std::int64_t kMaxExhaustivePermutations = 10'000;

std::int64_t SaturatingMul(std::int64_t a, std::int64_t b) {
  if (a != 0 && b > std::numeric_limits<std::int64_t>::max() / a) {
    return std::numeric_limits<std::int64_t>::max();
  }
  return a * b;
}

void AppendCountVectors(int remaining, int slots, CountVector& prefix,
                        std::vector<CountVector>& out) {
  if (slots == 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    prefix.push_back(c);
    AppendCountVectors(remaining - c, slots - 1, prefix, out);
    prefix.pop_back();
  }
}

bool AllIntegral(const FullFormGame& game) {
  for (std::int64_t p = 0; p < game.num_profiles(); ++p) {
    for (int i = 0; i < game.num_players(); ++i) {
      double v = game.payoff(p, i);
      if (v != std::floor(v)) return false;
    }
  }
  return true;
}

bool PayoffsEqual(double a, double b, bool exact) {
  if (exact) return a == b;
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= kRelativeTolerance * scale;
}

std::string JoinInts(const std::vector<int>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

// Checks one permutation against every profile.
std::optional<SymmetryWitness> CheckPermutation(const FullFormGame& game,
                                                const std::vector<int>& phi,
                                                bool exact) {
  const int n = game.num_players();
  std::vector<int> permuted(n);
  for (std::int64_t p = 0; p < game.num_profiles(); ++p) {
    std::vector<int> a = game.Profile(p);
    for (int j = 0; j < n; ++j) permuted[j] = a[phi[j]];
    std::int64_t q = game.ProfileIndex(permuted);
    for (int i = 0; i < n; ++i) {
      double lhs = game.payoff(p, phi[i]);
      double rhs = game.payoff(q, i);
      if (!PayoffsEqual(lhs, rhs, exact)) {
        return SymmetryWitness{a, phi, i, lhs, rhs};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

TeamStructure::TeamStructure(std::vector<int> team_sizes,
                             std::vector<int> action_counts)
    : team_sizes_(std::move(team_sizes)),
      action_counts_(std::move(action_counts)) {
  if (team_sizes_.size() < 2) {
    throw Error(ErrorCode::kInvalidStructure, "need at least two teams");
  }
  if (team_sizes_.size() != action_counts_.size()) {
    throw Error(ErrorCode::kInvalidStructure,
                "team_sizes and action_counts differ in length");
  }
  for (std::size_t i = 0; i < team_sizes_.size(); ++i) {
    if (team_sizes_[i] < 1) {
      throw Error(ErrorCode::kInvalidStructure, "team size must be >= 1");
    }
    if (action_counts_[i] < 2) {
      throw Error(ErrorCode::kInvalidStructure, "action count must be >= 2");
    }
    first_player_.push_back(num_players_);
    for (int p = 0; p < team_sizes_[i]; ++p) {
      player_team_.push_back(static_cast<int>(i));
    }
    num_players_ += team_sizes_[i];
  }
}

int TeamStructure::max_actions() const {
  return *std::max_element(action_counts_.begin(), action_counts_.end());
}

std::int64_t TeamStructure::num_count_entries() const {
  std::int64_t total = 1;
  for (int i = 0; i < num_teams(); ++i) {
    total = SaturatingMul(
        total, Binomial(team_sizes_[i] + action_counts_[i] - 1,
                        action_counts_[i] - 1));
  }
  return total;
}

std::int64_t TeamStructure::num_pure_profiles() const {
  std::int64_t total = 1;
  for (int p = 0; p < num_players_; ++p) {
    total = SaturatingMul(total, action_counts_[player_team_[p]]);
  }
  return total;
}

std::int64_t Binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

std::vector<CountVector> FeasibleCountVectors(int n, int k) {
  if (n < 0 || k < 1) {
    throw Error(ErrorCode::kInvalidInput, "need n >= 0 and k >= 1");
  }
  std::vector<CountVector> out;
  out.reserve(static_cast<std::size_t>(Binomial(n + k - 1, k - 1)));
  CountVector prefix;
  AppendCountVectors(n, k, prefix, out);
  return out;
}

// ---------------------------------------------------------------------------
// PayoffTensor

PayoffTensor::PayoffTensor(TeamStructure structure)
    : structure_(std::move(structure)) {
  const int m = structure_.num_teams();
  team_counts_.resize(m);
  count_index_.resize(m);
  strides_.assign(m, 1);
  for (int i = 0; i < m; ++i) {
    team_counts_[i] = FeasibleCountVectors(structure_.team_size(i),
                                           structure_.num_actions(i));
    for (std::size_t c = 0; c < team_counts_[i].size(); ++c) {
      count_index_[i].emplace(team_counts_[i][c], static_cast<int>(c));
    }
  }
  for (int i = m - 2; i >= 0; --i) {
    strides_[i] = strides_[i + 1] *
                  static_cast<std::int64_t>(team_counts_[i + 1].size());
  }
  num_entries_ = strides_[0] * static_cast<std::int64_t>(team_counts_[0].size());
  values_.assign(num_entries_ * m, 0.0);
}

int PayoffTensor::CountIndex(int team, const CountVector& counts) const {
  auto it = count_index_[team].find(counts);
  if (it == count_index_[team].end()) {
    throw Error(ErrorCode::kInvalidInput,
                "count vector " + JoinInts(counts) + " infeasible for team " +
                    std::to_string(team));
  }
  return it->second;
}

std::int64_t PayoffTensor::EntryIndex(std::span<const int> per_team_index) const {
  std::int64_t entry = 0;
  for (int i = 0; i < num_teams(); ++i) entry += per_team_index[i] * strides_[i];
  return entry;
}

std::int64_t PayoffTensor::EntryIndex(
    const std::vector<CountVector>& counts) const {
  if (static_cast<int>(counts.size()) != num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch, "one count vector per team");
  }
  std::int64_t entry = 0;
  for (int i = 0; i < num_teams(); ++i) {
    entry += CountIndex(i, counts[i]) * strides_[i];
  }
  return entry;
}

std::vector<int> PayoffTensor::PerTeamIndex(std::int64_t entry) const {
  std::vector<int> idx(num_teams());
  for (int i = 0; i < num_teams(); ++i) {
    idx[i] = static_cast<int>(entry / strides_[i]);
    entry %= strides_[i];
  }
  return idx;
}

std::vector<CountVector> PayoffTensor::JointCounts(std::int64_t entry) const {
  std::vector<int> idx = PerTeamIndex(entry);
  std::vector<CountVector> out(num_teams());
  for (int i = 0; i < num_teams(); ++i) out[i] = team_counts_[i][idx[i]];
  return out;
}

std::vector<double> PayoffTensor::At(
    const std::vector<CountVector>& counts) const {
  auto p = payoffs(EntryIndex(counts));
  return {p.begin(), p.end()};
}

void PayoffTensor::set_payoff(std::int64_t entry, int team, double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidInput, "payoffs must be finite");
  }
  values_[entry * num_teams() + team] = value;
}

void PayoffTensor::set_payoffs(std::int64_t entry,
                               std::span<const double> values) {
  if (static_cast<int>(values.size()) != num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch, "one payoff per team");
  }
  for (int i = 0; i < num_teams(); ++i) set_payoff(entry, i, values[i]);
}

// ---------------------------------------------------------------------------
// FullFormGame

FullFormGame::FullFormGame(TeamStructure structure)
    : structure_(std::move(structure)) {
  num_profiles_ = structure_.num_pure_profiles();
  if (num_profiles_ > kMaxProfiles) {
    throw Error(ErrorCode::kTooLarge,
                "full-form game would have more than 1e7 pure profiles");
  }
  const int n = structure_.num_players();
  radix_.assign(n, 1);
  for (int p = n - 2; p >= 0; --p) {
    radix_[p] = radix_[p + 1] * structure_.num_actions(structure_.team_of(p + 1));
  }
  values_.assign(num_profiles_ * n, 0.0);
}

std::vector<int> FullFormGame::Profile(std::int64_t index) const {
  std::vector<int> actions(num_players());
  for (int p = 0; p < num_players(); ++p) {
    actions[p] = static_cast<int>(index / radix_[p]);
    index %= radix_[p];
  }
  return actions;
}

std::int64_t FullFormGame::ProfileIndex(std::span<const int> actions) const {
  std::int64_t index = 0;
  for (int p = 0; p < num_players(); ++p) index += actions[p] * radix_[p];
  return index;
}

std::vector<CountVector> CountsOfProfile(const TeamStructure& structure,
                                         std::span<const int> actions) {
  std::vector<CountVector> counts(structure.num_teams());
  for (int i = 0; i < structure.num_teams(); ++i) {
    counts[i].assign(structure.num_actions(i), 0);
  }
  for (int p = 0; p < structure.num_players(); ++p) {
    const int team = structure.team_of(p);
    if (actions[p] < 0 || actions[p] >= structure.num_actions(team)) {
      throw Error(ErrorCode::kInvalidAction,
                  "player " + std::to_string(p) + " action out of range");
    }
    ++counts[team][actions[p]];
  }
  return counts;
}

bool CheckCommonPayoff(const FullFormGame& game) {
  const TeamStructure& s = game.structure();
  const bool exact = AllIntegral(game);
  for (std::int64_t p = 0; p < game.num_profiles(); ++p) {
    for (int i = 0; i < s.num_teams(); ++i) {
      const int first = s.first_player(i);
      for (int q = first + 1; q < first + s.team_size(i); ++q) {
        if (!PayoffsEqual(game.payoff(p, first), game.payoff(p, q), exact)) {
          return false;
        }
      }
    }
  }
  return true;
}

std::string SymmetryWitness::Describe() const {
  std::ostringstream os;
  os << "profile " << JoinInts(profile) << ", permutation "
     << JoinInts(permutation) << ", player " << player << ": u_phi(i)(a)="
     << lhs << " but u_i(a_phi)=" << rhs;
  return os.str();
}

std::optional<SymmetryWitness> FindSymmetryViolation(const FullFormGame& game) {
  const TeamStructure& s = game.structure();
  const bool exact = AllIntegral(game);
  const int n = s.num_players();

  std::int64_t group_order = 1;
  for (int i = 0; i < s.num_teams(); ++i) {
    for (int f = 2; f <= s.team_size(i); ++f) {
      group_order = SaturatingMul(group_order, f);
    }
  }

  std::vector<int> identity(n);
  std::iota(identity.begin(), identity.end(), 0);

  if (group_order > kMaxExhaustivePermutations) {
    // Adjacent transpositions generate the within-team permutation group.
    for (int i = 0; i < s.num_teams(); ++i) {
      const int first = s.first_player(i);
      for (int p = first; p + 1 < first + s.team_size(i); ++p) {
        std::vector<int> phi = identity;
        std::swap(phi[p], phi[p + 1]);
        if (auto w = CheckPermutation(game, phi, exact)) return w;
      }
    }
    return std::nullopt;
  }

  // Odometer over per-team permutations: advance the last team first.
  std::vector<int> phi = identity;
  while (true) {
    if (phi != identity) {
      if (auto w = CheckPermutation(game, phi, exact)) return w;
    }
    int team = s.num_teams() - 1;
    for (; team >= 0; --team) {
      auto begin = phi.begin() + s.first_player(team);
      auto end = begin + s.team_size(team);
      if (std::next_permutation(begin, end)) break;
    }
    if (team < 0) break;
  }
  return std::nullopt;
}

bool CheckTeamSymmetry(const FullFormGame& game) {
  return !FindSymmetryViolation(game).has_value();
}

PayoffTensor ReduceToCountForm(const FullFormGame& game) {
  const TeamStructure& s = game.structure();
  if (!CheckCommonPayoff(game)) {
    // Locate a witness for the message.
    for (std::int64_t p = 0; p < game.num_profiles(); ++p) {
      for (int i = 0; i < s.num_teams(); ++i) {
        const int first = s.first_player(i);
        for (int q = first + 1; q < first + s.team_size(i); ++q) {
          if (game.payoff(p, first) != game.payoff(p, q)) {
            throw Error(ErrorCode::kSymmetryViolation,
                        "payoffs not common within team " + std::to_string(i) +
                            " at profile " + JoinInts(game.Profile(p)) +
                            " (players " + std::to_string(first) + " and " +
                            std::to_string(q) + ")");
          }
        }
      }
    }
  }
  if (auto witness = FindSymmetryViolation(game)) {
    throw Error(ErrorCode::kSymmetryViolation, witness->Describe());
  }

  PayoffTensor tensor(s);
  std::vector<int> actions(s.num_players());
  for (std::int64_t e = 0; e < tensor.num_entries(); ++e) {
    std::vector<CountVector> counts = tensor.JointCounts(e);
    // Canonical realization: teammates sorted by action.
    for (int i = 0; i < s.num_teams(); ++i) {
      int p = s.first_player(i);
      for (int a = 0; a < s.num_actions(i); ++a) {
        for (int c = 0; c < counts[i][a]; ++c) actions[p++] = a;
      }
    }
    std::int64_t profile = game.ProfileIndex(actions);
    for (int i = 0; i < s.num_teams(); ++i) {
      tensor.set_payoff(e, i, game.payoff(profile, s.first_player(i)));
    }
  }
  return tensor;
}

FullFormGame ExpandToFullForm(const PayoffTensor& tensor) {
  const TeamStructure& s = tensor.structure();
  FullFormGame game(s);
  for (std::int64_t p = 0; p < game.num_profiles(); ++p) {
    std::vector<int> actions = game.Profile(p);
    std::int64_t entry = tensor.EntryIndex(CountsOfProfile(s, actions));
    for (int q = 0; q < s.num_players(); ++q) {
      game.set_payoff(p, q, tensor.payoff(entry, s.team_of(q)));
    }
  }
  return game;
}

PayoffTensor GenRandomGame(const TeamStructure& structure, int lo, int hi,
                           bool zero_sum, std::uint64_t seed) {
  if (lo > hi) throw Error(ErrorCode::kInvalidInput, "need lo <= hi");
  if (zero_sum && structure.num_teams() != 2) {
    throw Error(ErrorCode::kZeroSumRequiresTwoTeams,
                "zero-sum generation needs exactly two teams");
  }
  PayoffTensor tensor(structure);
  Rng rng(seed);
  for (std::int64_t e = 0; e < tensor.num_entries(); ++e) {
    if (zero_sum) {
      double v = static_cast<double>(UniformInt(rng, lo, hi));
      tensor.set_payoff(e, 0, v);
      tensor.set_payoff(e, 1, v == 0.0 ? 0.0 : -v);
    } else {
      for (int i = 0; i < tensor.num_teams(); ++i) {
        tensor.set_payoff(e, i, static_cast<double>(UniformInt(rng, lo, hi)));
      }
    }
  }
  return tensor;
}

bool GmpOmegaInUniqueRange(double omega) { return omega > 0.0 && omega < 1.0; }

PayoffTensor GmpGame(double omega) {
  PayoffTensor tensor(TeamStructure({2, 2}, {2, 2}));
  // Rows: team 0 plays HH, HT/TH, TT. Columns: same for team 1. Values are
  // team 0's payoff; team 1 receives the negation.
  const double table[3][3] = {
      {1.0, omega, -1.0},
      {-omega, 0.0, -omega},
      {-1.0, omega, 1.0},
  };
  const CountVector rows[3] = {{2, 0}, {1, 1}, {0, 2}};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::int64_t e = tensor.EntryIndex({rows[r], rows[c]});
      double v = table[r][c];
      tensor.set_payoff(e, 0, v);
      tensor.set_payoff(e, 1, v == 0.0 ? 0.0 : -v);
    }
  }
  return tensor;
}

const std::vector<std::vector<double>>& LinearPayoffSpec::CoeffsFor(
    int team) const {
  return per_team_coeffs ? (*per_team_coeffs)[team] : coeffs;
}

void LinearPayoffSpec::Validate() const {
  auto check = [&](const std::vector<std::vector<double>>& c) {
    if (static_cast<int>(c.size()) != structure.num_teams()) {
      throw Error(ErrorCode::kDimensionMismatch, "one coefficient row per team");
    }
    for (int k = 0; k < structure.num_teams(); ++k) {
      if (static_cast<int>(c[k].size()) != structure.num_actions(k)) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "coefficient row length must match action count");
      }
      for (double v : c[k]) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::kInvalidInput, "coefficients must be finite");
        }
      }
    }
  };
  check(coeffs);
  if (per_team_coeffs) {
    if (static_cast<int>(per_team_coeffs->size()) != structure.num_teams()) {
      throw Error(ErrorCode::kDimensionMismatch, "one coefficient set per team");
    }
    for (const auto& c : *per_team_coeffs) check(c);
  }
}

LinearPayoffSpec ZeroLinearSpec(const TeamStructure& structure) {
  LinearPayoffSpec spec{structure, {}, std::nullopt};
  for (int k = 0; k < structure.num_teams(); ++k) {
    spec.coeffs.emplace_back(structure.num_actions(k), 0.0);
  }
  return spec;
}

PayoffTensor LinearGame(const LinearPayoffSpec& spec) {
  spec.Validate();
  PayoffTensor tensor(spec.structure);
  for (std::int64_t e = 0; e < tensor.num_entries(); ++e) {
    std::vector<CountVector> g = tensor.JointCounts(e);
    for (int i = 0; i < tensor.num_teams(); ++i) {
      const auto& c = spec.CoeffsFor(i);
      double value = 0.0;
      for (int k = 0; k < tensor.num_teams(); ++k) {
        for (std::size_t j = 0; j < g[k].size(); ++j) value += c[k][j] * g[k][j];
      }
      tensor.set_payoff(e, i, value);
    }
  }
  return tensor;
}

}  // namespace teamsym
