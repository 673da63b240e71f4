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

#ifndef TEAMSYM_HARNESS_H_
#define TEAMSYM_HARNESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "teamsym/game.h"
#include "teamsym/marl.h"
#include "teamsym/payoff.h"

namespace teamsym {

// min over x* in ne_set of (1/m) sum_i (MixedPayoff_i(learned) -
// MixedPayoff_i(x*))^2. Throws kEmptyEquilibriumSet.
double MseMetric(const PayoffTensor& game, const SymmetricProfile& learned,
                 const std::vector<SymmetricProfile>& ne_set);

// min over x* in ne_set of (1/m) sum_i KL(x*_i || learned_i).
double KlMetric(const SymmetricProfile& learned,
                const std::vector<SymmetricProfile>& ne_set);

struct MetricRow {
  std::int64_t step = 0;
  std::string game_id;
  std::string algo;
  double team_mse_avg = 0.0;
  double kl_avg = 0.0;
  std::vector<double> team_payoffs;
};

std::vector<MetricRow> MetricRows(const PayoffTensor& game,
                                  const TrainResult& result,
                                  const std::vector<SymmetricProfile>& ne_set,
                                  const std::string& game_id);

// Header step,game_id,algo,team_mse_avg,kl_avg,u_team_1..u_team_m; numbers
// printed with 17 significant digits.
std::string MetricsCsv(const std::vector<MetricRow>& rows, int num_teams);

// Row-by-row mean of per-game series that share step and algo layout.
std::vector<MetricRow> AverageRows(
    const std::vector<std::vector<MetricRow>>& per_game);

// Mean of team_mse_avg over rows with first <= step < last.
double MeanMseInWindow(const std::vector<MetricRow>& rows, std::int64_t first,
                       std::int64_t last);

enum class Suite { kZeroSum, kGeneralSum, kGmp };

std::string SuiteName(Suite suite);
Suite SuiteFromName(const std::string& name);

struct SuiteConfig {
  Suite suite = Suite::kZeroSum;
  int n_games = 30;
  double omega = 0.5;
  TrainConfig train;
  std::string output_dir;  // empty: keep results in memory only
  std::uint64_t seed = 0;
  std::vector<std::string> algos = {"delac", "ia2c"};

  void Validate() const;
};

// Two teams of two players with two actions; integer payoffs in [0, 10],
// team 2 negated for the zero-sum suite. The gmp suite has one game.
std::vector<PayoffTensor> SuiteGames(const SuiteConfig& config);

struct AlgoSummary {
  std::string algo;
  std::vector<double> final_kl;
  std::vector<double> final_mse;
  double kl_mean = 0.0, kl_std = 0.0, mse_mean = 0.0, mse_std = 0.0;
};

struct SuiteResult {
  std::vector<PayoffTensor> games;
  std::vector<std::vector<SymmetricProfile>> ne_sets;
  std::vector<std::vector<MetricRow>> per_game_rows;  // indexed by game
  std::vector<MetricRow> mean_rows;
  std::vector<AlgoSummary> summaries;
  nlohmann::json failures = nlohmann::json::array();

  const AlgoSummary& summary(const std::string& algo) const;
};

// Runs every algorithm on every suite game. A game that fails is recorded in
// `failures` and left out of the averages. With an output directory, writes
// games/game_NNN.json, game_NNN.csv, mean.csv, summary.json, failures.json.
SuiteResult RunSuite(const SuiteConfig& config);

TrainResult Train(const std::string& algo, const TrainConfig& config,
                  const PayoffTensor& game);

// Hex SHA-1 of "blob <size>\0<content>", as git hash-object computes it.
std::string GitBlobHash(const std::string& content);

// Writes actor_<i>.json and critic_<i>.json into `dir`.
void WriteCheckpoints(const TrainResult& result, const std::string& dir);

nlohmann::json RunManifest(const TrainResult& result, const TrainConfig& config,
                           const std::string& game_path,
                           const std::string& game_content);

std::string FormatDouble(double value);

}  // namespace teamsym

#endif  // TEAMSYM_HARNESS_H_
