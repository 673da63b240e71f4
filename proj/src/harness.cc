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

#include "teamsym/harness.h"

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "teamsym/equilibrium.h"
#include "teamsym/errors.h"
#include "teamsym/game_io.h"
#include "teamsym/rng.h"

namespace teamsym {
namespace {

void RequireNonEmpty(const std::vector<SymmetricProfile>& ne_set) {
  if (ne_set.empty()) {
    throw Error(ErrorCode::kEmptyEquilibriumSet, "equilibrium set is empty");
  }
}

std::string GameId(int g) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "game_%03d", g);
  return buf;
}

void MeanStd(const std::vector<double>& xs, double& mean, double& stddev) {
  mean = stddev = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) stddev += (x - mean) * (x - mean);
  stddev = std::sqrt(stddev / static_cast<double>(xs.size()));
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double MseMetric(const PayoffTensor& game, const SymmetricProfile& learned,
                 const std::vector<SymmetricProfile>& ne_set) {
  RequireNonEmpty(ne_set);
  const std::vector<double> u = MixedPayoffs(game, learned);
  double best = std::numeric_limits<double>::infinity();
  for (const SymmetricProfile& ne : ne_set) {
    const std::vector<double> v = MixedPayoffs(game, ne);
    double score = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) score += (u[i] - v[i]) * (u[i] - v[i]);
    best = std::min(best, score / static_cast<double>(u.size()));
  }
  return best;
}

double KlMetric(const SymmetricProfile& learned,
                const std::vector<SymmetricProfile>& ne_set) {
  RequireNonEmpty(ne_set);
  double best = std::numeric_limits<double>::infinity();
  for (const SymmetricProfile& ne : ne_set) {
    if (ne.num_teams() != learned.num_teams()) {
      throw Error(ErrorCode::kDimensionMismatch, "profiles differ in team count");
    }
    double total = 0.0;
    for (int i = 0; i < ne.num_teams(); ++i) {
      if (ne[i].size() != learned[i].size()) {
        throw Error(ErrorCode::kDimensionMismatch, "strategies differ in size");
      }
      for (int a = 0; a < ne[i].size(); ++a) {
        if (ne[i][a] > 0.0) total += ne[i][a] * (std::log(ne[i][a]) - std::log(learned[i][a]));
      }
    }
    best = std::min(best, total / ne.num_teams());
  }
  return best;
}

std::vector<MetricRow> MetricRows(const PayoffTensor& game,
                                  const TrainResult& result,
                                  const std::vector<SymmetricProfile>& ne_set,
                                  const std::string& game_id) {
  std::vector<MetricRow> rows;
  for (const PolicySnapshot& snap : result.history) {
    MetricRow row;
    row.step = snap.step;
    row.game_id = game_id;
    row.algo = result.algo;
    row.team_mse_avg = MseMetric(game, snap.profile, ne_set);
    row.kl_avg = KlMetric(snap.profile, ne_set);
    row.team_payoffs = MixedPayoffs(game, snap.profile);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string MetricsCsv(const std::vector<MetricRow>& rows, int num_teams) {
  std::string out = "step,game_id,algo,team_mse_avg,kl_avg";
  for (int i = 1; i <= num_teams; ++i) out += ",u_team_" + std::to_string(i);
  out += "\n";
  for (const MetricRow& r : rows) {
    out += std::to_string(r.step) + "," + r.game_id + "," + r.algo + "," +
           FormatDouble(r.team_mse_avg) + "," + FormatDouble(r.kl_avg);
    for (double u : r.team_payoffs) out += "," + FormatDouble(u);
    out += "\n";
  }
  return out;
}

std::vector<MetricRow> AverageRows(
    const std::vector<std::vector<MetricRow>>& per_game) {
  if (per_game.empty()) return {};
  std::vector<MetricRow> mean = per_game.front();
  for (std::size_t g = 1; g < per_game.size(); ++g) {
    if (per_game[g].size() != mean.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "per-game series differ in length");
    }
    for (std::size_t r = 0; r < mean.size(); ++r) {
      const MetricRow& row = per_game[g][r];
      if (row.step != mean[r].step || row.algo != mean[r].algo) {
        throw Error(ErrorCode::kDimensionMismatch, "per-game series are misaligned");
      }
      mean[r].team_mse_avg += row.team_mse_avg;
      mean[r].kl_avg += row.kl_avg;
      for (std::size_t i = 0; i < row.team_payoffs.size(); ++i) {
        mean[r].team_payoffs[i] += row.team_payoffs[i];
      }
    }
  }
  const double n = static_cast<double>(per_game.size());
  for (MetricRow& row : mean) {
    row.game_id = "mean";
    row.team_mse_avg /= n;
    row.kl_avg /= n;
    for (double& u : row.team_payoffs) u /= n;
  }
  return mean;
}

double MeanMseInWindow(const std::vector<MetricRow>& rows, std::int64_t first,
                       std::int64_t last) {
  double sum = 0.0;
  int count = 0;
  for (const MetricRow& r : rows) {
    if (r.step >= first && r.step < last) {
      sum += r.team_mse_avg;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kInvalidInput, "empty metric window");
  return sum / count;
}

std::string SuiteName(Suite suite) {
  switch (suite) {
    case Suite::kZeroSum: return "zerosum";
    case Suite::kGeneralSum: return "generalsum";
    case Suite::kGmp: return "gmp";
  }
  return "zerosum";
}

Suite SuiteFromName(const std::string& name) {
  if (name == "zerosum") return Suite::kZeroSum;
  if (name == "generalsum") return Suite::kGeneralSum;
  if (name == "gmp") return Suite::kGmp;
  throw Error(ErrorCode::kInvalidInput, "unknown suite '" + name + "'");
}

void SuiteConfig::Validate() const {
  if (n_games < 1) throw Error(ErrorCode::kInvalidInput, "n_games must be >= 1");
  if (suite == Suite::kGmp && !GmpOmegaInUniqueRange(omega)) {
    throw Error(ErrorCode::kInvalidInput, "omega must lie in (0, 1)");
  }
  if (algos.empty()) throw Error(ErrorCode::kInvalidInput, "no algorithms selected");
  for (const std::string& a : algos) {
    if (a != "delac" && a != "ia2c") {
      throw Error(ErrorCode::kInvalidInput, "unknown algorithm '" + a + "'");
    }
  }
  train.Validate();
}

std::vector<PayoffTensor> SuiteGames(const SuiteConfig& config) {
  if (config.suite == Suite::kGmp) return {GmpGame(config.omega)};
  const TeamStructure structure({2, 2}, {2, 2});
  std::vector<PayoffTensor> games;
  for (int g = 0; g < config.n_games; ++g) {
    games.push_back(GenRandomGame(structure, 0, 10, config.suite == Suite::kZeroSum,
                                  DeriveSeed(config.seed, g)));
  }
  return games;
}

const AlgoSummary& SuiteResult::summary(const std::string& algo) const {
  for (const AlgoSummary& s : summaries) {
    if (s.algo == algo) return s;
  }
  throw Error(ErrorCode::kInvalidInput, "no summary for '" + algo + "'");
}

TrainResult Train(const std::string& algo, const TrainConfig& config,
                  const PayoffTensor& game) {
  if (algo == "delac") return DelacTrain(config, game);
  if (algo == "ia2c") return Ia2cTrain(config, game);
  throw Error(ErrorCode::kInvalidInput, "unknown algorithm '" + algo + "'");
}

SuiteResult RunSuite(const SuiteConfig& config) {
  config.Validate();
  namespace fs = std::filesystem;
  const bool write = !config.output_dir.empty();
  const fs::path out(config.output_dir);
  if (write) {
    std::error_code ec;
    fs::create_directories(out / "games", ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + out.string() + ": " + ec.message());
  }

  SuiteResult result;
  result.games = SuiteGames(config);
  std::vector<std::vector<MetricRow>> completed;
  for (std::size_t g = 0; g < result.games.size(); ++g) {
    const PayoffTensor& game = result.games[g];
    const std::string id = GameId(static_cast<int>(g));
    if (write) SaveGame(game, (out / "games" / (id + ".json")).string());
    std::vector<MetricRow> rows;
    std::vector<SymmetricProfile> ne_set;
    try {
      for (const EquilibriumSolution& s : EnumerateSymmetricNe(game)) {
        ne_set.push_back(s.profile);
      }
      if (ne_set.empty()) {
        throw Error(ErrorCode::kEmptyEquilibriumSet, "enumeration found no equilibrium");
      }
      for (std::size_t a = 0; a < config.algos.size(); ++a) {
        TrainConfig train = config.train;
        train.seed = DeriveSeed(config.seed, 10'000 + g);
        const TrainResult trained = Train(config.algos[a], train, game);
        auto algo_rows = MetricRows(game, trained, ne_set, id);
        rows.insert(rows.end(), algo_rows.begin(), algo_rows.end());
      }
    } catch (const Error& err) {
      result.failures.push_back({{"game_id", id},
                                 {"code", ErrorCodeName(err.code())},
                                 {"message", err.what()}});
      result.ne_sets.push_back(ne_set);
      result.per_game_rows.emplace_back();
      continue;
    }
    if (write) {
      WriteFile((out / (id + ".csv")).string(), MetricsCsv(rows, game.num_teams()));
    }
    result.ne_sets.push_back(std::move(ne_set));
    result.per_game_rows.push_back(rows);
    completed.push_back(std::move(rows));
  }

  result.mean_rows = AverageRows(completed);
  for (const std::string& algo : config.algos) {
    AlgoSummary s;
    s.algo = algo;
    for (const auto& rows : completed) {
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->algo == algo) {
          s.final_kl.push_back(it->kl_avg);
          s.final_mse.push_back(it->team_mse_avg);
          break;
        }
      }
    }
    MeanStd(s.final_kl, s.kl_mean, s.kl_std);
    MeanStd(s.final_mse, s.mse_mean, s.mse_std);
    result.summaries.push_back(std::move(s));
  }

  if (write) {
    WriteFile((out / "mean.csv").string(), MetricsCsv(result.mean_rows, 2));
    nlohmann::json summary = {{"suite", SuiteName(config.suite)},
                              {"seed", config.seed},
                              {"games", result.games.size()},
                              {"completed_games", completed.size()},
                              {"train", config.train.ToJson()}};
    if (config.suite == Suite::kGmp) summary["omega"] = config.omega;
    for (const AlgoSummary& s : result.summaries) {
      summary["algorithms"][s.algo] = {{"final_kl_mean", s.kl_mean},
                                       {"final_kl_std", s.kl_std},
                                       {"final_mse_mean", s.mse_mean},
                                       {"final_mse_std", s.mse_std},
                                       {"final_kl", s.final_kl},
                                       {"final_mse", s.final_mse}};
    }
    WriteFile((out / "summary.json").string(), summary.dump(2) + "\n");
    WriteFile((out / "failures.json").string(), result.failures.dump(2) + "\n");
  }
  return result;
}

std::string GitBlobHash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) +
                           std::string(1, '\0') + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char c : digest) {
    std::snprintf(buf, sizeof(buf), "%02x", c);
    hex += buf;
  }
  return hex;
}

void WriteCheckpoints(const TrainResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  for (std::size_t i = 0; i < result.actors.size(); ++i) {
    WriteFile((fs::path(dir) / ("actor_" + std::to_string(i) + ".json")).string(),
              MlpToJson(result.actors[i]).dump() + "\n");
  }
  for (std::size_t i = 0; i < result.critics.size(); ++i) {
    WriteFile((fs::path(dir) / ("critic_" + std::to_string(i) + ".json")).string(),
              MlpToJson(result.critics[i]).dump() + "\n");
  }
}

nlohmann::json RunManifest(const TrainResult& result, const TrainConfig& config,
                           const std::string& game_path,
                           const std::string& game_content) {
  return {{"algo", result.algo},
          {"seed", config.seed},
          {"config", config.ToJson()},
          {"game_file", game_path},
          {"game_sha1", GitBlobHash(game_content)},
          {"batches", result.batches},
          {"solver_calls", result.solver_calls}};
}

}  // namespace teamsym
