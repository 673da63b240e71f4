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

#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "teamsym/errors.h"
#include "teamsym/game_io.h"

namespace teamsym {
namespace {

namespace fs = std::filesystem;

fs::path ScratchDir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("teamsym_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

SymmetricProfile Pure(int a0, int a1) {
  return {{MixedStrategy::Pure(2, a0), MixedStrategy::Pure(2, a1)}};
}

// One player per team, two actions. Payoffs at (0, 0) are (1, 2); everything
// else pays (0, 0).
PayoffTensor TinyGame() {
  PayoffTensor game(TeamStructure({1, 1}, {2, 2}));
  game.set_payoffs(game.EntryIndex(std::vector<CountVector>{{1, 0}, {1, 0}}),
                   std::vector<double>{1.0, 2.0});
  return game;
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST_CASE("Team MSE examples") {
  const PayoffTensor game = TinyGame();
  CHECK(MseMetric(game, Pure(1, 1), {Pure(1, 1)}) == 0.0);
  CHECK(MseMetric(game, Pure(0, 0), {Pure(1, 1)}) == doctest::Approx(2.5));
  CHECK(MseMetric(game, Pure(0, 0), {Pure(1, 1), Pure(0, 0)}) == 0.0);
  try {
    MseMetric(game, Pure(0, 0), {});
    FAIL("expected EmptyEquilibriumSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyEquilibriumSet);
  }
}

TEST_CASE("KL metric examples") {
  const SymmetricProfile half{{MixedStrategy::Uniform(2), MixedStrategy::Uniform(2)}};
  CHECK(KlMetric(half, {half}) == 0.0);
  CHECK(KlMetric(half, {Pure(0, 0)}) == doctest::Approx(std::log(2.0)));
  const SymmetricProfile skew{{MixedStrategy::FromProbs({0.9, 0.1}),
                               MixedStrategy::FromProbs({0.2, 0.8})}};
  CHECK(KlMetric(skew, {Pure(0, 1), skew}) == 0.0);
  // (KL((1,0)||(.9,.1)) + KL((0,1)||(.2,.8))) / 2.
  CHECK(KlMetric(skew, {Pure(0, 1)}) ==
        doctest::Approx(0.5 * (-std::log(0.9) - std::log(0.8))));
  CHECK_THROWS_AS(KlMetric(half, {}), Error);
}

TEST_CASE("Metrics ignore the order of the equilibrium set") {
  const PayoffTensor game = GenRandomGame(TeamStructure({2, 2}, {2, 2}), 0, 10, true, 6);
  std::vector<SymmetricProfile> ne;
  for (const auto& s : EnumerateSymmetricNe(game)) ne.push_back(s.profile);
  REQUIRE(ne.size() >= 1);
  std::vector<SymmetricProfile> reversed(ne.rbegin(), ne.rend());
  const SymmetricProfile learned{{MixedStrategy::FromProbs({0.3, 0.7}),
                                  MixedStrategy::FromProbs({0.6, 0.4})}};
  CHECK(MseMetric(game, learned, ne) == MseMetric(game, learned, reversed));
  CHECK(KlMetric(learned, ne) == KlMetric(learned, reversed));
  std::vector<SymmetricProfile> doubled = ne;
  doubled.insert(doubled.end(), ne.begin(), ne.end());
  CHECK(KlMetric(learned, doubled) == KlMetric(learned, ne));
}

TEST_CASE("Metric rows and CSV layout") {
  TrainConfig config;
  config.total_steps = 600;
  const PayoffTensor gmp = GmpGame(0.5);
  TrainResult r = DelacTrain(config, gmp);
  auto rows = MetricRows(gmp, r, {UniformProfile(gmp.structure())}, "game_007");
  REQUIRE(rows.size() == 7);
  CHECK(rows[6].step == 600);
  const std::string csv = MetricsCsv(rows, 2);
  auto cells = ReadCsv(csv);
  CHECK(cells[0] == std::vector<std::string>{"step", "game_id", "algo", "team_mse_avg",
                                             "kl_avg", "u_team_1", "u_team_2"});
  REQUIRE(cells.size() == 8);
  for (std::size_t i = 1; i < cells.size(); ++i) {
    CHECK(cells[i].size() == 7);
    CHECK(cells[i][1] == "game_007");
    CHECK(cells[i][2] == "delac");
    CHECK(std::stod(cells[i][4]) == rows[i - 1].kl_avg);
    CHECK(std::stod(cells[i][5]) == rows[i - 1].team_payoffs[0]);
    // Zero-sum: payoffs cancel.
    CHECK(std::abs(rows[i - 1].team_payoffs[0] + rows[i - 1].team_payoffs[1]) <= 1e-12);
  }
  CHECK(FormatDouble(0.1) == "0.10000000000000001");
  CHECK(std::stod(FormatDouble(M_PI)) == M_PI);
}

TEST_CASE("Averaged rows and windows") {
  std::vector<std::vector<MetricRow>> games(3);
  for (int g = 0; g < 3; ++g) {
    for (int s = 0; s < 4; ++s) {
      games[g].push_back({s * 100, "g", "delac", 0.1 * g + s, 0.01 * s * g,
                          {static_cast<double>(g), -static_cast<double>(s)}});
    }
  }
  auto mean = AverageRows(games);
  REQUIRE(mean.size() == 4);
  for (int s = 0; s < 4; ++s) {
    CHECK(mean[s].game_id == "mean");
    CHECK(mean[s].step == s * 100);
    CHECK(std::abs(mean[s].team_mse_avg - (0.1 + s)) <= 1e-12);
    CHECK(std::abs(mean[s].kl_avg - 0.01 * s) <= 1e-12);
    CHECK(mean[s].team_payoffs[0] == doctest::Approx(1.0));
  }
  CHECK(MeanMseInWindow(games[0], 0, 200) == doctest::Approx(0.5));
  CHECK_THROWS_AS(MeanMseInWindow(games[0], 1000, 2000), Error);
  games[2].pop_back();
  CHECK_THROWS_AS(AverageRows(games), Error);
}

TEST_CASE("Suite games") {
  SuiteConfig gmp;
  gmp.suite = Suite::kGmp;
  gmp.n_games = 30;
  auto one = SuiteGames(gmp);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == GmpGame(0.5));
  CHECK(EnumerateSymmetricNe(one[0]).size() == 1);

  for (Suite suite : {Suite::kZeroSum, Suite::kGeneralSum}) {
    SuiteConfig config;
    config.suite = suite;
    config.seed = 5;
    auto games = SuiteGames(config);
    REQUIRE(games.size() == 30);
    bool any_nonzero_sum = false;
    for (const PayoffTensor& g : games) {
      CHECK(g.structure() == TeamStructure({2, 2}, {2, 2}));
      for (std::int64_t e = 0; e < g.num_entries(); ++e) {
        const double u0 = g.payoff(e, 0), u1 = g.payoff(e, 1);
        CHECK(u0 == std::round(u0));
        CHECK(u0 >= 0.0);
        CHECK(u0 <= 10.0);
        if (suite == Suite::kZeroSum) CHECK(u0 + u1 == 0.0);
        if (u0 + u1 != 0.0) any_nonzero_sum = true;
      }
      FullFormGame full = ExpandToFullForm(g);
      CHECK(CheckTeamSymmetry(full));
    }
    CHECK(any_nonzero_sum == (suite == Suite::kGeneralSum));
    CHECK(SuiteGames(config)[7] == games[7]);
  }
  SuiteConfig bad;
  bad.suite = Suite::kGmp;
  bad.omega = 1.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad.omega = 0.5;
  bad.n_games = 0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  CHECK_THROWS_AS(SuiteFromName("poker"), Error);
}

TEST_CASE("Suite runs write reproducible files") {
  SuiteConfig config;
  config.suite = Suite::kZeroSum;
  config.n_games = 3;
  config.seed = 2;
  config.train.total_steps = 1000;
  const fs::path a = ScratchDir("a"), b = ScratchDir("b");
  config.output_dir = a.string();
  SuiteResult first = RunSuite(config);
  config.output_dir = b.string();
  RunSuite(config);

  CHECK(first.failures.empty());
  CHECK(ReadFile((a / "failures.json").string()) == "[]\n");
  for (const char* name : {"game_000.csv", "game_001.csv", "game_002.csv", "mean.csv",
                           "summary.json", "games/game_001.json"}) {
    CAPTURE(name);
    CHECK(ReadFile((a / name).string()) == ReadFile((b / name).string()));
  }
  CHECK(LoadGame((a / "games/game_002.json").string()) == first.games[2]);

  // The averaged file is the row-by-row mean of the per-game files.
  auto mean = ReadCsv(ReadFile((a / "mean.csv").string()));
  std::vector<std::vector<std::vector<std::string>>> per_game;
  for (int g = 0; g < 3; ++g) {
    per_game.push_back(ReadCsv(ReadFile((a / ("game_00" + std::to_string(g) + ".csv")).string())));
  }
  REQUIRE(mean.size() == per_game[0].size());
  for (std::size_t r = 1; r < mean.size(); ++r) {
    CHECK(mean[r][1] == "mean");
    CHECK(mean[r][0] == per_game[0][r][0]);
    CHECK(mean[r][2] == per_game[0][r][2]);
    for (int c = 3; c < 7; ++c) {
      double sum = 0.0;
      for (int g = 0; g < 3; ++g) sum += std::stod(per_game[g][r][c]);
      CHECK(std::abs(std::stod(mean[r][c]) - sum / 3.0) <= 1e-12);
    }
  }

  auto summary = nlohmann::json::parse(ReadFile((a / "summary.json").string()));
  CHECK(summary["completed_games"] == 3);
  CHECK(summary["algorithms"]["delac"]["final_kl"].size() == 3);
  CHECK(summary["algorithms"]["ia2c"]["final_kl_mean"].get<double>() ==
        doctest::Approx(first.summary("ia2c").kl_mean));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("GMP suite trains both algorithms on one game") {
  SuiteConfig config;
  config.suite = Suite::kGmp;
  config.train.total_steps = 500;
  SuiteResult r = RunSuite(config);
  REQUIRE(r.games.size() == 1);
  CHECK(r.ne_sets[0].size() == 1);
  CHECK(r.summaries.size() == 2);
  int delac = 0, ia2c = 0;
  for (const MetricRow& row : r.per_game_rows[0]) (row.algo == "delac" ? delac : ia2c)++;
  CHECK(delac == 6);
  CHECK(ia2c == 6);
}

TEST_CASE("Content hash matches git") {
  CHECK(GitBlobHash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(GitBlobHash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("Checkpoints and run manifest") {
  TrainConfig config;
  config.total_steps = 300;
  const PayoffTensor gmp = GmpGame(0.5);
  TrainResult r = DelacTrain(config, gmp);
  const fs::path dir = ScratchDir("ckpt");
  WriteCheckpoints(r, dir.string());
  Mlp actor = MlpFromJson(nlohmann::json::parse(ReadFile((dir / "actor_1.json").string())));
  CHECK(actor.weights[2] == r.actors[1].weights[2]);
  Mlp critic = MlpFromJson(nlohmann::json::parse(ReadFile((dir / "critic_0.json").string())));
  CHECK(critic.layer_dims == std::vector<int>{5, 64, 64, 2});
  const std::string text = GameToString(gmp);
  auto manifest = RunManifest(r, config, "gmp.json", text);
  CHECK(manifest["algo"] == "delac");
  CHECK(manifest["game_sha1"] == GitBlobHash(text));
  CHECK(manifest["config"]["total_steps"] == 300);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace teamsym
