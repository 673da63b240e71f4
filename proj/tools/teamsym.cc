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

// Command-line front end: gen, solve, train, bench.
//
// Exit codes: 0 success, 2 solver failure, 3 invalid input.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "teamsym/equilibrium.h"
#include "teamsym/errors.h"
#include "teamsym/game.h"
#include "teamsym/game_io.h"
#include "teamsym/harness.h"
#include "teamsym/marl.h"

namespace {

constexpr int kExitSolver = 2;
constexpr int kExitInvalid = 3;

using teamsym::ErrorCode;

struct GenArgs {
  int teams = 2;
  std::vector<int> sizes = {2, 2};
  std::vector<int> actions = {2, 2};
  std::vector<int> range = {0, 10};
  bool zero_sum = false;
  std::uint64_t seed = 0;
  std::string output;
};

struct SolveArgs {
  std::string file;
  bool all = false;
  double tol = 1e-9;
};

struct TrainArgs {
  std::string algo = "delac";
  std::string game;
  std::int64_t steps = -1;
  std::int64_t seed = -1;
  std::string metrics;
  std::string checkpoint_dir;
  std::string manifest;
};

struct BenchArgs {
  std::string suite = "gmp";
  int games = 30;
  double omega = 0.5;
  std::string out;
  std::uint64_t seed = 0;
  std::int64_t steps = -1;
};

int RunGen(const GenArgs& a) {
  if (static_cast<int>(a.sizes.size()) != a.teams ||
      static_cast<int>(a.actions.size()) != a.teams) {
    throw teamsym::Error(ErrorCode::kInvalidInput,
                         "--sizes and --actions need one entry per team");
  }
  if (a.range.size() != 2 || a.range[0] > a.range[1]) {
    throw teamsym::Error(ErrorCode::kInvalidInput, "--range needs LO,HI with LO <= HI");
  }
  const teamsym::PayoffTensor game = teamsym::GenRandomGame(
      teamsym::TeamStructure(a.sizes, a.actions), a.range[0], a.range[1], a.zero_sum,
      a.seed);
  if (a.output.empty() || a.output == "-") {
    std::cout << teamsym::GameToString(game);
  } else {
    teamsym::SaveGame(game, a.output);
  }
  return 0;
}

int RunSolve(const SolveArgs& a) {
  const teamsym::PayoffTensor game = teamsym::LoadGame(a.file);
  teamsym::SolverOptions opts;
  opts.tolerance = a.tol;
  opts.Validate();
  if (a.all) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : teamsym::EnumerateSymmetricNe(game, opts)) {
      out.push_back(teamsym::SolutionToJson(s));
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << teamsym::SolutionToJson(teamsym::SolveSymmetricNe(game, opts)).dump(2)
              << "\n";
  }
  return 0;
}

int RunTrain(const TrainArgs& a, teamsym::TrainConfig config) {
  if (a.steps >= 0) config.total_steps = a.steps;
  if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
  const std::string content = teamsym::ReadFile(a.game);
  const teamsym::PayoffTensor game = teamsym::GameFromString(content, a.game);
  std::vector<teamsym::SymmetricProfile> ne_set;
  for (const auto& s : teamsym::EnumerateSymmetricNe(game)) ne_set.push_back(s.profile);
  const teamsym::TrainResult result = teamsym::Train(a.algo, config, game);
  const auto rows = teamsym::MetricRows(game, result, ne_set, "game");
  const std::string csv = teamsym::MetricsCsv(rows, game.num_teams());
  if (a.metrics.empty() || a.metrics == "-") {
    std::cout << csv;
  } else {
    teamsym::WriteFile(a.metrics, csv);
  }
  if (!a.checkpoint_dir.empty()) teamsym::WriteCheckpoints(result, a.checkpoint_dir);
  if (!a.manifest.empty()) {
    teamsym::WriteFile(a.manifest,
                       teamsym::RunManifest(result, config, a.game, content).dump(2) + "\n");
  }
  std::cerr << "final kl " << rows.back().kl_avg << " mse " << rows.back().team_mse_avg
            << "\n";
  return 0;
}

int RunBench(const BenchArgs& a, const teamsym::TrainConfig& config) {
  teamsym::SuiteConfig suite;
  suite.suite = teamsym::SuiteFromName(a.suite);
  suite.n_games = a.games;
  suite.omega = a.omega;
  suite.seed = a.seed;
  suite.train = config;
  if (a.steps >= 0) suite.train.total_steps = a.steps;
  suite.output_dir = a.out;
  if (suite.output_dir.empty()) {
    throw teamsym::Error(ErrorCode::kInvalidInput, "bench needs --out DIR");
  }
  const teamsym::SuiteResult result = teamsym::RunSuite(suite);
  for (const auto& s : result.summaries) {
    std::cout << s.algo << " final kl " << s.kl_mean << " +- " << s.kl_std
              << "  final mse " << s.mse_mean << " +- " << s.mse_std << "\n";
  }
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " game(s) failed; see failures.json\n";
    return kExitSolver;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team-symmetric games: generate, solve, train, benchmark."};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file,
                 "file of key=value lines overriding training defaults");

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random team-symmetric game");
  gen_cmd->add_option("--teams", gen.teams, "number of teams");
  gen_cmd->add_option("--sizes", gen.sizes, "players per team")->delimiter(',');
  gen_cmd->add_option("--actions", gen.actions, "actions per team")->delimiter(',');
  gen_cmd->add_option("--range", gen.range, "integer payoff range LO,HI")
      ->delimiter(',')
      ->expected(2);
  gen_cmd->add_flag("--zero-sum", gen.zero_sum, "team 2 receives minus team 1");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("-o,--output", gen.output, "output file (stdout if omitted)");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "find team-symmetric equilibria");
  solve_cmd->add_option("file", solve.file, "game JSON")->required();
  solve_cmd->add_flag("--all", solve.all, "enumerate every equilibrium found");
  solve_cmd->add_option("--tol", solve.tol, "equilibrium tolerance");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train DelAC or IA2C on a game");
  train_cmd->add_option("--algo", train.algo, "delac or ia2c")
      ->check(CLI::IsMember({"delac", "ia2c"}));
  train_cmd->add_option("--game", train.game, "game JSON")->required();
  train_cmd->add_option("--steps", train.steps, "environment steps");
  train_cmd->add_option("--seed", train.seed, "training seed");
  train_cmd->add_option("--metrics", train.metrics, "metrics CSV (stdout if omitted)");
  train_cmd->add_option("--checkpoint-dir", train.checkpoint_dir,
                        "write final network parameters here");
  train_cmd->add_option("--manifest", train.manifest, "write a run manifest JSON here");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run an experiment suite");
  bench_cmd->add_option("--suite", bench.suite, "zerosum, generalsum or gmp")
      ->check(CLI::IsMember({"zerosum", "generalsum", "gmp"}));
  bench_cmd->add_option("--games", bench.games, "number of random games");
  bench_cmd->add_option("--omega", bench.omega, "GMP parameter");
  bench_cmd->add_option("--out", bench.out, "output directory")->required();
  bench_cmd->add_option("--seed", bench.seed, "suite seed");
  bench_cmd->add_option("--steps", bench.steps, "environment steps per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    teamsym::TrainConfig config;
    if (!config_file.empty()) {
      teamsym::ApplyConfigFile(teamsym::ReadFile(config_file), config);
    }
    if (*gen_cmd) return RunGen(gen);
    if (*solve_cmd) return RunSolve(solve);
    if (*train_cmd) return RunTrain(train, config);
    if (*bench_cmd) return RunBench(bench, config);
  } catch (const teamsym::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kNoEquilibriumFound ? kExitSolver : kExitInvalid;
  }
  return 0;
}
