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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Wall-clock budgets count as part of each
// criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "teamsym/equilibrium.h"
#include "teamsym/game.h"
#include "teamsym/game_io.h"
#include "teamsym/harness.h"
#include "teamsym/marl.h"
#include "teamsym/neural.h"
#include "teamsym/payoff.h"
#include "test_util.h"

namespace teamsym {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Runs one criterion, times it and prints its line.
bool Run(int id, const std::string& name, double budget_seconds,
         const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs <= budget_seconds;
  const bool pass = out.pass && in_time;
  std::printf("%s criterion %d: %s: %s (%.2f s of %.0f s budget%s)\n",
              pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(), secs,
              budget_seconds, in_time ? "" : ", over budget");
  std::fflush(stdout);
  return pass;
}

// max_{i,a} BruteForce(i, a) - BruteForce(i): deviation gain from full
// joint enumeration.
double OracleResidual(const PayoffTensor& game, const SymmetricProfile& x) {
  double worst = 0.0;
  for (int i = 0; i < game.num_teams(); ++i) {
    const double value = BruteForcePayoff(game, i, std::nullopt, x);
    for (int a = 0; a < game.structure().num_actions(i); ++a) {
      worst = std::max(worst, BruteForcePayoff(game, i, a, x) - value);
    }
  }
  return worst;
}

Outcome PayoffOracle() {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const TeamStructure st = testing::RandomStructure(rng, 6, 3);
    const PayoffTensor game = testing::RandomRealGame(st, rng);
    const SymmetricProfile x = testing::RandomProfile(st, rng);
    for (int i = 0; i < st.num_teams(); ++i) {
      worst = std::max(worst, std::abs(MixedPayoff(game, i, x) -
                                       BruteForcePayoff(game, i, std::nullopt, x)));
      for (int a = 0; a < st.num_actions(i); ++a) {
        worst = std::max(worst, std::abs(TeamActionPayoff(game, i, a, x) -
                                         BruteForcePayoff(game, i, a, x)));
      }
    }
  }
  return {worst <= 1e-10, Fmt("max |count form - enumeration| = %.3g over 100 cases", worst)};
}

Outcome GmpEquilibrium() {
  const PayoffTensor gmp = GmpGame(0.5);
  const EquilibriumSolution s = SolveSymmetricNe(gmp);
  double dev = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int a = 0; a < 2; ++a) dev = std::max(dev, std::abs(s.profile[i][a] - 0.5));
  }
  const std::size_t count = EnumerateSymmetricNe(gmp).size();
  return {dev <= 1e-6 && count == 1,
          Fmt("max |x - 0.5| = %.3g, equilibria enumerated = %.0f", dev,
              static_cast<double>(count))};
}

Outcome Existence() {
  const TeamStructure st({2, 2}, {2, 2});
  double worst = 0.0;
  int solved = 0;
  for (int g = 0; g < 200; ++g) {
    const PayoffTensor game = GenRandomGame(st, 0, 10, g % 2 == 0, 5000 + g);
    const EquilibriumSolution s = SolveSymmetricNe(game);
    const double r = OracleResidual(game, s.profile);
    worst = std::max(worst, r);
    if (r <= 1e-6) ++solved;
  }
  return {solved == 200, Fmt("%.0f/200 verified, worst oracle residual %.3g",
                             static_cast<double>(solved), worst)};
}

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

Outcome Gradients() {
  Rng rng(77);
  double worst = 0.0;
  auto rand_vec = [&](int n, double scale) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = (2.0 * UniformReal(rng) - 1.0) * scale;
    return v;
  };
  const double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> dims{1 + static_cast<int>(UniformInt(rng, 0, 4))};
    const int hidden = static_cast<int>(UniformInt(rng, 1, 2));
    for (int l = 0; l < hidden; ++l) dims.push_back(2 + static_cast<int>(UniformInt(rng, 0, 14)));
    dims.push_back(2 + static_cast<int>(UniformInt(rng, 0, 2)));
    Mlp net = MakeMlp(dims, Activation::kTanh, rng());
    for (auto& b : net.biases) b = rand_vec(static_cast<int>(b.size()), 0.5);
    const Eigen::VectorXd x = rand_vec(dims.front(), 1.0);
    const int k = dims.back();

    // Loss chain: KL to a random target on the logits plus squared error to
    // a random regression target, both pushed through backprop.
    auto p = UniformSimplexPoint(rng, k);
    const Eigen::VectorXd target = Eigen::Map<Eigen::VectorXd>(p.data(), k);
    const Eigen::VectorXd y = rand_vec(k, 2.0);
    auto loss = [&](const Mlp& n) {
      const Eigen::VectorXd out = MlpForward(n, x);
      return KlLoss(target, out).value + MseAndGrad(out, y).value;
    };
    const Eigen::VectorXd out = MlpForward(net, x);
    const MlpGradients g =
        Backprop(net, x, KlLoss(target, out).gradient + MseAndGrad(out, y).gradient);
    for (int l = 0; l < net.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < net.weights[l].size(); ++i) {
        double& w = net.weights[l].data()[i];
        const double saved = w;
        w = saved + h;
        const double up = loss(net);
        w = saved - h;
        const double down = loss(net);
        w = saved;
        worst = std::max(worst, RelativeError(g.weights[l].data()[i], (up - down) / (2 * h)));
      }
      for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) {
        double& b = net.biases[l][i];
        const double saved = b;
        b = saved + h;
        const double up = loss(net);
        b = saved - h;
        const double down = loss(net);
        b = saved;
        worst = std::max(worst, RelativeError(g.biases[l][i], (up - down) / (2 * h)));
      }
    }
  }
  return {worst <= 1e-5, Fmt("worst relative error %.3g over 50 networks", worst)};
}

Outcome Symmetry() {
  const PayoffTensor game = GenRandomGame(TeamStructure({2, 2}, {2, 2}), 0, 10, false, 31);
  std::vector<Environment> envs;
  for (int e = 0; e < 4; ++e) envs.emplace_back(game, 1);
  PerPlayerCritics critics(game.structure(), 1, {64, 64}, 5, 3e-2);
  Rng rng(6), policy_rng(7);
  for (int update = 0; update < 100; ++update) {
    SymmetricProfile policy = testing::RandomProfile(game.structure(), policy_rng);
    RolloutBatch batch =
        CollectBatch(envs, 256, [&](const Eigen::VectorXd&) { return policy; }, rng);
    critics.Update(batch, 4, 0.99, 0.5);
  }
  const double gap = critics.MaxTeammateGap(Eigen::VectorXd::Ones(1));

  TrainConfig config;
  config.total_steps = 1000;
  config.verify_critic_games = true;
  const TrainResult r = DelacTrain(config, GmpGame(0.5));
  const bool ok = gap <= 1e-12 && r.games_checked > 0 && r.symmetry_failures == 0;
  return {ok, Fmt("teammate critic gap %.3g after 100 updates; %.0f critic games, %.0f "
                  "symmetry failures",
                  gap, static_cast<double>(r.games_checked),
                  static_cast<double>(r.symmetry_failures))};
}

Outcome DelacGmp() {
  const PayoffTensor gmp = GmpGame(0.5);
  const std::vector<SymmetricProfile> ne{UniformProfile(gmp.structure())};
  double kl = 0.0, first = 0.0, last = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig config;
    config.total_steps = 10000;
    config.seed = seed;
    const auto rows = MetricRows(gmp, DelacTrain(config, gmp), ne, "gmp");
    kl += rows.back().kl_avg / 5.0;
    first += MeanMseInWindow(rows, 0, 1000) / 5.0;
    last += MeanMseInWindow(rows, 9001, 10001) / 5.0;
  }
  return {kl <= 0.05 && last <= 0.1 * first,
          Fmt("mean final KL %.3g (<= 0.05), team MSE first 1000 steps %.3g, last 1000 "
              "steps %.3g",
              kl, first, last)};
}

Outcome Ordering() {
  double delac = 0.0, ia2c = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SuiteConfig config;
    config.suite = Suite::kZeroSum;
    config.n_games = 10;
    config.seed = seed;
    config.train.total_steps = 10000;
    const SuiteResult r = RunSuite(config);
    if (!r.failures.empty()) return {false, "suite reported failures: " + r.failures.dump()};
    delac += r.summary("delac").kl_mean / 3.0;
    ia2c += r.summary("ia2c").kl_mean / 3.0;
  }
  return {delac < ia2c && delac <= 0.05,
          Fmt("mean final KL DelAC %.3g vs IA2C %.3g", delac, ia2c)};
}

Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() / "teamsym_acceptance_bench";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  for (const fs::path& dir : {a, b}) {
    const std::string cmd = std::string("\"") + TEAMSYM_CLI_PATH +
                            "\" bench --suite gmp --seed 11 --out \"" + dir.string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "bench exited non-zero: " + cmd};
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || ReadFile(entry.path().string()) != ReadFile(other.string())) {
      return {false, entry.path().filename().string() + " differs between runs"};
    }
    ++compared;
  }
  fs::remove_all(root);
  return {compared >= 2,
          Fmt("%.0f metric CSVs byte-identical across two runs", compared)};
}

}  // namespace
}  // namespace teamsym

int main() {
  using teamsym::Run;
  bool ok = true;
  ok &= Run(1, "payoff oracle equivalence", 10, teamsym::PayoffOracle);
  ok &= Run(2, "GMP equilibrium", 1, teamsym::GmpEquilibrium);
  ok &= Run(3, "existence on 200 random games", 120, teamsym::Existence);
  ok &= Run(4, "gradient correctness", 30, teamsym::Gradients);
  ok &= Run(5, "within-team critic symmetry", 60, teamsym::Symmetry);
  ok &= Run(6, "DelAC on GMP(0.5)", 600, teamsym::DelacGmp);
  ok &= Run(7, "zero-sum ordering DelAC vs IA2C", 1800, teamsym::Ordering);
  ok &= Run(8, "bench determinism", 600, teamsym::Determinism);
  std::printf("%s\n", ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
