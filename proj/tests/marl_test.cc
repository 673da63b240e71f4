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

#include "teamsym/marl.h"

#include <cmath>

#include "doctest.h"
#include "teamsym/equilibrium.h"
#include "teamsym/errors.h"
#include "teamsym/harness.h"
#include "test_util.h"

namespace teamsym {
namespace {

const Eigen::VectorXd kConstObs = Eigen::VectorXd::Ones(1);

PayoffTensor DominantGame() {
  const TeamStructure st({2, 2}, {2, 2});
  return LinearGame({st, {{3, 1}, {0.5, 2}}, std::nullopt});
}

double TotalVariation(const SymmetricProfile& a, const SymmetricProfile& b) {
  double worst = 0.0;
  for (int i = 0; i < a.num_teams(); ++i) {
    double tv = 0.0;
    for (int j = 0; j < a[i].size(); ++j) tv += std::abs(a[i][j] - b[i][j]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

// Naive O(T^2) discounted returns.
std::vector<std::vector<double>> NaiveReturns(const std::vector<std::vector<double>>& r,
                                              const std::vector<bool>& ends,
                                              double gamma) {
  std::vector<std::vector<double>> out(r.size(), std::vector<double>(r[0].size(), 0.0));
  for (std::size_t t = 0; t < r.size(); ++t) {
    for (std::size_t k = t; k < r.size(); ++k) {
      for (std::size_t j = 0; j < r[t].size(); ++j) {
        out[t][j] += std::pow(gamma, static_cast<double>(k - t)) * r[k][j];
      }
      if (ends[k]) break;
    }
  }
  return out;
}

TEST_CASE("Environment step returns tensor payoffs") {
  Environment env(GmpGame(0.5), 3);
  auto r = env.Step({0, 0, 0, 0});
  CHECK(r.rewards == std::vector<double>{1.0, -1.0});
  CHECK(r.counts == std::vector<CountVector>{{2, 0}, {2, 0}});
  CHECK_FALSE(r.done);
  r = env.Step({0, 1, 0, 1});
  CHECK(r.rewards == std::vector<double>{0.0, 0.0});
  CHECK(r.next_observation == kConstObs);
  CHECK(env.observation() == kConstObs);
  r = env.Step({1, 1, 0, 1});
  CHECK(r.done);
  CHECK(r.rewards == std::vector<double>{0.5, -0.5});
  CHECK(env.time_step() == 0);

  try {
    env.Step({0, 2, 0, 0});
    FAIL("expected InvalidAction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidAction);
  }
  CHECK_THROWS_AS(env.Step({0, 0, 0}), Error);
  CHECK_THROWS_AS(Environment(GmpGame(0.5), 0), Error);
}

TEST_CASE("Last-counts observations") {
  Environment env(GmpGame(0.5), 2, ObservationSpec::kLastCounts);
  CHECK(env.observation_size() == 10);
  CHECK(env.observation()[0] == 1.0);
  CHECK(env.observation().sum() == 1.0);
  auto r = env.Step({0, 0, 1, 1});
  const auto entry = env.game().EntryIndex(std::vector<CountVector>{{2, 0}, {0, 2}});
  CHECK(r.entry == static_cast<std::size_t>(entry));
  CHECK(env.observation()[1 + entry] == 1.0);
  CHECK(env.observation().sum() == 1.0);
  env.Step({0, 0, 1, 1});
  CHECK(env.observation() == env.InitialObservation());
}

TEST_CASE("Discounted return examples") {
  using R = std::vector<std::vector<double>>;
  R ones{{1}, {1}, {1}};
  auto y = DiscountedReturns(ones, {false, false, true}, 0.5);
  CHECK(y == R{{1.75}, {1.5}, {1.0}});
  CHECK(DiscountedReturns(R{{2, -1}, {3, 4}}, {false, true}, 0.0) == R{{2, -1}, {3, 4}});
  auto two = DiscountedReturns(R{{1}, {1}, {5}, {7}}, {false, true, false, true}, 0.5);
  CHECK(two == R{{1.5}, {1.0}, {8.5}, {7.0}});
  CHECK_THROWS_AS(DiscountedReturns(ones, {true}, 0.5), Error);
  CHECK_THROWS_AS(DiscountedReturns(ones, {false, false, true}, 1.0), Error);
}

TEST_CASE("Suffix-scan returns match the quadratic definition") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(UniformInt(rng, 0, 40));
    const int m = 1 + static_cast<int>(UniformInt(rng, 0, 2));
    std::vector<std::vector<double>> r(len, std::vector<double>(m));
    std::vector<bool> ends(len);
    for (int t = 0; t < len; ++t) {
      for (double& x : r[t]) x = 20.0 * UniformReal(rng) - 10.0;
      ends[t] = UniformReal(rng) < 0.15 || t + 1 == len;
    }
    const double gamma = 0.99 * UniformReal(rng);
    auto fast = DiscountedReturns(r, ends, gamma);
    auto slow = NaiveReturns(r, ends, gamma);
    for (int t = 0; t < len; ++t) {
      for (int j = 0; j < m; ++j) CHECK(std::abs(fast[t][j] - slow[t][j]) <= 1e-12);
    }
  }
}

TEST_CASE("Batch returns stay within each environment stream") {
  std::vector<Environment> envs;
  for (int e = 0; e < 2; ++e) envs.emplace_back(GmpGame(0.5), 3);
  Rng rng(1);
  auto uniform = [](const Eigen::VectorXd&) {
    return UniformProfile(TeamStructure({2, 2}, {2, 2}));
  };
  RolloutBatch batch = CollectBatch(envs, 8, uniform, rng);
  CHECK(batch.size() == 8);
  for (std::size_t t = 0; t < batch.size(); ++t) {
    CHECK(batch.steps[t].env == static_cast<int>(t % 2));
    CHECK(CountsOfProfile(envs[0].structure(), batch.steps[t].actions) ==
          batch.steps[t].counts);
  }
  auto y = BatchReturns(batch, 2, 0.9);
  for (int e = 0; e < 2; ++e) {
    // Env e saw steps e, e+2, e+4, e+6; its first episode ends at e+4.
    const auto& s = batch.steps;
    CHECK(y[e][0] == doctest::Approx(s[e].rewards[0] + 0.9 * s[e + 2].rewards[0] +
                                     0.81 * s[e + 4].rewards[0]));
    CHECK(y[e + 6][0] == doctest::Approx(s[e + 6].rewards[0]));
  }
}

TEST_CASE("Critic games") {
  const TeamStructure st({2, 2}, {2, 2});
  Mlp zero = MakeZeroMlp({5, 8, 2}, Activation::kTanh);
  PayoffTensor g = BuildGameFromCritic(zero, st, kConstObs);
  CHECK(g.num_entries() == 9);
  for (std::int64_t e = 0; e < g.num_entries(); ++e) {
    CHECK(g.payoff(e, 0) == 0.0);
    CHECK(g.payoff(e, 1) == 0.0);
  }
  EquilibriumSolution s = SolveSymmetricNe(g);
  CHECK(s.method == "degenerate");
  CHECK(MaxAbsDifference(s.profile, UniformProfile(st)) == 0.0);

  const TeamStructure wide({3, 1, 2}, {3, 2, 4});
  PayoffTensor w = BuildGameFromCritic(MakeMlp({1 + 9, 4, 3}, Activation::kTanh, 1), wide,
                                       kConstObs);
  CHECK(w.num_entries() == Binomial(5, 2) * Binomial(2, 1) * Binomial(5, 3));
  CHECK_THROWS_AS(BuildGameFromCritic(zero, wide, kConstObs), Error);

  Eigen::VectorXd in = CriticInput(st, kConstObs, {{2, 0}, {1, 1}});
  CHECK(in == (Eigen::VectorXd(5) << 1, 1, 0, 0.5, 0.5).finished());
}

TEST_CASE("Critic games are team-symmetric after expansion") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const TeamStructure st = testing::RandomStructure(rng, 5, 3);
    int width = 1;
    for (int i = 0; i < st.num_teams(); ++i) width += st.num_actions(i);
    Mlp critic = MakeMlp({width, 6, st.num_teams()}, Activation::kTanh, rng());
    FullFormGame full = ExpandToFullForm(BuildGameFromCritic(critic, st, kConstObs));
    CHECK(CheckCommonPayoff(full));
    CHECK(CheckTeamSymmetry(full));
  }
}

TEST_CASE("Critic fitted to GMP reproduces the payoff table") {
  const PayoffTensor gmp = GmpGame(0.5);
  const TeamStructure& st = gmp.structure();
  Mlp critic = MakeMlp({5, 64, 64, 2}, Activation::kTanh, 3);
  AdamState opt = AdamState::For(critic, 3e-3);
  double mse = 1.0;
  // A mean below 1e-4 alone still lets one entry miss by more than 1e-2.
  for (int step = 0; step < 20000 && mse > 1e-5; ++step) {
    MlpGradients grads = MlpGradients::ZerosLike(critic);
    mse = 0.0;
    for (std::int64_t e = 0; e < gmp.num_entries(); ++e) {
      Eigen::VectorXd x = CriticInput(st, kConstObs, gmp.JointCounts(e));
      Eigen::Vector2d y(gmp.payoff(e, 0), gmp.payoff(e, 1));
      LossAndGradient l = MseAndGrad(MlpForward(critic, x), y);
      mse += l.value / 18.0;
      grads.Add(Backprop(critic, x, l.gradient));
    }
    AdamStep(opt, critic, grads, 0.0);
  }
  REQUIRE(mse <= 1e-4);
  PayoffTensor rebuilt = BuildGameFromCritic(critic, st, kConstObs);
  for (std::int64_t e = 0; e < gmp.num_entries(); ++e) {
    CHECK(std::abs(rebuilt.payoff(e, 0) - gmp.payoff(e, 0)) <= 1e-2);
    CHECK(std::abs(rebuilt.payoff(e, 1) - gmp.payoff(e, 1)) <= 1e-2);
  }
}

TEST_CASE("Extracted policies") {
  const SymmetricProfile uniform = UniformProfile(TeamStructure({2, 2}, {2, 2}));
  const Mlp zero = MakeZeroMlp({1, 64, 64, 2}, Activation::kTanh);
  CHECK(MaxAbsDifference(ExtractPolicy({zero, zero}, kConstObs), uniform) == 0.0);

  TrainConfig config;
  config.zero_init_actors = true;
  config.total_steps = 1;
  config.batch_size = 1;
  TrainResult r = DelacTrain(config, GmpGame(0.5));
  CHECK(r.actors.size() == 2);
  CHECK(MaxAbsDifference(r.history.front().profile, uniform) == 0.0);

  Mlp a = MakeMlp({1, 4, 3}, Activation::kTanh, 1), b = MakeMlp({1, 4, 2}, Activation::kTanh, 2);
  SymmetricProfile q = ExtractPolicy({a, b}, kConstObs);
  CHECK(q.num_teams() == 2);
  q.CheckShape(TeamStructure({1, 3}, {3, 2}));
  CHECK(q[0].IsValid());
  CHECK(q[1].IsValid());
}

TEST_CASE("Training config parsing and validation") {
  TrainConfig c;
  CHECK(c.total_steps == 50000);
  CHECK(c.gamma == 0.99);
  CHECK(c.batch_size == 256);
  CHECK(c.n_envs == 4);
  CHECK(c.epochs == 4);
  CHECK(c.max_grad_norm == 0.5);
  ApplyConfigFile("# overrides\nactor_lr = 1e-3\nhidden=32, 16\n\nobservation = last_counts  # tail\n"
                  "ne_selection=first\nverify_critic_games=true\n",
                  c);
  CHECK(c.actor_lr == 1e-3);
  CHECK(c.hidden == std::vector<int>{32, 16});
  CHECK(c.observation == ObservationSpec::kLastCounts);
  CHECK(c.ne_selection == NeSelection::kFirst);
  CHECK(c.verify_critic_games);
  CHECK(c.ToJson()["actor_lr"] == 1e-3);
  CHECK_THROWS_AS(c.Set("learning_rate", "1"), Error);
  CHECK_THROWS_AS(c.Set("gamma", "0.9x"), Error);
  CHECK_THROWS_AS(ApplyConfigFile("gamma 0.5\n", c), Error);
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("DelAC learns the GMP equilibrium") {
  TrainConfig config;
  config.total_steps = 10000;
  config.seed = 0;
  const PayoffTensor gmp = GmpGame(0.5);
  TrainResult r = DelacTrain(config, gmp);
  const auto uniform = UniformProfile(gmp.structure());
  CHECK(KlMetric(r.history.back().profile, {uniform}) <= 0.05);
  CHECK(MaxAbsDifference(r.history.back().profile, uniform) <= 0.1);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].step > r.history[i - 1].step);
  }
  CHECK(r.history.front().step == 0);
  CHECK(r.history.back().step == 10000);
  // Constant observation: one solver call per batch.
  CHECK(r.solver_calls == r.batches);
  CHECK(r.batches == (10000 + 255) / 256);
}

TEST_CASE("DelAC finds the dominant-action equilibrium") {
  TrainConfig config;
  config.total_steps = 10000;
  const PayoffTensor game = DominantGame();
  const SymmetricProfile ne = SolveSymmetricNe(game).profile;
  CHECK(ne[0].probs == std::vector<double>{1.0, 0.0});
  CHECK(ne[1].probs == std::vector<double>{0.0, 1.0});
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    config.seed = seed;
    CHECK(TotalVariation(DelacTrain(config, game).history.back().profile, ne) <= 0.05);
  }
}

TEST_CASE("DelAC critic games stay team-symmetric") {
  TrainConfig config;
  config.total_steps = 1000;
  config.verify_critic_games = true;
  TrainResult r = DelacTrain(config, GmpGame(0.5));
  CHECK(r.games_checked == r.solver_calls);
  CHECK(r.games_checked > 0);
  CHECK(r.symmetry_failures == 0);
}

TEST_CASE("DelAC with last-counts observations caches per observation") {
  TrainConfig config;
  config.total_steps = 512;
  config.episode_length = 4;
  config.observation = ObservationSpec::kLastCounts;
  TrainResult r = DelacTrain(config, GmpGame(0.5));
  CHECK(r.batches == 2);
  CHECK(r.solver_calls > r.batches);
  CHECK(r.solver_calls <= 2 * 10);
}

TEST_CASE("Training is deterministic given the seed") {
  TrainConfig config;
  config.total_steps = 1500;
  config.seed = 42;
  for (const char* algo : {"delac", "ia2c"}) {
    TrainResult a = Train(algo, config, GmpGame(0.5));
    TrainResult b = Train(algo, config, GmpGame(0.5));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].profile.strategies[0].probs == b.history[i].profile.strategies[0].probs);
      CHECK(a.history[i].profile.strategies[1].probs == b.history[i].profile.strategies[1].probs);
    }
    CHECK(a.actors[0].weights[0] == b.actors[0].weights[0]);
  }
  TrainConfig other = config;
  other.seed = 43;
  CHECK(DelacTrain(config, GmpGame(0.5)).history.back().profile.strategies[0].probs !=
        DelacTrain(other, GmpGame(0.5)).history.back().profile.strategies[0].probs);
}

TEST_CASE("IA2C converges on the dominant-action game") {
  TrainConfig config;
  config.total_steps = 50000;
  const PayoffTensor game = DominantGame();
  const SymmetricProfile ne = SolveSymmetricNe(game).profile;
  TrainResult r = Ia2cTrain(config, game);
  CHECK(r.algo == "ia2c");
  CHECK(r.critics.size() == 2);
  CHECK(TotalVariation(r.history.back().profile, ne) <= 0.1);
}

TEST_CASE("IA2C trails DelAC on GMP") {
  TrainConfig config;
  config.total_steps = 10000;
  const PayoffTensor gmp = GmpGame(0.5);
  const std::vector<SymmetricProfile> ne{UniformProfile(gmp.structure())};
  double delac = 0.0, ia2c = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    config.seed = seed;
    delac += KlMetric(DelacTrain(config, gmp).history.back().profile, ne);
    ia2c += KlMetric(Ia2cTrain(config, gmp).history.back().profile, ne);
  }
  CHECK(ia2c > delac);
}

TEST_CASE("Per-player critics stay identical within teams") {
  const PayoffTensor game = GenRandomGame(TeamStructure({2, 3}, {2, 3}), 0, 10, false, 4);
  std::vector<Environment> envs;
  for (int e = 0; e < 2; ++e) envs.emplace_back(game, 5);
  PerPlayerCritics critics(game.structure(), 1, {16, 16}, 9, 3e-2);
  Rng rng(2);
  Rng policy_rng(3);
  for (int update = 0; update < 100; ++update) {
    SymmetricProfile policy;
    for (int i = 0; i < 2; ++i) {
      policy.strategies.push_back(
          MixedStrategy::FromProbs(UniformSimplexPoint(policy_rng, game.structure().num_actions(i))));
    }
    RolloutBatch batch = CollectBatch(envs, 16, [&](const Eigen::VectorXd&) { return policy; }, rng);
    critics.Update(batch, 2, 0.99, 0.5);
  }
  CHECK(critics.MaxTeammateGap(kConstObs) <= 1e-12);
  // Different teams do learn different values.
  const std::vector<CountVector> counts{{1, 1}, {1, 1, 1}};
  CHECK(critics.Value(0, kConstObs, counts) != critics.Value(2, kConstObs, counts));
}

}  // namespace
}  // namespace teamsym
