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

#ifndef TEAMSYM_MARL_H_
#define TEAMSYM_MARL_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "teamsym/equilibrium.h"
#include "teamsym/game.h"
#include "teamsym/neural.h"
#include "teamsym/payoff.h"
#include "teamsym/rng.h"

namespace teamsym {

enum class ObservationSpec {
  kConstant,    // [1] at every step
  kLastCounts,  // one-hot over {episode start} + joint count entries
};

// Which equilibrium of the critic game becomes the actor target.
enum class NeSelection {
  kFirst,    // the solver's canonical answer
  kNearest,  // the enumerated equilibrium closest to the current policies
};

std::string NeSelectionName(NeSelection selection);
NeSelection NeSelectionFromName(const std::string& name);

std::string ObservationSpecName(ObservationSpec spec);
ObservationSpec ObservationSpecFromName(const std::string& name);

// A repeated matrix game. Every agent sees the same observation.
class Environment {
 public:
  Environment(PayoffTensor game, int episode_length,
              ObservationSpec spec = ObservationSpec::kConstant);

  struct StepResult {
    std::vector<double> rewards;  // one per team
    std::vector<CountVector> counts;
    std::size_t entry = 0;
    Eigen::VectorXd next_observation;
    bool done = false;  // last step of the episode
  };

  // Plays one joint action (one index per player, players numbered team by
  // team). After the last step of an episode the environment resets itself.
  StepResult Step(const std::vector<int>& joint_actions);
  Eigen::VectorXd Reset();

  const PayoffTensor& game() const { return game_; }
  const TeamStructure& structure() const { return game_.structure(); }
  int episode_length() const { return episode_length_; }
  ObservationSpec observation_spec() const { return spec_; }
  int observation_size() const;
  const Eigen::VectorXd& observation() const { return observation_; }
  Eigen::VectorXd InitialObservation() const;
  int time_step() const { return t_; }

 private:
  PayoffTensor game_;
  int episode_length_;
  ObservationSpec spec_;
  int t_ = 0;
  Eigen::VectorXd observation_;
};

struct Transition {
  int env = 0;
  Eigen::VectorXd observation;
  std::vector<int> actions;
  std::vector<CountVector> counts;
  std::size_t entry = 0;
  std::vector<double> rewards;
  Eigen::VectorXd next_observation;
  bool done = false;
};

struct RolloutBatch {
  std::vector<Transition> steps;

  std::size_t size() const { return steps.size(); }
  // Indices of the steps of each environment, in collection order.
  std::vector<std::vector<std::size_t>> ByEnvironment(int n_envs) const;
};

// Per-team suffix sums y^t = sum_{k >= t} gamma^{k-t} u^k, restarted after
// every step with ends[t] set.
std::vector<std::vector<double>> DiscountedReturns(
    const std::vector<std::vector<double>>& rewards,
    const std::vector<bool>& ends, double gamma);

// Monte Carlo targets for a batch. Each environment's stream is cut at
// episode ends and at the end of the batch.
std::vector<std::vector<double>> BatchReturns(const RolloutBatch& batch,
                                              int n_envs, double gamma);

struct TrainConfig {
  std::int64_t total_steps = 50'000;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double actor_lr = 3e-4;
  double critic_lr = 3e-2;
  double clip_eps = 0.2;  // carried for completeness; unused
  int epochs = 4;
  int batch_size = 256;
  double entropy_coeff = 0.0;
  double max_grad_norm = 0.5;
  int n_envs = 4;
  // One step per episode: with a constant observation the critic cannot tell
  // time steps apart, so longer episodes only add return variance.
  int episode_length = 1;
  std::uint64_t seed = 0;
  int eval_interval = 100;
  std::vector<int> hidden = {64, 64};
  // Full-batch critic passes per batch.
  int critic_epochs = 8;
  double solver_tolerance = 1e-6;
  ObservationSpec observation = ObservationSpec::kConstant;
  NeSelection ne_selection = NeSelection::kNearest;
  // Start actors from all-zero parameters (uniform policies).
  bool zero_init_actors = false;
  // Expand every critic game and check common payoffs and team symmetry.
  bool verify_critic_games = false;

  void Validate() const;
  // Applies one key=value override. Throws kInvalidInput on unknown keys or
  // unparsable values.
  void Set(const std::string& key, const std::string& value);
  nlohmann::json ToJson() const;
};

// Reads `key = value` lines; '#' starts a comment.
void ApplyConfigFile(const std::string& text, TrainConfig& config);

struct PolicySnapshot {
  std::int64_t step = 0;
  SymmetricProfile profile;
};

struct TrainResult {
  std::string algo;
  std::vector<Mlp> actors;   // one delegate per team
  std::vector<Mlp> critics;  // DelAC: one centralized; IA2C: one per team
  std::vector<PolicySnapshot> history;
  std::int64_t solver_calls = 0;
  std::int64_t batches = 0;
  std::int64_t games_checked = 0;
  std::int64_t symmetry_failures = 0;
};

// Critic input: observation followed by each team's count vector divided by
// its team size.
Eigen::VectorXd CriticInput(const TeamStructure& structure,
                            const Eigen::VectorXd& observation,
                            const std::vector<CountVector>& counts);

PayoffTensor BuildGameFromCritic(const Mlp& critic,
                                 const TeamStructure& structure,
                                 const Eigen::VectorXd& observation);

SymmetricProfile ExtractPolicy(const std::vector<Mlp>& actors,
                               const Eigen::VectorXd& observation);

TrainResult DelacTrain(const TrainConfig& config, const PayoffTensor& game);
TrainResult Ia2cTrain(const TrainConfig& config, const PayoffTensor& game);

// Non-delegate reference: one critic per player, each predicting its own
// player's return. Teammates start from identical parameters.
class PerPlayerCritics {
 public:
  PerPlayerCritics(const TeamStructure& structure, int observation_size,
                   std::vector<int> hidden, std::uint64_t seed,
                   double learning_rate);

  // One Adam step per player on sum_t (Q_p(o^t, g^t) - y^t_{team(p)})^2.
  void Update(const RolloutBatch& batch, int n_envs, double gamma,
              double max_grad_norm);
  double Value(int player, const Eigen::VectorXd& observation,
               const std::vector<CountVector>& counts) const;
  // Largest |Q_p - Q_q| over teammates p, q and every joint count entry.
  double MaxTeammateGap(const Eigen::VectorXd& observation) const;

 private:
  TeamStructure structure_;
  std::vector<Mlp> critics_;
  std::vector<AdamState> optimizers_;
};

// Collects `count` transitions round-robin from `envs`, with every player
// sampling from its team's entry of `policy_for_observation`.
template <typename PolicyFn>
RolloutBatch CollectBatch(std::vector<Environment>& envs, int count,
                          PolicyFn&& policy_for_observation, Rng& rng) {
  RolloutBatch batch;
  const int n_envs = static_cast<int>(envs.size());
  for (int s = 0; s < count; ++s) {
    const int e = s % n_envs;
    Environment& env = envs[e];
    Transition tr;
    tr.env = e;
    tr.observation = env.observation();
    const SymmetricProfile policy = policy_for_observation(tr.observation);
    const TeamStructure& st = env.structure();
    for (int p = 0; p < st.num_players(); ++p) {
      tr.actions.push_back(
          static_cast<int>(SampleIndex(rng, policy[st.team_of(p)].probs)));
    }
    Environment::StepResult r = env.Step(tr.actions);
    tr.counts = std::move(r.counts);
    tr.entry = r.entry;
    tr.rewards = std::move(r.rewards);
    tr.next_observation = std::move(r.next_observation);
    tr.done = r.done;
    batch.steps.push_back(std::move(tr));
  }
  return batch;
}

}  // namespace teamsym

#endif  // TEAMSYM_MARL_H_
