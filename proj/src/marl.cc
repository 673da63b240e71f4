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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "teamsym/errors.h"

namespace teamsym {
namespace {

std::string Fingerprint(const Eigen::VectorXd& v) {
  std::string key(sizeof(double) * v.size(), '\0');
  if (v.size() > 0) std::memcpy(key.data(), v.data(), key.size());
  return key;
}

std::vector<int> LayerDims(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  return dims;
}

int CountEncodingSize(const TeamStructure& st) {
  int size = 0;
  for (int i = 0; i < st.num_teams(); ++i) size += st.num_actions(i);
  return size;
}

// Gradient of -entropy(softmax(logits)) wrt logits: p_a (log p_a + H).
Eigen::VectorXd NegEntropyGradient(const Eigen::VectorXd& probs) {
  double entropy = 0.0;
  for (Eigen::Index a = 0; a < probs.size(); ++a) {
    if (probs[a] > 0.0) entropy -= probs[a] * std::log(probs[a]);
  }
  Eigen::VectorXd g(probs.size());
  for (Eigen::Index a = 0; a < probs.size(); ++a) {
    g[a] = probs[a] > 0.0 ? probs[a] * (std::log(probs[a]) + entropy) : 0.0;
  }
  return g;
}

// Distinct observations in order of first appearance, with multiplicities.
struct ObservationGroup {
  Eigen::VectorXd observation;
  std::vector<std::size_t> steps;
};

std::vector<ObservationGroup> GroupByObservation(const RolloutBatch& batch) {
  std::vector<ObservationGroup> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    auto [it, inserted] =
        index.emplace(Fingerprint(batch.steps[t].observation), groups.size());
    if (inserted) groups.push_back({batch.steps[t].observation, {}});
    groups[it->second].steps.push_back(t);
  }
  return groups;
}

// Identical (observation, counts) inputs share one forward/backward pass:
// sum_t (q - y_t)^2 has gradient 2 (c q - sum_t y_t) at the common input.
struct RegressionGroup {
  Eigen::VectorXd input;
  double count = 0.0;
  Eigen::VectorXd target_sum;
};

std::vector<RegressionGroup> GroupRegression(
    const TeamStructure& st, const RolloutBatch& batch,
    const std::vector<std::vector<double>>& targets) {
  std::vector<RegressionGroup> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const Transition& tr = batch.steps[t];
    Eigen::VectorXd input = CriticInput(st, tr.observation, tr.counts);
    auto [it, inserted] = index.emplace(Fingerprint(input), groups.size());
    const int width = static_cast<int>(targets[t].size());
    if (inserted) groups.push_back({input, 0.0, Eigen::VectorXd::Zero(width)});
    RegressionGroup& g = groups[it->second];
    g.count += 1.0;
    for (int j = 0; j < width; ++j) g.target_sum[j] += targets[t][j];
  }
  return groups;
}

void RegressionStep(Mlp& net, AdamState& opt,
                    const std::vector<RegressionGroup>& groups,
                    double max_grad_norm) {
  MlpGradients grads = MlpGradients::ZerosLike(net);
  for (const RegressionGroup& g : groups) {
    Eigen::VectorXd q = MlpForward(net, g.input);
    grads.Add(Backprop(net, g.input, 2.0 * (g.count * q - g.target_sum)));
  }
  AdamStep(opt, net, std::move(grads), max_grad_norm);
}

std::vector<Environment> MakeEnvironments(const TrainConfig& config,
                                          const PayoffTensor& game) {
  std::vector<Environment> envs;
  for (int e = 0; e < config.n_envs; ++e) {
    envs.emplace_back(game, config.episode_length, config.observation);
  }
  return envs;
}

std::vector<Mlp> MakeActors(const TrainConfig& config, const TeamStructure& st,
                            int obs_size) {
  std::vector<Mlp> actors;
  for (int i = 0; i < st.num_teams(); ++i) {
    auto dims = LayerDims(obs_size, config.hidden, st.num_actions(i));
    actors.push_back(config.zero_init_actors
                         ? MakeZeroMlp(dims, Activation::kTanh)
                         : MakeMlp(dims, Activation::kTanh,
                                   DeriveSeed(config.seed, 100 + i)));
  }
  return actors;
}

// Records the current policy at every evaluation step in [begin, end).
void RecordSnapshots(const TrainConfig& config, const std::vector<Mlp>& actors,
                     const Eigen::VectorXd& eval_obs, std::int64_t begin,
                     std::int64_t end, std::vector<PolicySnapshot>& history) {
  const std::int64_t interval = config.eval_interval;
  std::int64_t s = (begin + interval - 1) / interval * interval;
  if (s >= end) return;
  const SymmetricProfile profile = ExtractPolicy(actors, eval_obs);
  for (; s < end; s += interval) history.push_back({s, profile});
}

template <typename UpdateFn>
void RunLoop(const TrainConfig& config, std::vector<Environment>& envs,
             std::vector<Mlp>& actors, Rng& rng, TrainResult& result,
             UpdateFn&& update) {
  const Eigen::VectorXd eval_obs = envs.front().InitialObservation();
  auto policy = [&](const Eigen::VectorXd& obs) {
    return ExtractPolicy(actors, obs);
  };
  std::int64_t step = 0;
  while (step < config.total_steps) {
    const int count = static_cast<int>(
        std::min<std::int64_t>(config.batch_size, config.total_steps - step));
    RecordSnapshots(config, actors, eval_obs, step, step + count, result.history);
    RolloutBatch batch = CollectBatch(envs, count, policy, rng);
    update(batch, step);
    step += count;
    ++result.batches;
  }
  result.history.push_back({config.total_steps, ExtractPolicy(actors, eval_obs)});
}

SymmetricProfile SelectEquilibrium(const PayoffTensor& game,
                                   const SolverOptions& opts,
                                   NeSelection selection,
                                   const SymmetricProfile& current) {
  if (selection == NeSelection::kNearest) {
    const auto all = EnumerateSymmetricNe(game, opts);
    const EquilibriumSolution* best = nullptr;
    double best_dist = 0.0;
    for (const EquilibriumSolution& s : all) {
      const double d = MaxAbsDifference(s.profile, current);
      if (best == nullptr || d < best_dist) {
        best = &s;
        best_dist = d;
      }
    }
    if (best != nullptr) return best->profile;
  }
  return SolveSymmetricNe(game, opts).profile;
}

bool ParseBool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kInvalidInput, "expected a boolean, got '" + v + "'");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::string NeSelectionName(NeSelection selection) {
  return selection == NeSelection::kFirst ? "first" : "nearest";
}

NeSelection NeSelectionFromName(const std::string& name) {
  if (name == "first") return NeSelection::kFirst;
  if (name == "nearest") return NeSelection::kNearest;
  throw Error(ErrorCode::kInvalidInput, "unknown equilibrium selection '" + name + "'");
}

std::string ObservationSpecName(ObservationSpec spec) {
  return spec == ObservationSpec::kConstant ? "constant" : "last_counts";
}

ObservationSpec ObservationSpecFromName(const std::string& name) {
  if (name == "constant") return ObservationSpec::kConstant;
  if (name == "last_counts") return ObservationSpec::kLastCounts;
  throw Error(ErrorCode::kInvalidInput, "unknown observation spec '" + name + "'");
}

Environment::Environment(PayoffTensor game, int episode_length,
                         ObservationSpec spec)
    : game_(std::move(game)), episode_length_(episode_length), spec_(spec) {
  if (episode_length < 1) {
    throw Error(ErrorCode::kInvalidInput, "episode length must be >= 1");
  }
  observation_ = InitialObservation();
}

int Environment::observation_size() const {
  return spec_ == ObservationSpec::kConstant
             ? 1
             : static_cast<int>(game_.num_entries()) + 1;
}

Eigen::VectorXd Environment::InitialObservation() const {
  if (spec_ == ObservationSpec::kConstant) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(observation_size());
  obs[0] = 1.0;
  return obs;
}

Eigen::VectorXd Environment::Reset() {
  t_ = 0;
  observation_ = InitialObservation();
  return observation_;
}

Environment::StepResult Environment::Step(const std::vector<int>& joint_actions) {
  if (static_cast<int>(joint_actions.size()) != structure().num_players()) {
    throw Error(ErrorCode::kInvalidAction,
                "expected " + std::to_string(structure().num_players()) +
                    " actions, got " + std::to_string(joint_actions.size()));
  }
  StepResult r;
  r.counts = CountsOfProfile(structure(), joint_actions);
  r.entry = static_cast<std::size_t>(game_.EntryIndex(r.counts));
  auto payoffs = game_.payoffs(r.entry);
  r.rewards.assign(payoffs.begin(), payoffs.end());
  ++t_;
  r.done = t_ >= episode_length_;
  if (spec_ == ObservationSpec::kConstant) {
    r.next_observation = Eigen::VectorXd::Ones(1);
  } else {
    r.next_observation = Eigen::VectorXd::Zero(observation_size());
    r.next_observation[1 + r.entry] = 1.0;
  }
  if (r.done) {
    Reset();
  } else {
    observation_ = r.next_observation;
  }
  return r;
}

std::vector<std::vector<std::size_t>> RolloutBatch::ByEnvironment(int n_envs) const {
  std::vector<std::vector<std::size_t>> out(n_envs);
  for (std::size_t t = 0; t < steps.size(); ++t) out.at(steps[t].env).push_back(t);
  return out;
}

std::vector<std::vector<double>> DiscountedReturns(
    const std::vector<std::vector<double>>& rewards,
    const std::vector<bool>& ends, double gamma) {
  if (rewards.size() != ends.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "rewards and ends differ in length");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "gamma must lie in [0, 1)");
  }
  std::vector<std::vector<double>> out(rewards.size());
  std::vector<double> running;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    if (ends[t] || running.size() != rewards[t].size()) {
      running.assign(rewards[t].size(), 0.0);
    }
    for (std::size_t j = 0; j < running.size(); ++j) {
      running[j] = rewards[t][j] + gamma * running[j];
    }
    out[t] = running;
  }
  return out;
}

std::vector<std::vector<double>> BatchReturns(const RolloutBatch& batch,
                                              int n_envs, double gamma) {
  std::vector<std::vector<double>> out(batch.size());
  for (const auto& idx : batch.ByEnvironment(n_envs)) {
    std::vector<std::vector<double>> rewards;
    std::vector<bool> ends;
    for (std::size_t t : idx) {
      rewards.push_back(batch.steps[t].rewards);
      ends.push_back(batch.steps[t].done);
    }
    if (!ends.empty()) ends.back() = true;
    auto returns = DiscountedReturns(rewards, ends, gamma);
    for (std::size_t s = 0; s < idx.size(); ++s) out[idx[s]] = std::move(returns[s]);
  }
  return out;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidInput, msg);
  };
  if (total_steps < 1) fail("total_steps must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must lie in [0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be positive");
  if (epochs < 1 || critic_epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (n_envs < 1) fail("n_envs must be >= 1");
  if (episode_length < 1) fail("episode_length must be >= 1");
  if (eval_interval < 1) fail("eval_interval must be >= 1");
  if (!(entropy_coeff >= 0.0)) fail("entropy_coeff must be >= 0");
  if (!(max_grad_norm >= 0.0)) fail("max_grad_norm must be >= 0");
  if (!(solver_tolerance > 0.0)) fail("solver_tolerance must be positive");
  for (int h : hidden) {
    if (h < 1) fail("hidden layer sizes must be >= 1");
  }
}

void TrainConfig::Set(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    auto as_double = [&] {
      double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    };
    auto as_int = [&] {
      long long v = std::stoll(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    };
    if (key == "total_steps") total_steps = as_int();
    else if (key == "gamma") gamma = as_double();
    else if (key == "gae_lambda") gae_lambda = as_double();
    else if (key == "actor_lr") actor_lr = as_double();
    else if (key == "critic_lr") critic_lr = as_double();
    else if (key == "clip_eps") clip_eps = as_double();
    else if (key == "epochs") epochs = static_cast<int>(as_int());
    else if (key == "batch_size") batch_size = static_cast<int>(as_int());
    else if (key == "entropy_coeff") entropy_coeff = as_double();
    else if (key == "max_grad_norm") max_grad_norm = as_double();
    else if (key == "n_envs") n_envs = static_cast<int>(as_int());
    else if (key == "episode_length") episode_length = static_cast<int>(as_int());
    else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "eval_interval") eval_interval = static_cast<int>(as_int());
    else if (key == "critic_epochs") critic_epochs = static_cast<int>(as_int());
    else if (key == "solver_tolerance") solver_tolerance = as_double();
    else if (key == "observation") observation = ObservationSpecFromName(value);
    else if (key == "ne_selection") ne_selection = NeSelectionFromName(value);
    else if (key == "zero_init_actors") zero_init_actors = ParseBool(value);
    else if (key == "verify_critic_games") verify_critic_games = ParseBool(value);
    else if (key == "hidden") {
      std::vector<int> sizes;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) sizes.push_back(std::stoi(Trim(item)));
      hidden = sizes;
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown config key '" + key + "'");
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidInput,
                "bad value '" + value + "' for config key '" + key + "'");
  }
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"total_steps", total_steps},
          {"gamma", gamma},
          {"gae_lambda", gae_lambda},
          {"actor_lr", actor_lr},
          {"critic_lr", critic_lr},
          {"clip_eps", clip_eps},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"entropy_coeff", entropy_coeff},
          {"max_grad_norm", max_grad_norm},
          {"n_envs", n_envs},
          {"episode_length", episode_length},
          {"seed", seed},
          {"eval_interval", eval_interval},
          {"hidden", hidden},
          {"critic_epochs", critic_epochs},
          {"solver_tolerance", solver_tolerance},
          {"observation", ObservationSpecName(observation)},
          {"ne_selection", NeSelectionName(ne_selection)},
          {"zero_init_actors", zero_init_actors},
          {"verify_critic_games", verify_critic_games}};
}

void ApplyConfigFile(const std::string& text, TrainConfig& config) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidInput,
                  "config line " + std::to_string(lineno) + " has no '='");
    }
    config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

Eigen::VectorXd CriticInput(const TeamStructure& st,
                            const Eigen::VectorXd& observation,
                            const std::vector<CountVector>& counts) {
  if (static_cast<int>(counts.size()) != st.num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one count vector per team");
  }
  Eigen::VectorXd input(observation.size() + CountEncodingSize(st));
  input.head(observation.size()) = observation;
  Eigen::Index pos = observation.size();
  for (int i = 0; i < st.num_teams(); ++i) {
    if (static_cast<int>(counts[i].size()) != st.num_actions(i)) {
      throw Error(ErrorCode::kDimensionMismatch, "count vector length mismatch");
    }
    for (int c : counts[i]) input[pos++] = static_cast<double>(c) / st.team_size(i);
  }
  return input;
}

PayoffTensor BuildGameFromCritic(const Mlp& critic, const TeamStructure& st,
                                 const Eigen::VectorXd& observation) {
  if (critic.input_size() != observation.size() + CountEncodingSize(st) ||
      critic.output_size() != st.num_teams()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "critic shape does not match observation and team structure");
  }
  PayoffTensor game(st);
  for (std::int64_t e = 0; e < game.num_entries(); ++e) {
    Eigen::VectorXd q = MlpForward(critic, CriticInput(st, observation, game.JointCounts(e)));
    game.set_payoffs(e, std::vector<double>(q.data(), q.data() + q.size()));
  }
  return game;
}

SymmetricProfile ExtractPolicy(const std::vector<Mlp>& actors,
                               const Eigen::VectorXd& observation) {
  SymmetricProfile profile;
  for (const Mlp& actor : actors) {
    profile.strategies.push_back(SoftmaxStrategy(MlpForward(actor, observation)));
  }
  return profile;
}

TrainResult DelacTrain(const TrainConfig& config, const PayoffTensor& game) {
  config.Validate();
  const TeamStructure& st = game.structure();
  std::vector<Environment> envs = MakeEnvironments(config, game);
  const int obs_size = envs.front().observation_size();
  Rng rng(DeriveSeed(config.seed, 1));

  TrainResult result;
  result.algo = "delac";
  result.actors = MakeActors(config, st, obs_size);
  result.critics.push_back(
      MakeMlp(LayerDims(obs_size + CountEncodingSize(st), config.hidden, st.num_teams()),
              Activation::kTanh, DeriveSeed(config.seed, 2)));
  std::vector<AdamState> actor_opt;
  for (const Mlp& a : result.actors) actor_opt.push_back(AdamState::For(a, config.actor_lr));
  AdamState critic_opt = AdamState::For(result.critics[0], config.critic_lr);

  auto update = [&](const RolloutBatch& batch, std::int64_t step) {
    Mlp& critic = result.critics[0];
    const auto targets = BatchReturns(batch, config.n_envs, config.gamma);
    const auto regression = GroupRegression(st, batch, targets);
    for (int epoch = 0; epoch < config.critic_epochs; ++epoch) {
      RegressionStep(critic, critic_opt, regression, config.max_grad_norm);
    }

    // One equilibrium per distinct observation.
    const auto groups = GroupByObservation(batch);
    std::vector<SymmetricProfile> targets_by_group;
    for (const ObservationGroup& g : groups) {
      PayoffTensor critic_game = BuildGameFromCritic(critic, st, g.observation);
      if (config.verify_critic_games) {
        FullFormGame full = ExpandToFullForm(critic_game);
        ++result.games_checked;
        if (!CheckCommonPayoff(full) || !CheckTeamSymmetry(full)) {
          ++result.symmetry_failures;
        }
      }
      SolverOptions opts;
      opts.tolerance = config.solver_tolerance;
      opts.seed = DeriveSeed(config.seed, 1000 + result.solver_calls);
      ++result.solver_calls;
      try {
        targets_by_group.push_back(SelectEquilibrium(
            critic_game, opts, config.ne_selection,
            ExtractPolicy(result.actors, g.observation)));
      } catch (const Error& err) {
        throw Error(err.code(), "DelAC step " + std::to_string(step) +
                                    ": critic game has no equilibrium within "
                                    "budget (" + err.what() + ")");
      }
    }

    for (int j = 0; j < st.num_teams(); ++j) {
      Mlp& actor = result.actors[j];
      for (int epoch = 0; epoch < config.epochs; ++epoch) {
        MlpGradients grads = MlpGradients::ZerosLike(actor);
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const auto& target_probs = targets_by_group[g][j].probs;
          Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(
              target_probs.data(), static_cast<Eigen::Index>(target_probs.size()));
          Eigen::VectorXd logits = MlpForward(actor, groups[g].observation);
          Eigen::VectorXd grad = KlLoss(target, logits).gradient;
          if (config.entropy_coeff > 0.0) {
            grad += config.entropy_coeff * NegEntropyGradient(Softmax(logits));
          }
          grad *= static_cast<double>(groups[g].steps.size());
          grads.Add(Backprop(actor, groups[g].observation, grad));
        }
        AdamStep(actor_opt[j], actor, std::move(grads), config.max_grad_norm);
      }
    }
  };
  RunLoop(config, envs, result.actors, rng, result, update);
  return result;
}

TrainResult Ia2cTrain(const TrainConfig& config, const PayoffTensor& game) {
  config.Validate();
  const TeamStructure& st = game.structure();
  std::vector<Environment> envs = MakeEnvironments(config, game);
  const int obs_size = envs.front().observation_size();
  Rng rng(DeriveSeed(config.seed, 1));

  TrainResult result;
  result.algo = "ia2c";
  result.actors = MakeActors(config, st, obs_size);
  std::vector<AdamState> actor_opt, value_opt;
  for (int i = 0; i < st.num_teams(); ++i) {
    result.critics.push_back(MakeMlp(LayerDims(obs_size, config.hidden, 1),
                                     Activation::kTanh, DeriveSeed(config.seed, 200 + i)));
    actor_opt.push_back(AdamState::For(result.actors[i], config.actor_lr));
    value_opt.push_back(AdamState::For(result.critics[i], config.critic_lr));
  }

  auto update = [&](const RolloutBatch& batch, std::int64_t) {
    const auto by_env = batch.ByEnvironment(config.n_envs);
    for (int j = 0; j < st.num_teams(); ++j) {
      Mlp& value = result.critics[j];
      auto v = [&](const Eigen::VectorXd& obs) { return MlpForward(value, obs)[0]; };
      // GAE(lambda) per environment stream; truncated streams bootstrap.
      std::vector<double> advantages(batch.size()), returns(batch.size());
      for (const auto& idx : by_env) {
        double gae = 0.0;
        for (std::size_t s = idx.size(); s-- > 0;) {
          const Transition& tr = batch.steps[idx[s]];
          const bool last = s + 1 == idx.size();
          const double next_v = tr.done ? 0.0 : v(tr.next_observation);
          if (tr.done || last) gae = 0.0;
          const double v_t = v(tr.observation);
          const double delta = tr.rewards[j] + config.gamma * next_v - v_t;
          gae = delta + config.gamma * config.gae_lambda * gae;
          advantages[idx[s]] = gae;
          returns[idx[s]] = gae + v_t;
        }
      }

      Mlp& actor = result.actors[j];
      MlpGradients actor_grads = MlpGradients::ZerosLike(actor);
      for (const ObservationGroup& g : GroupByObservation(batch)) {
        Eigen::VectorXd probs = Softmax(MlpForward(actor, g.observation));
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(probs.size());
        double samples = 0.0;
        for (std::size_t t : g.steps) {
          const Transition& tr = batch.steps[t];
          for (int p = st.first_player(j); p < st.first_player(j) + st.team_size(j); ++p) {
            // d(-A log pi(a)) / d logits = -A (e_a - pi).
            grad += advantages[t] * probs;
            grad[tr.actions[p]] -= advantages[t];
            samples += 1.0;
          }
        }
        if (config.entropy_coeff > 0.0) {
          grad += samples * config.entropy_coeff * NegEntropyGradient(probs);
        }
        actor_grads.Add(Backprop(actor, g.observation, grad));
      }
      AdamStep(actor_opt[j], actor, std::move(actor_grads), config.max_grad_norm);

      MlpGradients value_grads = MlpGradients::ZerosLike(value);
      for (const ObservationGroup& g : GroupByObservation(batch)) {
        const double pred = v(g.observation);
        double grad = 0.0;
        for (std::size_t t : g.steps) grad += 2.0 * (pred - returns[t]);
        value_grads.Add(Backprop(value, g.observation, Eigen::VectorXd::Constant(1, grad)));
      }
      AdamStep(value_opt[j], value, std::move(value_grads), config.max_grad_norm);
    }
  };
  RunLoop(config, envs, result.actors, rng, result, update);
  return result;
}

PerPlayerCritics::PerPlayerCritics(const TeamStructure& structure,
                                   int observation_size, std::vector<int> hidden,
                                   std::uint64_t seed, double learning_rate)
    : structure_(structure) {
  for (int p = 0; p < structure.num_players(); ++p) {
    critics_.push_back(MakeMlp(
        LayerDims(observation_size + CountEncodingSize(structure), hidden, 1),
        Activation::kTanh, DeriveSeed(seed, structure.team_of(p))));
    optimizers_.push_back(AdamState::For(critics_.back(), learning_rate));
  }
}

void PerPlayerCritics::Update(const RolloutBatch& batch, int n_envs, double gamma,
                              double max_grad_norm) {
  const auto returns = BatchReturns(batch, n_envs, gamma);
  for (int p = 0; p < structure_.num_players(); ++p) {
    std::vector<std::vector<double>> own(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
      own[t] = {returns[t][structure_.team_of(p)]};
    }
    RegressionStep(critics_[p], optimizers_[p], GroupRegression(structure_, batch, own),
                   max_grad_norm);
  }
}

double PerPlayerCritics::Value(int player, const Eigen::VectorXd& observation,
                               const std::vector<CountVector>& counts) const {
  return MlpForward(critics_.at(player), CriticInput(structure_, observation, counts))[0];
}

double PerPlayerCritics::MaxTeammateGap(const Eigen::VectorXd& observation) const {
  PayoffTensor shape(structure_);
  double gap = 0.0;
  for (std::int64_t e = 0; e < shape.num_entries(); ++e) {
    const auto counts = shape.JointCounts(e);
    for (int i = 0; i < structure_.num_teams(); ++i) {
      const int first = structure_.first_player(i);
      const double ref = Value(first, observation, counts);
      for (int p = first + 1; p < first + structure_.team_size(i); ++p) {
        gap = std::max(gap, std::abs(Value(p, observation, counts) - ref));
      }
    }
  }
  return gap;
}

}  // namespace teamsym
