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

#include "teamsym/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include <Eigen/Dense>

#include "teamsym/errors.h"
#include "teamsym/rng.h"

namespace teamsym {
namespace {

constexpr double kDedupDistance = 1e-6;
constexpr int kMaxStepHalvings = 30;
constexpr int kAveragingWindow = 100;
constexpr double kFixedPointDamping = 0.5;
constexpr double kPolishSupportThreshold = 1e-3;

using Support = std::vector<std::vector<int>>;

double PayoffScale(const PayoffTensor& game) {
  double scale = 1.0;
  for (std::int64_t e = 0; e < game.num_entries(); ++e) {
    for (double v : game.payoffs(e)) scale = std::max(scale, std::abs(v));
  }
  return scale;
}

// Equal-payoff system of one support. Unknowns are the on-support
// probabilities of every team followed by one value per team.
class SupportSystem {
 public:
  SupportSystem(const PayoffTensor& game, const Support& support)
      : game_(game), support_(support) {
    const int m = game.num_teams();
    offset_.resize(m);
    int next = 0;
    for (int i = 0; i < m; ++i) {
      offset_[i] = next;
      next += static_cast<int>(support[i].size());
    }
    num_probs_ = next;
  }

  int size() const { return num_probs_ + game_.num_teams(); }

  SymmetricProfile Unpack(const Eigen::VectorXd& z) const {
    SymmetricProfile profile;
    for (int i = 0; i < game_.num_teams(); ++i) {
      MixedStrategy x{std::vector<double>(game_.structure().num_actions(i), 0.0)};
      for (std::size_t t = 0; t < support_[i].size(); ++t) {
        x.probs[support_[i][t]] = z[offset_[i] + t];
      }
      profile.strategies.push_back(std::move(x));
    }
    return profile;
  }

  Eigen::VectorXd Pack(const SymmetricProfile& profile) const {
    Eigen::VectorXd z(size());
    for (int i = 0; i < game_.num_teams(); ++i) {
      double mass = 0.0;
      for (int a : support_[i]) mass += std::max(0.0, profile[i][a]);
      const double k = static_cast<double>(support_[i].size());
      for (std::size_t t = 0; t < support_[i].size(); ++t) {
        z[offset_[i] + t] = mass > 0.0
                                ? std::max(0.0, profile[i][support_[i][t]]) / mass
                                : 1.0 / k;
      }
    }
    SymmetricProfile x = Unpack(z);
    for (int i = 0; i < game_.num_teams(); ++i) {
      double mean = 0.0;
      for (int a : support_[i]) mean += TeamActionPayoff(game_, i, a, x);
      z[num_probs_ + i] = mean / support_[i].size();
    }
    return z;
  }

  Eigen::VectorXd Residual(const Eigen::VectorXd& z) const {
    SymmetricProfile x = Unpack(z);
    Eigen::VectorXd f(size());
    for (int i = 0; i < game_.num_teams(); ++i) {
      double mass = 0.0;
      for (std::size_t t = 0; t < support_[i].size(); ++t) {
        f[offset_[i] + t] =
            TeamActionPayoff(game_, i, support_[i][t], x) - z[num_probs_ + i];
        mass += z[offset_[i] + t];
      }
      f[num_probs_ + i] = mass - 1.0;
    }
    return f;
  }

  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& z) const {
    SymmetricProfile x = Unpack(z);
    const int m = game_.num_teams();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), size());
    for (int i = 0; i < m; ++i) {
      for (std::size_t t = 0; t < support_[i].size(); ++t) {
        const int row = offset_[i] + static_cast<int>(t);
        for (int j = 0; j < m; ++j) {
          for (std::size_t s = 0; s < support_[j].size(); ++s) {
            jac(row, offset_[j] + s) = TeamActionPayoffPartial(
                game_, i, support_[i][t], x, j, support_[j][s]);
          }
        }
        jac(row, num_probs_ + i) = -1.0;
        jac(num_probs_ + i, row) = 1.0;
      }
    }
    return jac;
  }

 private:
  const PayoffTensor& game_;
  const Support& support_;
  std::vector<int> offset_;
  int num_probs_ = 0;
};

bool AllFinite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Clips tiny negative probabilities and renormalizes. Returns false if any
// entry is below -tolerance.
bool Sanitize(SymmetricProfile& profile, double tolerance) {
  for (MixedStrategy& x : profile.strategies) {
    double total = 0.0;
    for (double& p : x.probs) {
      if (!std::isfinite(p) || p < -tolerance) return false;
      p = std::max(0.0, p);
      total += p;
    }
    if (total <= 0.0) return false;
    for (double& p : x.probs) p /= total;
  }
  return true;
}

SymmetricProfile RandomProfile(const TeamStructure& s, Rng& rng) {
  SymmetricProfile profile;
  for (int i = 0; i < s.num_teams(); ++i) {
    profile.strategies.push_back({UniformSimplexPoint(rng, s.num_actions(i))});
  }
  return profile;
}

bool IsPureSupport(const Support& support) {
  return std::all_of(support.begin(), support.end(),
                     [](const auto& s) { return s.size() == 1; });
}

Support ApproximateSupport(const SymmetricProfile& profile) {
  Support support(profile.num_teams());
  for (int i = 0; i < profile.num_teams(); ++i) {
    const auto& p = profile[i].probs;
    for (int a = 0; a < profile[i].size(); ++a) {
      if (p[a] > kPolishSupportThreshold) support[i].push_back(a);
    }
    if (support[i].empty()) {
      support[i].push_back(static_cast<int>(
          std::max_element(p.begin(), p.end()) - p.begin()));
    }
  }
  return support;
}

std::optional<EquilibriumSolution> Accept(const PayoffTensor& game,
                                          SymmetricProfile profile,
                                          const SolverOptions& opts,
                                          const std::string& method) {
  if (!Sanitize(profile, opts.tolerance)) return std::nullopt;
  if (NashResidual(game, profile) > opts.tolerance) return std::nullopt;
  return MakeSolution(game, profile, method);
}

// Damped improvement-map iteration from several starts, averaging the last
// iterates and polishing promising points with a support solve.
std::optional<EquilibriumSolution> FixedPointSearch(const PayoffTensor& game,
                                                    const SolverOptions& opts,
                                                    Rng& rng) {
  const int starts = std::max(1, opts.multistarts);
  const int per_start = std::max(kAveragingWindow,
                                 opts.max_fixed_point_iters / starts);
  const TeamStructure& s = game.structure();
  for (int start = 0; start < starts; ++start) {
    SymmetricProfile x = start == 0 ? UniformProfile(s) : RandomProfile(s, rng);
    std::deque<SymmetricProfile> window;
    for (int it = 1; it <= per_start; ++it) {
      SymmetricProfile fx = NashImprovementMap(game, x);
      for (int i = 0; i < s.num_teams(); ++i) {
        for (int a = 0; a < s.num_actions(i); ++a) {
          x[i].probs[a] = (1.0 - kFixedPointDamping) * x[i][a] +
                          kFixedPointDamping * fx[i][a];
        }
      }
      window.push_back(x);
      if (static_cast<int>(window.size()) > kAveragingWindow) window.pop_front();
      if (it % kAveragingWindow != 0) continue;

      SymmetricProfile average = x;
      for (int i = 0; i < s.num_teams(); ++i) {
        for (int a = 0; a < s.num_actions(i); ++a) {
          double sum = 0.0;
          for (const auto& w : window) sum += w[i][a];
          average[i].probs[a] = sum / window.size();
        }
      }
      for (const SymmetricProfile* candidate : {&x, &average}) {
        if (auto sol = Accept(game, *candidate, opts, "fixed_point")) return sol;
        if (auto sol = SolveOnSupport(game, ApproximateSupport(*candidate),
                                      *candidate, opts)) {
          sol->method = "fixed_point";
          return sol;
        }
      }
    }
  }
  return std::nullopt;
}

void AddDistinct(std::vector<EquilibriumSolution>& found,
                 EquilibriumSolution candidate) {
  for (const auto& existing : found) {
    if (MaxAbsDifference(existing.profile, candidate.profile) <= kDedupDistance) {
      return;
    }
  }
  found.push_back(std::move(candidate));
}

}  // namespace

void SolverOptions::Validate() const {
  if (!(tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "solver tolerance must be positive");
  }
  if (max_newton_iters < 1 || max_fixed_point_iters < 0 || multistarts < 0) {
    throw Error(ErrorCode::kInvalidInput, "solver budgets must be non-negative");
  }
}

std::vector<std::vector<double>> DeviationGains(const PayoffTensor& game,
                                                const SymmetricProfile& profile) {
  profile.CheckShape(game.structure());
  std::vector<std::vector<double>> gains(game.num_teams());
  for (int i = 0; i < game.num_teams(); ++i) {
    gains[i] = TeamActionPayoffs(game, i, profile);
    double mixed = 0.0;
    for (int a = 0; a < profile[i].size(); ++a) mixed += profile[i][a] * gains[i][a];
    for (double& g : gains[i]) g -= mixed;
  }
  return gains;
}

double NashResidual(const PayoffTensor& game, const SymmetricProfile& profile) {
  double residual = 0.0;
  for (const auto& row : DeviationGains(game, profile)) {
    for (double g : row) residual = std::max(residual, g);
  }
  return residual;
}

bool VerifyEquilibrium(const PayoffTensor& game,
                       const SymmetricProfile& profile, double eps) {
  if (eps < 0.0) throw Error(ErrorCode::kInvalidInput, "eps must be >= 0");
  return NashResidual(game, profile) <= eps;
}

SymmetricProfile NashImprovementMap(const PayoffTensor& game,
                                    const SymmetricProfile& profile) {
  auto gains = DeviationGains(game, profile);
  SymmetricProfile next = profile;
  for (int i = 0; i < game.num_teams(); ++i) {
    double total = 0.0;
    for (double g : gains[i]) total += std::max(0.0, g);
    for (int a = 0; a < profile[i].size(); ++a) {
      next[i].probs[a] = (profile[i][a] + std::max(0.0, gains[i][a])) / (1.0 + total);
    }
  }
  return next;
}

EquilibriumSolution MakeSolution(const PayoffTensor& game,
                                 const SymmetricProfile& profile,
                                 std::string method,
                                 double support_threshold) {
  EquilibriumSolution sol;
  sol.profile = profile;
  sol.method = std::move(method);
  const int m = game.num_teams();
  sol.values.resize(m);
  sol.slacks.resize(m);
  sol.support.resize(m);
  for (int i = 0; i < m; ++i) {
    auto payoffs = TeamActionPayoffs(game, i, profile);
    double value = 0.0;
    for (int a = 0; a < profile[i].size(); ++a) value += profile[i][a] * payoffs[a];
    sol.values[i] = value;
    for (int a = 0; a < profile[i].size(); ++a) {
      double slack = value - payoffs[a];
      sol.slacks[i].push_back(slack);
      sol.residual = std::max(sol.residual, -slack);
      sol.complementarity =
          std::max(sol.complementarity, profile[i][a] * std::abs(slack));
      sol.support[i].push_back(profile[i][a] > support_threshold);
    }
  }
  return sol;
}

bool IsDegenerateGame(const PayoffTensor& game) {
  for (int i = 0; i < game.num_teams(); ++i) {
    const double first = game.payoff(0, i);
    for (std::int64_t e = 1; e < game.num_entries(); ++e) {
      if (game.payoff(e, i) != first) return false;
    }
  }
  return true;
}

std::vector<Support> CandidateSupports(const TeamStructure& structure) {
  const int m = structure.num_teams();
  std::vector<std::vector<std::vector<int>>> per_team(m);
  for (int i = 0; i < m; ++i) {
    const int k = structure.num_actions(i);
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      std::vector<int> subset;
      for (int a = 0; a < k; ++a) {
        if (mask & (1u << a)) subset.push_back(a);
      }
      per_team[i].push_back(std::move(subset));
    }
  }
  std::vector<Support> out;
  std::vector<std::size_t> idx(m, 0);
  while (true) {
    Support s(m);
    for (int i = 0; i < m; ++i) s[i] = per_team[i][idx[i]];
    out.push_back(std::move(s));
    int i = m - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < per_team[i].size()) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  auto total = [](const Support& s) {
    std::size_t n = 0;
    for (const auto& t : s) n += t.size();
    return n;
  };
  std::stable_sort(out.begin(), out.end(), [&](const Support& a, const Support& b) {
    const std::size_t ta = total(a), tb = total(b);
    if (ta != tb) return ta < tb;
    return a < b;
  });
  return out;
}

std::optional<EquilibriumSolution> SolveOnSupport(const PayoffTensor& game,
                                                  const Support& support,
                                                  const SymmetricProfile& start,
                                                  const SolverOptions& opts) {
  SupportSystem system(game, support);
  Eigen::VectorXd z = system.Pack(start);
  Eigen::VectorXd f = system.Residual(z);
  double norm = f.lpNorm<Eigen::Infinity>();
  const double converged = 1e-14 * PayoffScale(game);

  for (int iter = 0; iter < opts.max_newton_iters && norm > converged; ++iter) {
    Eigen::MatrixXd jac = system.Jacobian(z);
    // Minimum-norm step keeps rank-deficient systems (indifferent teams)
    // solvable instead of abandoning the support outright.
    Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
    if (!AllFinite(step)) return std::nullopt;
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= kMaxStepHalvings; ++h, t *= 0.5) {
      Eigen::VectorXd trial = z + t * step;
      Eigen::VectorXd ft = system.Residual(trial);
      double trial_norm = ft.lpNorm<Eigen::Infinity>();
      if (AllFinite(ft) && trial_norm < norm) {
        z = std::move(trial);
        f = std::move(ft);
        norm = trial_norm;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (norm > opts.tolerance) return std::nullopt;
  return Accept(game, system.Unpack(z), opts, "support");
}

EquilibriumSolution SolveSymmetricNe(const PayoffTensor& game,
                                     const SolverOptions& opts) {
  opts.Validate();
  const TeamStructure& s = game.structure();
  if (IsDegenerateGame(game)) {
    return MakeSolution(game, UniformProfile(s), "degenerate");
  }
  const auto supports = CandidateSupports(s);
  for (const Support& support : supports) {
    if (!opts.support_scan) break;
    if (auto sol = SolveOnSupport(game, support, UniformProfile(s), opts)) {
      return *sol;
    }
  }
  Rng rng(DeriveSeed(opts.seed, 1));
  if (auto sol = FixedPointSearch(game, opts, rng)) return *sol;
  for (int start = 0; start < opts.multistarts; ++start) {
    SymmetricProfile x = RandomProfile(s, rng);
    for (const Support& support : supports) {
      if (IsPureSupport(support)) continue;
      if (auto sol = SolveOnSupport(game, support, x, opts)) return *sol;
    }
  }
  throw Error(ErrorCode::kNoEquilibriumFound,
              "no team-symmetric equilibrium within budget at tolerance " +
                  std::to_string(opts.tolerance));
}

std::vector<EquilibriumSolution> EnumerateSymmetricNe(const PayoffTensor& game,
                                                      const SolverOptions& opts) {
  opts.Validate();
  const TeamStructure& s = game.structure();
  if (IsDegenerateGame(game)) {
    return {MakeSolution(game, UniformProfile(s), "degenerate")};
  }
  std::vector<EquilibriumSolution> found;
  Rng rng(DeriveSeed(opts.seed, 2));
  const int random_starts = std::min(opts.multistarts, 8);
  for (const Support& support : CandidateSupports(s)) {
    if (auto sol = SolveOnSupport(game, support, UniformProfile(s), opts)) {
      AddDistinct(found, std::move(*sol));
    }
    if (IsPureSupport(support)) continue;
    for (int start = 0; start < random_starts; ++start) {
      if (auto sol = SolveOnSupport(game, support, RandomProfile(s, rng), opts)) {
        AddDistinct(found, std::move(*sol));
      }
    }
  }
  if (found.empty()) found.push_back(SolveSymmetricNe(game, opts));
  return found;
}

nlohmann::json ProfileToJson(const SymmetricProfile& profile) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : profile.strategies) out.push_back(x.probs);
  return out;
}

nlohmann::json SolutionToJson(const EquilibriumSolution& solution) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& row : solution.support) {
    support.push_back(std::vector<bool>(row.begin(), row.end()));
  }
  return {{"profile", ProfileToJson(solution.profile)},
          {"values", solution.values},
          {"slacks", solution.slacks},
          {"residual", solution.residual},
          {"complementarity", solution.complementarity},
          {"support", support},
          {"method", solution.method}};
}

}  // namespace teamsym
