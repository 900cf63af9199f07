#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "vff/types.hpp"

namespace vff {

// Dense real reward tensor over joint actions.
class PayoffTensor {
 public:
  PayoffTensor() = default;
  PayoffTensor(std::vector<int> shape, Vec values);

  double at(const JointAction& a) const { return values_[flat_index(a)]; }
  double& at(const JointAction& a) { return values_[flat_index(a)]; }

  const std::vector<int>& shape() const { return shape_; }
  const Vec& values() const { return values_; }
  long size() const { return values_.size(); }

  long flat_index(const JointAction& a) const;

 private:
  std::vector<int> shape_;
  std::vector<long> strides_;
  Vec values_;
};

// A single-state cooperative matrix game with a unique global optimum.
struct GameSpec {
  std::string name;
  std::vector<int> action_counts;
  PayoffTensor payoffs;

  int n_agents() const { return static_cast<int>(action_counts.size()); }
};

double payoff(const GameSpec& game, const JointAction& a);

// Exhaustive argmax; throws DegenerateGameError when the maximum is tied.
JointAction optimal_joint_action(const GameSpec& game);

// Built-in games: "game_a" and "game_b" (the two 3x3 reference tables).
GameSpec make_game(const std::string& name);

// Uniform payoffs from [-10, 10], rejection-sampled until the optimum
// leads the runner-up by at least `margin`. Pure function of its arguments.
GameSpec random_game(std::uint64_t seed, int n_agents, int n_actions,
                     double margin = 0.5);

void to_json(nlohmann::json& j, const GameSpec& game);
void from_json(const nlohmann::json& j, GameSpec& game);

}  // namespace vff
