#include "vff/game.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "vff/rng.hpp"

namespace vff {

PayoffTensor::PayoffTensor(std::vector<int> shape, Vec values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  strides_.resize(shape_.size());
  long acc = 1;
  for (int i = static_cast<int>(shape_.size()) - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = acc;
    acc *= shape_[static_cast<std::size_t>(i)];
  }
  if (values_.size() != acc)
    throw DimensionError("PayoffTensor: value count does not match shape");
  if (!values_.allFinite())
    throw ParameterError("PayoffTensor: entries must be finite");
}

long PayoffTensor::flat_index(const JointAction& a) const {
  if (a.size() != static_cast<int>(shape_.size()))
    throw InvalidActionError("PayoffTensor: joint action has wrong arity");
  long idx = 0;
  for (int i = 0; i < a.size(); ++i) {
    const int ai = a[i];
    if (ai < 0 || ai >= shape_[static_cast<std::size_t>(i)])
      throw InvalidActionError("PayoffTensor: action index out of range");
    idx += ai * strides_[static_cast<std::size_t>(i)];
  }
  return idx;
}

double payoff(const GameSpec& game, const JointAction& a) {
  return game.payoffs.at(a);
}

JointAction optimal_joint_action(const GameSpec& game) {
  JointAction best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool tied = false;
  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    const double v = game.payoffs.at(a);
    if (v > best_value) {
      best_value = v;
      best = a;
      tied = false;
    } else if (v == best_value) {
      tied = true;
    }
  });
  if (tied)
    throw DegenerateGameError("optimal_joint_action: maximum payoff is tied in game '" +
                              game.name + "'");
  return best;
}

GameSpec make_game(const std::string& name) {
  if (name == "game_a") {
    Vec v(9);
    v << 12, -12, -12, -12, 0, 0, -12, 0, 0;
    return GameSpec{name, {3, 3}, PayoffTensor({3, 3}, v)};
  }
  if (name == "game_b") {
    Vec v(9);
    v << 12, 0, 10, 0, 0, 10, 10, 10, 10;
    return GameSpec{name, {3, 3}, PayoffTensor({3, 3}, v)};
  }
  throw NotFoundError("make_game: unknown game '" + name + "'");
}

GameSpec random_game(std::uint64_t seed, int n_agents, int n_actions, double margin) {
  if (n_agents < 1) throw ParameterError("random_game: n_agents must be >= 1");
  if (n_actions < 2) throw ParameterError("random_game: n_actions must be >= 2");
  if (!(margin > 0)) throw ParameterError("random_game: margin must be > 0");

  constexpr int kBudget = 10000;
  Rng rng(seed);
  std::vector<int> counts(static_cast<std::size_t>(n_agents), n_actions);
  long total = joint_action_count(counts);

  for (int attempt = 0; attempt < kBudget; ++attempt) {
    Vec v(total);
    for (long i = 0; i < total; ++i) v[i] = rng.uniform(-10.0, 10.0);
    double top = -1e30, second = -1e30;
    for (long i = 0; i < total; ++i) {
      if (v[i] > top) {
        second = top;
        top = v[i];
      } else if (v[i] > second) {
        second = v[i];
      }
    }
    if (top - second >= margin) {
      GameSpec g;
      g.name = "random_" + std::to_string(seed);
      g.action_counts = counts;
      g.payoffs = PayoffTensor(counts, std::move(v));
      return g;
    }
  }
  throw GenerationFailureError(
      "random_game: rejection budget exhausted (margin too demanding)");
}

void to_json(nlohmann::json& j, const GameSpec& game) {
  // payoffs as nested arrays, outermost dimension = agent 0
  std::function<nlohmann::json(int, long)> build = [&](int dim, long base) {
    nlohmann::json arr = nlohmann::json::array();
    const auto& shape = game.payoffs.shape();
    long stride = 1;
    for (std::size_t k = static_cast<std::size_t>(dim) + 1; k < shape.size(); ++k)
      stride *= shape[k];
    for (int i = 0; i < shape[static_cast<std::size_t>(dim)]; ++i) {
      if (dim + 1 == static_cast<int>(shape.size()))
        arr.push_back(game.payoffs.values()[base + i]);
      else
        arr.push_back(build(dim + 1, base + i * stride));
    }
    return arr;
  };
  j = nlohmann::json{{"name", game.name},
                     {"n_agents", game.n_agents()},
                     {"action_counts", game.action_counts},
                     {"payoffs", build(0, 0)}};
}

void from_json(const nlohmann::json& j, GameSpec& game) {
  game.name = j.at("name").get<std::string>();
  game.action_counts = j.at("action_counts").get<std::vector<int>>();
  long total = joint_action_count(game.action_counts);
  Vec v(total);
  long pos = 0;
  std::function<void(const nlohmann::json&)> flatten = [&](const nlohmann::json& node) {
    if (node.is_array()) {
      for (const auto& c : node) flatten(c);
    } else {
      v[pos++] = node.get<double>();
    }
  };
  flatten(j.at("payoffs"));
  if (pos != total) throw DimensionError("GameSpec: payoff array has wrong size");
  game.payoffs = PayoffTensor(game.action_counts, std::move(v));
}

}  // namespace vff
