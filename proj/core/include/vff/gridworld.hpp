#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "vff/rng.hpp"
#include "vff/types.hpp"

namespace vff {

// Coordinated-capture gridworld: two agents must stand on the stag cell in
// the same step (+12, episode ends); a lone agent on the stag pays -2 per
// attempt; stepping on a small prey collects +1 once. The one-step payoff
// structure next to the stag mirrors the reference 3x3 coordination table.
struct GridConfig {
  int width = 6;
  int height = 6;
  int n_agents = 2;
  int episode_limit = 30;
  int n_small_prey = 2;
  int obs_radius = 2;
  double reward_capture = 12.0;
  double reward_solo_attempt = -2.0;
  double reward_small_prey = 1.0;
  double step_cost = 0.0;

  int n_prey() const { return 1 + n_small_prey; }
  void validate() const;
  int observation_size() const;
  int state_size() const { return 2 * (n_agents + n_prey()) + 1; }
};

struct Cell {
  int x = 0, y = 0;
  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
};

struct GridState {
  std::vector<Cell> agents;
  Cell stag;
  std::vector<Cell> small_prey;
  std::vector<bool> prey_alive;
  int step = 0;
};

// Actions: 0 stay, 1 up, 2 down, 3 left, 4 right.
inline constexpr int kGridActionCount = 5;

struct ResetResult {
  GridState state;
  std::vector<Vec> observations;
};

struct StepResult {
  GridState state;
  std::vector<Vec> observations;
  double reward_ext = 0.0;
  bool done = false;
};

// Agents start at fixed opposite corners; prey cells are sampled uniformly
// from distinct interior cells.
ResetResult grid_reset(const GridConfig& cfg, std::uint64_t seed);
ResetResult grid_reset(const GridConfig& cfg, Rng& rng);

StepResult grid_step(const GridConfig& cfg, const GridState& state,
                     const JointAction& joint_action);

Vec grid_observe(const GridConfig& cfg, const GridState& state, int agent);

// Positions normalized to [0,1] plus the normalized step counter; consumed
// prey report -1 coordinates. Feeds the mixer hypernetwork and RND.
Vec global_state_vector(const GridConfig& cfg, const GridState& state);

void to_json(nlohmann::json& j, const GridState& s);

}  // namespace vff
