#include "vff/gridworld.hpp"

#include <nlohmann/json.hpp>

#include "vff/errors.hpp"

namespace vff {

void GridConfig::validate() const {
  if (width < 3 || height < 3)
    throw ConfigError("gridworld: grid must be at least 3x3 to have interior cells");
  if (n_agents < 2) throw ConfigError("gridworld: need at least 2 agents");
  if (episode_limit < 1) throw ConfigError("gridworld: episode_limit must be >= 1");
  const int interior = (width - 2) * (height - 2);
  if (interior < n_prey())
    throw ConfigError("gridworld: not enough interior cells to place prey");
}

int GridConfig::observation_size() const {
  // own position + [dx, dy, visible] per other entity + time
  const int entities = (n_agents - 1) + n_prey();
  return 2 + 3 * entities + 1;
}

ResetResult grid_reset(const GridConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return grid_reset(cfg, rng);
}

ResetResult grid_reset(const GridConfig& cfg, Rng& rng) {
  cfg.validate();
  GridState s;
  s.agents.resize(static_cast<std::size_t>(cfg.n_agents));
  // fixed opposite corners, alternating for more than two agents
  const std::vector<Cell> corners = {{0, 0},
                                     {cfg.width - 1, cfg.height - 1},
                                     {cfg.width - 1, 0},
                                     {0, cfg.height - 1}};
  for (int i = 0; i < cfg.n_agents; ++i)
    s.agents[static_cast<std::size_t>(i)] = corners[static_cast<std::size_t>(i) % 4];

  // distinct interior cells for stag + small prey
  std::vector<Cell> chosen;
  while (static_cast<int>(chosen.size()) < cfg.n_prey()) {
    Cell c{1 + rng.uniform_int(cfg.width - 2), 1 + rng.uniform_int(cfg.height - 2)};
    bool dup = false;
    for (const Cell& o : chosen) dup = dup || (o == c);
    if (!dup) chosen.push_back(c);
  }
  s.stag = chosen[0];
  s.small_prey.assign(chosen.begin() + 1, chosen.end());
  s.prey_alive.assign(static_cast<std::size_t>(cfg.n_small_prey), true);
  s.step = 0;

  ResetResult out;
  out.state = s;
  for (int i = 0; i < cfg.n_agents; ++i)
    out.observations.push_back(grid_observe(cfg, s, i));
  return out;
}

namespace {

Cell apply_move(const GridConfig& cfg, Cell c, int action) {
  switch (action) {
    case 0: break;
    case 1: c.y = std::min(cfg.height - 1, c.y + 1); break;
    case 2: c.y = std::max(0, c.y - 1); break;
    case 3: c.x = std::max(0, c.x - 1); break;
    case 4: c.x = std::min(cfg.width - 1, c.x + 1); break;
    default:
      throw InvalidActionError("gridworld: action index out of range");
  }
  return c;
}

}  // namespace

StepResult grid_step(const GridConfig& cfg, const GridState& state,
                     const JointAction& joint_action) {
  if (joint_action.size() != cfg.n_agents)
    throw InvalidActionError("gridworld: wrong joint action arity");
  StepResult out;
  out.state = state;
  GridState& s = out.state;

  for (int i = 0; i < cfg.n_agents; ++i)
    s.agents[static_cast<std::size_t>(i)] =
        apply_move(cfg, s.agents[static_cast<std::size_t>(i)], joint_action[i]);
  s.step += 1;

  double reward = cfg.step_cost;

  int on_stag = 0;
  for (const Cell& a : s.agents) on_stag += (a == s.stag) ? 1 : 0;
  bool captured = false;
  if (on_stag == cfg.n_agents) {
    reward += cfg.reward_capture;
    captured = true;
  } else if (on_stag > 0) {
    reward += cfg.reward_solo_attempt * on_stag;
  }

  for (std::size_t p = 0; p < s.small_prey.size(); ++p) {
    if (!s.prey_alive[p]) continue;
    bool eaten = false;
    for (const Cell& a : s.agents) eaten = eaten || (a == s.small_prey[p]);
    if (eaten) {
      reward += cfg.reward_small_prey;
      s.prey_alive[p] = false;
    }
  }

  out.reward_ext = reward;
  out.done = captured || s.step >= cfg.episode_limit;
  for (int i = 0; i < cfg.n_agents; ++i)
    out.observations.push_back(grid_observe(cfg, s, i));
  return out;
}

Vec grid_observe(const GridConfig& cfg, const GridState& state, int agent) {
  Vec obs = Vec::Zero(cfg.observation_size());
  const Cell me = state.agents[static_cast<std::size_t>(agent)];
  long k = 0;
  obs[k++] = static_cast<double>(me.x) / (cfg.width - 1);
  obs[k++] = static_cast<double>(me.y) / (cfg.height - 1);

  auto emit_entity = [&](const Cell& c, bool alive) {
    const int dx = c.x - me.x, dy = c.y - me.y;
    const bool visible =
        alive && std::abs(dx) <= cfg.obs_radius && std::abs(dy) <= cfg.obs_radius;
    if (visible) {
      obs[k++] = static_cast<double>(dx) / cfg.obs_radius;
      obs[k++] = static_cast<double>(dy) / cfg.obs_radius;
      obs[k++] = 1.0;
    } else {
      k += 3;
    }
  };
  for (int i = 0; i < cfg.n_agents; ++i)
    if (i != agent) emit_entity(state.agents[static_cast<std::size_t>(i)], true);
  emit_entity(state.stag, true);
  for (std::size_t p = 0; p < state.small_prey.size(); ++p)
    emit_entity(state.small_prey[p], state.prey_alive[p]);

  obs[k++] = static_cast<double>(state.step) / cfg.episode_limit;
  return obs;
}

Vec global_state_vector(const GridConfig& cfg, const GridState& state) {
  Vec s = Vec::Zero(cfg.state_size());
  long k = 0;
  for (const Cell& a : state.agents) {
    s[k++] = static_cast<double>(a.x) / (cfg.width - 1);
    s[k++] = static_cast<double>(a.y) / (cfg.height - 1);
  }
  s[k++] = static_cast<double>(state.stag.x) / (cfg.width - 1);
  s[k++] = static_cast<double>(state.stag.y) / (cfg.height - 1);
  for (std::size_t p = 0; p < state.small_prey.size(); ++p) {
    if (state.prey_alive[p]) {
      s[k++] = static_cast<double>(state.small_prey[p].x) / (cfg.width - 1);
      s[k++] = static_cast<double>(state.small_prey[p].y) / (cfg.height - 1);
    } else {
      s[k++] = -1.0;
      s[k++] = -1.0;
    }
  }
  s[k++] = static_cast<double>(state.step) / cfg.episode_limit;
  return s;
}

void to_json(nlohmann::json& j, const GridState& s) {
  nlohmann::json agents = nlohmann::json::array();
  for (const Cell& a : s.agents) agents.push_back({a.x, a.y});
  nlohmann::json prey = nlohmann::json::array();
  for (std::size_t p = 0; p < s.small_prey.size(); ++p)
    prey.push_back({{"pos", {s.small_prey[p].x, s.small_prey[p].y}},
                    {"alive", static_cast<bool>(s.prey_alive[p])}});
  j = nlohmann::json{{"agents", std::move(agents)},
                     {"stag", {s.stag.x, s.stag.y}},
                     {"small_prey", std::move(prey)},
                     {"step", s.step}};
}

}  // namespace vff
