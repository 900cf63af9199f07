#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>

#include "vff/adam.hpp"
#include "vff/game.hpp"
#include "vff/gridworld.hpp"
#include "vff/mixer.hpp"
#include "vff/mlp.hpp"
#include "vff/rnd.hpp"
#include "vff/types.hpp"

namespace vff {

enum class TargetKind { kQLearning, kSarsa, kTdLambda };

const char* to_string(TargetKind k);
TargetKind target_kind_from_string(const std::string& s);

struct EpsSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t anneal_steps = 50000;

  double at(std::int64_t step) const {
    if (anneal_steps <= 0 || step >= anneal_steps) return end;
    if (step <= 0) return start;
    const double f = static_cast<double>(step) / static_cast<double>(anneal_steps);
    return start + f * (end - start);
  }
};

struct TrainConfig {
  double lr_agent = 1e-3;
  double lr_rnd = 5e-4;
  int buffer_capacity = 5000;  // episodes
  int batch_episodes = 128;
  double gamma = 0.99;
  double lambda = 0.8;
  int target_update_period = 200;  // train steps between target syncs
  EpsSchedule eps;
  BetaSchedule beta;
  TargetKind target_kind = TargetKind::kSarsa;
  std::uint64_t seed = 1;
  std::int64_t total_steps = 20000;  // environment steps
  int mixer_hidden = 32;
  // matrix-game specifics
  double q_init_std = 0.5;
  int metrics_table_stride = 500;
  // gridworld specifics
  int agent_hidden = 64;
  int obs_stack = 2;
  int episodes_per_update = 1;
};

struct Transition {
  Vec state;       // global state s_t
  Vec next_state;  // s_{t+1}; kept for intrinsic rewards and bootstrapping
  std::vector<Vec> observations;  // per-agent network inputs at t
  JointAction joint_action;
  double reward_ext = 0.0;
  bool done = false;
};

struct Trajectory {
  std::vector<Transition> steps;

  std::size_t length() const { return steps.size(); }
  // Executed next joint action for SARSA bootstrapping; only valid when
  // steps[t] is not terminal.
  const JointAction& next_action(std::size_t t) const { return steps[t + 1].joint_action; }
  void validate() const;  // at most one terminal transition, and it is last
};

// FIFO episode replay.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void push(Trajectory traj);
  std::vector<const Trajectory*> sample(Rng& rng, int k) const;
  int size() const { return static_cast<int>(store_.size()); }
  int capacity() const { return capacity_; }
  const Trajectory& at(int i) const { return store_[static_cast<std::size_t>(i)]; }

 private:
  int capacity_;
  std::deque<Trajectory> store_;
};

// Bootstrap evaluations bound to the (frozen) target model.
struct TargetEvaluator {
  // Q_tot at trajectory step t's (state, observations, executed action)
  std::function<double(const Trajectory&, std::size_t)> q_tot_at;
  // exhaustive max over joint actions at trajectory step t's state
  std::function<double(const Trajectory&, std::size_t)> max_q_tot_at;
};

// One target per step. Rewards default to the stored extrinsic rewards; the
// caller passes totals (extrinsic + beta * intrinsic) when RND is active.
std::vector<double> td_targets(const Trajectory& traj, const TrainConfig& cfg,
                               const TargetEvaluator& target_model,
                               const std::vector<double>* rewards = nullptr);

// ----------------------------------------------------------------------------
// Matrix-game training: tabular agents (q is the analysis object) + mixer.

struct MatrixModel {
  std::vector<int> action_counts;
  MixerMode mode = MixerMode::kUnconstrained;
  Vec state;  // constant [1]
  QVector q;
  MixerParams mixer;
  QVector q_target;
  MixerParams mixer_target;
  AdamOptimizer opt;
  std::int64_t train_steps = 0;

  double q_tot(const JointAction& a, bool use_target = false) const;
  Mat q_tot_table(bool use_target = false) const;  // 2-agent games
};

MatrixModel make_matrix_model(const GameSpec& game, MixerMode mode,
                              const TrainConfig& cfg);

// One optimizer step on the mean squared Bellman error over all steps of the
// batch; targets come from the frozen target copies; syncs targets every
// cfg.target_update_period steps. Returns the pre-step loss.
double matrix_train_step(MatrixModel& model, const GameSpec& game,
                         const std::vector<const Trajectory*>& batch,
                         const TrainConfig& cfg);

struct MatrixMetrics {
  std::vector<double> losses;            // per train step
  std::vector<JointAction> greedy;       // per env step
  std::vector<std::pair<std::int64_t, Mat>> table_snapshots;
  Mat final_table;
  QVector final_q;
};

std::pair<MatrixModel, MatrixMetrics> run_matrix_training(const GameSpec& game,
                                                          const TrainConfig& cfg,
                                                          MixerMode mode);

// ----------------------------------------------------------------------------
// Gridworld training per the episodic loop: collect under epsilon-greedy,
// replay trajectories, TD(lambda)/SARSA/Q-learning targets, optional RND.

struct GridModel {
  GridConfig env;
  MixerMode mode = MixerMode::kUnconstrained;
  std::vector<Mlp> agents;
  MixerParams mixer;
  std::vector<Mlp> agents_target;
  MixerParams mixer_target;
  AdamOptimizer opt;
  std::int64_t train_steps = 0;
  int input_dim = 0;

  Vec agent_input(const std::deque<Vec>& obs_window, int prev_action) const;
};

GridModel make_grid_model(const GridConfig& env, MixerMode mode,
                          const TrainConfig& cfg);

struct GridEpisodeRecord {
  std::int64_t episode = 0;
  std::int64_t env_steps = 0;  // cumulative env steps after the episode
  double return_ext = 0.0;
  bool success = false;
  double intrinsic_mean = 0.0;
  double eps = 0.0;
  double beta = 0.0;
  double loss = 0.0;  // most recent train loss
};

struct GridMetrics {
  std::vector<GridEpisodeRecord> episodes;

  double final_success_rate(int window = 100) const;
};

std::pair<GridModel, GridMetrics> run_gridworld_training(const GridConfig& env,
                                                         const TrainConfig& cfg,
                                                         MixerMode mode,
                                                         bool rnd_enabled);

void to_json(nlohmann::json& j, const MatrixModel& m);

}  // namespace vff
