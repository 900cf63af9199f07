#include "vff/training.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "vff/errors.hpp"
#include "vff/policy.hpp"

namespace vff {

const char* to_string(TargetKind k) {
  switch (k) {
    case TargetKind::kQLearning: return "qlearning";
    case TargetKind::kSarsa: return "sarsa";
    case TargetKind::kTdLambda: return "tdlambda";
  }
  return "?";
}

TargetKind target_kind_from_string(const std::string& s) {
  if (s == "qlearning") return TargetKind::kQLearning;
  if (s == "sarsa") return TargetKind::kSarsa;
  if (s == "tdlambda") return TargetKind::kTdLambda;
  throw ParameterError("unknown target kind '" + s + "'");
}

void Trajectory::validate() const {
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (steps[t].done && t + 1 != steps.size())
      throw ParameterError("Trajectory: terminal transition must be last");
  }
}

void ReplayBuffer::push(Trajectory traj) {
  traj.validate();
  store_.push_back(std::move(traj));
  while (static_cast<int>(store_.size()) > capacity_) store_.pop_front();
}

std::vector<const Trajectory*> ReplayBuffer::sample(Rng& rng, int k) const {
  if (store_.empty()) throw PreconditionError("ReplayBuffer::sample: buffer empty");
  std::vector<const Trajectory*> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.push_back(&store_[static_cast<std::size_t>(rng.uniform_int(size()))]);
  return out;
}

std::vector<double> td_targets(const Trajectory& traj, const TrainConfig& cfg,
                               const TargetEvaluator& target_model,
                               const std::vector<double>* rewards) {
  if (traj.steps.empty()) throw PreconditionError("td_targets: empty trajectory");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
    throw ParameterError("td_targets: lambda must lie in [0, 1]");
  const std::size_t len = traj.length();
  auto reward_at = [&](std::size_t t) {
    return rewards ? (*rewards)[t] : traj.steps[t].reward_ext;
  };
  const double gamma = cfg.gamma;
  std::vector<double> targets(len, 0.0);

  switch (cfg.target_kind) {
    case TargetKind::kQLearning: {
      for (std::size_t t = 0; t < len; ++t) {
        double y = reward_at(t);
        if (!traj.steps[t].done)
          y += gamma * target_model.max_q_tot_at(traj, t + 1);
        targets[t] = y;
      }
      return targets;
    }
    case TargetKind::kSarsa: {
      for (std::size_t t = 0; t < len; ++t) {
        double y = reward_at(t);
        if (!traj.steps[t].done)
          y += gamma * target_model.q_tot_at(traj, t + 1);
        targets[t] = y;
      }
      return targets;
    }
    case TargetKind::kTdLambda: {
      const double lambda = cfg.lambda;
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t horizon = len - t;  // n runs 1..horizon
        // n-step returns
        double ret = 0.0, discount = 1.0, y_lambda = 0.0, weight;
        for (std::size_t n = 1; n <= horizon; ++n) {
          ret += discount * reward_at(t + n - 1);
          discount *= gamma;
          double y_n = ret;
          if (!traj.steps[t + n - 1].done)
            y_n += discount * target_model.q_tot_at(traj, t + n);
          if (n < horizon)
            weight = (1.0 - lambda) * std::pow(lambda, static_cast<double>(n - 1));
          else
            weight = std::pow(lambda, static_cast<double>(horizon - 1));
          y_lambda += weight * y_n;
        }
        targets[t] = y_lambda;
      }
      return targets;
    }
  }
  return targets;
}

// ----------------------------------------------------------------------------
// matrix games

double MatrixModel::q_tot(const JointAction& a, bool use_target) const {
  const QVector& qq = use_target ? q_target : q;
  const MixerParams& mp = use_target ? mixer_target : mixer;
  return q_tot_forward(mode, mp, state, qq, a);
}

Mat MatrixModel::q_tot_table(bool use_target) const {
  if (action_counts.size() != 2)
    throw DimensionError("q_tot_table: only 2-agent games render as a matrix");
  Mat t(action_counts[0], action_counts[1]);
  for (int i = 0; i < action_counts[0]; ++i)
    for (int j = 0; j < action_counts[1]; ++j)
      t(i, j) = q_tot(JointAction{i, j}, use_target);
  return t;
}

MatrixModel make_matrix_model(const GameSpec& game, MixerMode mode,
                              const TrainConfig& cfg) {
  MatrixModel m;
  m.action_counts = game.action_counts;
  m.mode = mode;
  m.state = Vec::Ones(1);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Vec q0(QVector(game.action_counts).size());
  for (long i = 0; i < q0.size(); ++i) q0[i] = rng.normal(0, cfg.q_init_std);
  m.q = QVector(game.action_counts, q0);
  m.mixer = MixerParams::random(game.n_agents(), cfg.mixer_hidden, 1, cfg.seed);
  m.q_target = m.q;
  m.mixer_target = m.mixer;
  const long pdim = m.q.size() +
                    (mode == MixerMode::kAdditive ? 0 : m.mixer.param_count());
  m.opt = AdamOptimizer(pdim, cfg.lr_agent);
  return m;
}

double matrix_train_step(MatrixModel& model, const GameSpec& game,
                         const std::vector<const Trajectory*>& batch,
                         const TrainConfig& cfg) {
  TargetEvaluator eval;
  eval.q_tot_at = [&](const Trajectory& tr, std::size_t t) {
    return model.q_tot(tr.steps[t].joint_action, /*use_target=*/true);
  };
  eval.max_q_tot_at = [&](const Trajectory&, std::size_t) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_joint_action(model.action_counts, [&](const JointAction& a) {
      best = std::max(best, model.q_tot(a, /*use_target=*/true));
    });
    return best;
  };

  const long qd = model.q.size();
  const long pd = model.mode == MixerMode::kAdditive ? 0 : model.mixer.param_count();
  Vec grad = Vec::Zero(qd + pd);
  double loss = 0.0;
  long count = 0;
  for (const Trajectory* tr : batch) {
    const std::vector<double> ys = td_targets(*tr, cfg, eval);
    for (std::size_t t = 0; t < tr->length(); ++t) {
      QTotEval ev = q_tot_gradients(model.mode, model.mixer, model.state, model.q,
                                    tr->steps[t].joint_action);
      const double err = ev.value - ys[t];
      loss += err * err;
      grad.head(qd) += 2.0 * err * ev.grad_q;
      if (pd > 0) grad.tail(pd) += 2.0 * err * ev.grad_params;
      ++count;
    }
  }
  loss /= static_cast<double>(count);
  grad /= static_cast<double>(count);
  if (!std::isfinite(loss))
    throw TrainingDivergenceError("matrix_train_step: non-finite loss at step " +
                                  std::to_string(model.train_steps));

  if (cfg.lr_agent != 0.0) {
    Vec params(qd + pd);
    params.head(qd) = model.q.flat();
    if (pd > 0) params.tail(pd) = model.mixer.pack();
    model.opt.step(params, grad);
    model.q.flat() = params.head(qd);
    if (pd > 0) model.mixer.unpack(params.tail(pd));
  }

  model.train_steps += 1;
  if (model.train_steps % cfg.target_update_period == 0) {
    model.q_target = model.q;
    model.mixer_target = model.mixer;
  }
  return loss;
}

std::pair<MatrixModel, MatrixMetrics> run_matrix_training(const GameSpec& game,
                                                          const TrainConfig& cfg,
                                                          MixerMode mode) {
  if (cfg.target_kind == TargetKind::kTdLambda)
    throw ParameterError(
        "run_matrix_training: one-step episodes make TD(lambda) degenerate; "
        "use Sarsa or QLearning");
  MatrixModel model = make_matrix_model(game, mode, cfg);
  MatrixMetrics metrics;
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng act_rng(cfg.seed);
  Rng sample_rng = act_rng.fork(1);
  const Vec unit_state = Vec::Ones(1);

  for (std::int64_t step = 0; step < cfg.total_steps; ++step) {
    const Policy behavior = Policy::epsilon_greedy(cfg.eps.at(step));
    const JointAction a = sample_joint(behavior, model.q, act_rng);
    const double r = payoff(game, a);

    Trajectory traj;
    traj.steps.push_back(Transition{unit_state, unit_state, {}, a, r, true});
    buffer.push(std::move(traj));
    metrics.greedy.push_back(greedy_joint(model.q));

    if (buffer.size() >= cfg.batch_episodes) {
      const auto batch = buffer.sample(sample_rng, cfg.batch_episodes);
      metrics.losses.push_back(matrix_train_step(model, game, batch, cfg));
    }
    if (cfg.metrics_table_stride > 0 && (step + 1) % cfg.metrics_table_stride == 0)
      metrics.table_snapshots.emplace_back(step + 1, model.q_tot_table());
  }
  metrics.final_table = model.q_tot_table();
  metrics.final_q = model.q;
  return {std::move(model), std::move(metrics)};
}

// ----------------------------------------------------------------------------
// gridworld

Vec GridModel::agent_input(const std::deque<Vec>& obs_window, int prev_action) const {
  const int obs_size = env.observation_size();
  const int stack = input_dim >= obs_size ? (input_dim - kGridActionCount) / obs_size : 0;
  Vec in = Vec::Zero(input_dim);
  // oldest first; zero-pad when the episode is younger than the stack
  const int have = static_cast<int>(obs_window.size());
  for (int k = 0; k < std::min(stack, have); ++k) {
    const Vec& o = obs_window[static_cast<std::size_t>(have - 1 - k)];
    in.segment((stack - 1 - k) * obs_size, obs_size) = o;
  }
  if (prev_action >= 0) in[stack * obs_size + prev_action] = 1.0;
  return in;
}

GridModel make_grid_model(const GridConfig& env, MixerMode mode,
                          const TrainConfig& cfg) {
  env.validate();
  GridModel m;
  m.env = env;
  m.mode = mode;
  m.input_dim = env.observation_size() * cfg.obs_stack + kGridActionCount;
  Rng rng(cfg.seed ^ 0xc2b2ae3d27d4eb4fULL);
  for (int i = 0; i < env.n_agents; ++i)
    m.agents.emplace_back(std::vector<int>{m.input_dim, cfg.agent_hidden,
                                           kGridActionCount},
                          rng);
  m.mixer = MixerParams::random(env.n_agents, cfg.mixer_hidden, env.state_size(),
                                cfg.seed ^ 0xa0761d6478bd642fULL);
  m.agents_target = m.agents;
  m.mixer_target = m.mixer;
  long pdim = mode == MixerMode::kAdditive ? 0 : m.mixer.param_count();
  for (const Mlp& a : m.agents) pdim += a.param_count();
  m.opt = AdamOptimizer(pdim, cfg.lr_agent);
  return m;
}

namespace {

// per-batch flattened index of trajectory steps
struct BatchIndex {
  std::vector<const Trajectory*> trajs;
  std::vector<long> offsets;  // row offset of each trajectory
  long total = 0;

  explicit BatchIndex(const std::vector<const Trajectory*>& batch) : trajs(batch) {
    offsets.reserve(batch.size());
    for (const Trajectory* tr : batch) {
      offsets.push_back(total);
      total += static_cast<long>(tr->length());
    }
  }
  long row(std::size_t traj_idx, std::size_t t) const {
    return offsets[traj_idx] + static_cast<long>(t);
  }
};

// mixer forward over selected per-agent values with generated weights cached
// per state row
struct MixerRowEval {
  Vec w1_flat, b1, w2, b2;

  void generate(const MixerParams& p, const Vec& state) {
    w1_flat = p.w1_gen.generate(state);
    b1 = p.b1_gen.generate(state);
    w2 = p.w2_gen.generate(state);
    b2 = p.b2_gen.generate(state);
  }

  double forward(MixerMode mode, int hidden, int n, const Vec& u) const {
    if (mode == MixerMode::kAdditive) return u.sum();
    Eigen::Map<const Mat> w1(w1_flat.data(), hidden, n);
    Vec z = mode == MixerMode::kMonotonic ? Vec(w1.cwiseAbs() * u + b1)
                                          : Vec(w1 * u + b1);
    double out = b2[0];
    for (int r = 0; r < hidden; ++r) {
      const double h = z[r] > 0 ? z[r] : std::expm1(z[r]);
      out += (mode == MixerMode::kMonotonic ? std::abs(w2[r]) : w2[r]) * h;
    }
    return out;
  }
};

}  // namespace

namespace detail {

// One optimizer update over a trajectory batch. Exposed to the unit tests via
// this namespace; the public entry point is run_gridworld_training.
double grid_train_step(GridModel& model, const std::vector<const Trajectory*>& batch,
                       const TrainConfig& cfg, RndPair* rnd, std::int64_t env_steps_now) {
  const int n_agents = model.env.n_agents;
  const int n_act = kGridActionCount;
  BatchIndex index(batch);
  const long m_rows = index.total;

  // stack agent inputs
  std::vector<Mat> inputs(static_cast<std::size_t>(n_agents),
                          Mat(m_rows, model.input_dim));
  for (std::size_t bi = 0; bi < index.trajs.size(); ++bi) {
    const Trajectory& tr = *index.trajs[bi];
    for (std::size_t t = 0; t < tr.length(); ++t)
      for (int i = 0; i < n_agents; ++i)
        inputs[static_cast<std::size_t>(i)].row(index.row(bi, t)) =
            tr.steps[t].observations[static_cast<std::size_t>(i)].transpose();
  }

  // target-net agent values and per-row target mixer weights
  std::vector<Mat> target_q(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i)
    target_q[static_cast<std::size_t>(i)] =
        model.agents_target[static_cast<std::size_t>(i)].forward_batch(
            inputs[static_cast<std::size_t>(i)]);

  std::vector<MixerRowEval> target_mix(static_cast<std::size_t>(m_rows));
  for (std::size_t bi = 0; bi < index.trajs.size(); ++bi) {
    const Trajectory& tr = *index.trajs[bi];
    for (std::size_t t = 0; t < tr.length(); ++t)
      target_mix[static_cast<std::size_t>(index.row(bi, t))].generate(
          model.mixer_target, tr.steps[t].state);
  }

  const int hidden = model.mixer.hidden_dim;
  auto target_q_tot_row = [&](long row, const JointAction& a) {
    Vec u(n_agents);
    for (int i = 0; i < n_agents; ++i)
      u[i] = target_q[static_cast<std::size_t>(i)](row, a[i]);
    return target_mix[static_cast<std::size_t>(row)].forward(model.mode, hidden,
                                                             n_agents, u);
  };

  // the evaluator closures run inside the per-trajectory loop below
  std::size_t current_bi = 0;
  TargetEvaluator eval;
  eval.q_tot_at = [&](const Trajectory& tr, std::size_t t) {
    return target_q_tot_row(index.row(current_bi, t), tr.steps[t].joint_action);
  };
  eval.max_q_tot_at = [&](const Trajectory&, std::size_t t) {
    const long row = index.row(current_bi, t);
    double best = -std::numeric_limits<double>::infinity();
    JointAction a(std::vector<int>(static_cast<std::size_t>(n_agents), 0));
    // exhaustive joint max
    while (true) {
      best = std::max(best, target_q_tot_row(row, a));
      int i = n_agents - 1;
      while (i >= 0) {
        if (++a[i] < n_act) break;
        a[i] = 0;
        --i;
      }
      if (i < 0) break;
    }
    return best;
  };

  // targets (with total rewards when RND is active)
  std::vector<std::vector<double>> targets(index.trajs.size());
  for (std::size_t bi = 0; bi < index.trajs.size(); ++bi) {
    current_bi = bi;
    const Trajectory& tr = *index.trajs[bi];
    if (rnd) {
      std::vector<double> totals(tr.length());
      for (std::size_t t = 0; t < tr.length(); ++t)
        totals[t] = total_reward(tr.steps[t].reward_ext,
                                 intrinsic_reward(*rnd, tr.steps[t].next_state),
                                 env_steps_now, cfg.beta);
      targets[bi] = td_targets(tr, cfg, eval, &totals);
    } else {
      targets[bi] = td_targets(tr, cfg, eval);
    }
  }

  // online forward
  std::vector<Mlp::Cache> caches(static_cast<std::size_t>(n_agents));
  std::vector<Mat> online_q(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i)
    online_q[static_cast<std::size_t>(i)] =
        model.agents[static_cast<std::size_t>(i)].forward_batch(
            inputs[static_cast<std::size_t>(i)], caches[static_cast<std::size_t>(i)]);

  const long pd = model.mode == MixerMode::kAdditive ? 0 : model.mixer.param_count();
  Vec mixer_grad = Vec::Zero(pd);
  std::vector<Mat> d_agent_out(static_cast<std::size_t>(n_agents),
                               Mat::Zero(m_rows, n_act));
  double loss = 0.0;
  std::vector<int> counts(static_cast<std::size_t>(n_agents), n_act);
  for (std::size_t bi = 0; bi < index.trajs.size(); ++bi) {
    const Trajectory& tr = *index.trajs[bi];
    for (std::size_t t = 0; t < tr.length(); ++t) {
      const long row = index.row(bi, t);
      Vec qcat(n_agents * n_act);
      for (int i = 0; i < n_agents; ++i)
        qcat.segment(i * n_act, n_act) =
            online_q[static_cast<std::size_t>(i)].row(row).transpose();
      QVector qs(counts, qcat);
      QTotEval ev = q_tot_gradients(model.mode, model.mixer, tr.steps[t].state, qs,
                                    tr.steps[t].joint_action);
      const double err = ev.value - targets[bi][t];
      loss += err * err;
      const double d = 2.0 * err / static_cast<double>(m_rows);
      for (int i = 0; i < n_agents; ++i)
        d_agent_out[static_cast<std::size_t>(i)](row, tr.steps[t].joint_action[i]) +=
            d * ev.grad_q[i * n_act + tr.steps[t].joint_action[i]];
      if (pd > 0) mixer_grad += d * ev.grad_params;
    }
  }
  loss /= static_cast<double>(m_rows);
  if (!std::isfinite(loss))
    throw TrainingDivergenceError("grid_train_step: non-finite loss at step " +
                                  std::to_string(model.train_steps));

  // parameter update
  long total_dim = pd;
  for (const Mlp& a : model.agents) total_dim += a.param_count();
  Vec grad(total_dim), params(total_dim);
  long pos = 0;
  for (int i = 0; i < n_agents; ++i) {
    Mlp& net = model.agents[static_cast<std::size_t>(i)];
    grad.segment(pos, net.param_count()) =
        net.backward(caches[static_cast<std::size_t>(i)],
                     d_agent_out[static_cast<std::size_t>(i)]);
    params.segment(pos, net.param_count()) = net.pack();
    pos += net.param_count();
  }
  if (pd > 0) {
    grad.segment(pos, pd) = mixer_grad;
    params.segment(pos, pd) = model.mixer.pack();
  }
  if (cfg.lr_agent != 0.0) {
    model.opt.step(params, grad);
    pos = 0;
    for (int i = 0; i < n_agents; ++i) {
      Mlp& net = model.agents[static_cast<std::size_t>(i)];
      net.unpack(params.segment(pos, net.param_count()));
      pos += net.param_count();
    }
    if (pd > 0) model.mixer.unpack(params.segment(pos, pd));
  }

  // RND predictor on the batch's next states
  if (rnd) {
    Mat states(m_rows, model.env.state_size());
    for (std::size_t bi = 0; bi < index.trajs.size(); ++bi) {
      const Trajectory& tr = *index.trajs[bi];
      for (std::size_t t = 0; t < tr.length(); ++t)
        states.row(index.row(bi, t)) = tr.steps[t].next_state.transpose();
    }
    update_predictor(*rnd, states);
  }

  model.train_steps += 1;
  if (model.train_steps % cfg.target_update_period == 0) {
    model.agents_target = model.agents;
    model.mixer_target = model.mixer;
  }
  return loss;
}

}  // namespace detail

double GridMetrics::final_success_rate(int window) const {
  if (episodes.empty()) return 0.0;
  const std::size_t n = episodes.size();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), n);
  double acc = 0.0;
  for (std::size_t i = n - w; i < n; ++i) acc += episodes[i].success ? 1.0 : 0.0;
  return acc / static_cast<double>(w);
}

std::pair<GridModel, GridMetrics> run_gridworld_training(const GridConfig& env,
                                                         const TrainConfig& cfg,
                                                         MixerMode mode,
                                                         bool rnd_enabled) {
  GridModel model = make_grid_model(env, mode, cfg);
  GridMetrics metrics;
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng master(cfg.seed);
  Rng env_rng = master.fork(11);
  Rng act_rng = master.fork(22);
  Rng sample_rng = master.fork(33);

  std::optional<RndPair> rnd;
  if (rnd_enabled)
    rnd = make_rnd(env.state_size(), cfg.seed ^ 0xe7037ed1a0b428dbULL, 32,
                   cfg.agent_hidden, cfg.lr_rnd);

  std::int64_t env_steps = 0;
  std::int64_t episode = 0;
  double last_loss = 0.0;

  while (env_steps < cfg.total_steps) {
    ResetResult rr = grid_reset(env, env_rng);
    GridState state = rr.state;
    std::vector<std::deque<Vec>> windows(static_cast<std::size_t>(env.n_agents));
    for (int i = 0; i < env.n_agents; ++i)
      windows[static_cast<std::size_t>(i)].push_back(
          rr.observations[static_cast<std::size_t>(i)]);
    std::vector<int> prev_actions(static_cast<std::size_t>(env.n_agents), -1);

    Trajectory traj;
    double ep_return = 0.0, ep_intrinsic = 0.0;
    bool success = false;
    double eps_now = cfg.eps.at(env_steps);

    while (true) {
      eps_now = cfg.eps.at(env_steps);
      std::vector<Vec> net_inputs;
      JointAction a(std::vector<int>(static_cast<std::size_t>(env.n_agents), 0));
      for (int i = 0; i < env.n_agents; ++i) {
        net_inputs.push_back(model.agent_input(windows[static_cast<std::size_t>(i)],
                                               prev_actions[static_cast<std::size_t>(i)]));
        const Vec qv = model.agents[static_cast<std::size_t>(i)].forward(net_inputs.back());
        int greedy = 0;
        for (int b = 1; b < kGridActionCount; ++b)
          if (qv[b] > qv[greedy]) greedy = b;
        a[i] = act_rng.uniform() < eps_now ? act_rng.uniform_int(kGridActionCount)
                                           : greedy;
      }

      StepResult sr = grid_step(env, state, a);
      Transition tr;
      tr.state = global_state_vector(env, state);
      tr.next_state = global_state_vector(env, sr.state);
      tr.observations = net_inputs;
      tr.joint_action = a;
      tr.reward_ext = sr.reward_ext;
      tr.done = sr.done;
      traj.steps.push_back(std::move(tr));

      ep_return += sr.reward_ext;
      if (rnd) ep_intrinsic += intrinsic_reward(*rnd, traj.steps.back().next_state);
      if (sr.reward_ext >= env.reward_capture) success = true;
      ++env_steps;

      for (int i = 0; i < env.n_agents; ++i) {
        auto& w = windows[static_cast<std::size_t>(i)];
        w.push_back(sr.observations[static_cast<std::size_t>(i)]);
        while (static_cast<int>(w.size()) > cfg.obs_stack) w.pop_front();
        prev_actions[static_cast<std::size_t>(i)] = a[i];
      }
      state = sr.state;
      if (sr.done) break;
    }

    const std::size_t ep_len = traj.length();
    buffer.push(std::move(traj));
    ++episode;

    if (buffer.size() >= cfg.batch_episodes &&
        episode % cfg.episodes_per_update == 0) {
      const auto batch = buffer.sample(sample_rng, cfg.batch_episodes);
      last_loss = detail::grid_train_step(model, batch, cfg,
                                          rnd ? &*rnd : nullptr, env_steps);
    }

    GridEpisodeRecord rec;
    rec.episode = episode;
    rec.env_steps = env_steps;
    rec.return_ext = ep_return;
    rec.success = success;
    rec.intrinsic_mean = ep_len > 0 && rnd ? ep_intrinsic / static_cast<double>(ep_len) : 0.0;
    rec.eps = eps_now;
    rec.beta = rnd ? cfg.beta.at(env_steps) : 0.0;
    rec.loss = last_loss;
    metrics.episodes.push_back(rec);
  }
  return {std::move(model), std::move(metrics)};
}

void to_json(nlohmann::json& j, const MatrixModel& m) {
  j = nlohmann::json{
      {"mode", to_string(m.mode)},
      {"action_counts", m.action_counts},
      {"q", std::vector<double>(m.q.flat().data(), m.q.flat().data() + m.q.size())},
      {"mixer", m.mixer}};
}

}  // namespace vff
