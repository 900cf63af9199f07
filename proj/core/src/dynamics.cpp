#include "vff/dynamics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <nlohmann/json.hpp>

#include "vff/rng.hpp"

namespace vff {

long FlowSpace::q_dim() const {
  long d = 0;
  for (int c : action_counts) d += c;
  return d;
}

long FlowSpace::dim() const {
  return q_dim() + (mode == MixerMode::kAdditive ? 0 : shape.param_count());
}

Vec FlowSpace::pack(const FlowState& s) const {
  Vec x(dim());
  x.head(q_dim()) = s.q.flat();
  if (mode != MixerMode::kAdditive) x.tail(shape.param_count()) = s.params.pack();
  return x;
}

FlowState FlowSpace::unpack(const Vec& x, double time) const {
  FlowState s;
  s.q = QVector(action_counts, x.head(q_dim()));
  s.params = shape;
  if (mode != MixerMode::kAdditive) s.params.unpack(x.tail(shape.param_count()));
  s.time = time;
  return s;
}

FlowSpace make_flow_space(const GameSpec& game, MixerMode mode,
                          const MixerParams& params_shape) {
  FlowSpace fs;
  fs.mode = mode;
  fs.action_counts = game.action_counts;
  fs.shape = params_shape;
  fs.state = Vec::Ones(params_shape.state_dim > 0 ? params_shape.state_dim : 1);
  return fs;
}

namespace {

void require_analysis_policy(const Policy& policy) {
  if (policy.kind == Policy::Kind::kEpsilonGreedy)
    throw UnsupportedPolicyError(
        "expected_loss: EpsilonGreedy is not differentiable; use Uniform or Softmax");
}

}  // namespace

double expected_loss(const GameSpec& game, MixerMode mode, const MixerParams& params,
                     const Vec& state, const QVector& q, const Policy& policy) {
  require_analysis_policy(policy);
  double loss = 0.0;
  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    const double mu = joint_probability(policy, q, a);
    const double r = payoff(game, a) - q_tot_forward(mode, params, state, q, a);
    loss += mu * r * r;
  });
  return loss;
}

LossGradient loss_gradient(const GameSpec& game, MixerMode mode,
                           const MixerParams& params, const Vec& state,
                           const QVector& q, const Policy& policy) {
  require_analysis_policy(policy);
  const long qd = q.size();
  const long pd = mode == MixerMode::kAdditive ? 0 : params.param_count();
  LossGradient g;
  g.total = Vec::Zero(qd + pd);
  g.policy_term = Vec::Zero(qd + pd);
  g.value_term = Vec::Zero(qd + pd);

  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    const double mu = joint_probability(policy, q, a);
    QTotEval ev = q_tot_gradients(mode, params, state, q, a);
    const double resid = payoff(game, a) - ev.value;

    g.value_term.head(qd) += -2.0 * mu * resid * ev.grad_q;
    if (pd > 0) g.value_term.tail(pd) += -2.0 * mu * resid * ev.grad_params;

    if (policy.kind == Policy::Kind::kSoftmax) {
      const Vec dmu = policy_gradient(policy, q, a);
      g.policy_term.head(qd) += dmu * (resid * resid);
    }
  });
  g.total = g.policy_term + g.value_term;
  return g;
}

namespace {

struct LossOracle {
  const GameSpec& game;
  const FlowSpace& fs;
  Policy policy;

  double loss(const Vec& x) const {
    FlowState s = fs.unpack(x);
    return expected_loss(game, fs.mode, s.params, fs.state, s.q, policy);
  }
  Vec grad(const Vec& x) const {
    FlowState s = fs.unpack(x);
    return loss_gradient(game, fs.mode, s.params, fs.state, s.q, policy).total;
  }
};

}  // namespace

FlowTrace integrate_flow(const GameSpec& game, MixerMode mode, const FlowState& start,
                         const Policy& policy, double dt, double t_max,
                         const StopRule& stop, int sample_stride) {
  if (!(dt > 0.0)) throw ParameterError("integrate_flow: dt must be > 0");
  if (policy.kind == Policy::Kind::kSoftmax && !(policy.tau > 0))
    throw ParameterError("integrate_flow: tau must be > 0");
  FlowSpace fs = make_flow_space(game, mode, start.params);
  LossOracle oracle{game, fs, policy};

  FlowTrace trace;
  Vec x = fs.pack(start);
  double t = 0.0;
  JointAction cur_greedy = greedy_joint(start.q);
  Vec last_finite = x;

  auto sample = [&](const Vec& xx, double tt) {
    trace.times.push_back(tt);
    trace.losses.push_back(oracle.loss(xx));
    trace.greedy.push_back(greedy_joint(fs.unpack(xx).q));
  };
  sample(x, 0.0);

  const long n_steps = static_cast<long>(std::ceil(t_max / dt));
  StopReason reason = StopReason::kTimeLimit;
  Vec g = oracle.grad(x);
  for (long k = 0; k < n_steps; ++k) {
    const Vec k1 = -g;
    const Vec k2 = -oracle.grad(x + 0.5 * dt * k1);
    const Vec k3 = -oracle.grad(x + 0.5 * dt * k2);
    const Vec k4 = -oracle.grad(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;

    if (!x.allFinite())
      throw FlowDivergenceError("integrate_flow: non-finite state at t=" +
                                    std::to_string(t),
                                fs.unpack(last_finite, t - dt));
    last_finite = x;

    const JointAction gr = greedy_joint(fs.unpack(x).q);
    if (gr != cur_greedy) {
      trace.events.push_back({t, cur_greedy, gr});
      cur_greedy = gr;
    }
    if ((k + 1) % sample_stride == 0) sample(x, t);

    g = oracle.grad(x);
    const double gnorm = g.norm();
    if (gnorm < stop.grad_tol) {
      reason = StopReason::kGradientTolerance;
      break;
    }
    if (oracle.loss(x) < stop.loss_tol) {
      reason = StopReason::kLossTolerance;
      break;
    }
  }
  if (trace.times.back() != t) sample(x, t);
  trace.final_state = fs.unpack(x, t);
  trace.final_grad_norm = oracle.grad(x).norm();
  trace.reason = reason;
  return trace;
}

double estimate_max_curvature(const GameSpec& game, MixerMode mode,
                              const FlowState& point, const Policy& policy,
                              int iterations, std::uint64_t seed) {
  FlowSpace fs = make_flow_space(game, mode, point.params);
  LossOracle oracle{game, fs, policy};
  const Vec x = fs.pack(point);
  const double h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());

  Rng rng(seed ^ 0xda3e39cb94b95bdbULL);
  Vec v(x.size());
  for (long i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec hv = (oracle.grad(x + h * v) - oracle.grad(x - h * v)) / (2.0 * h);
    lambda = hv.norm();
    if (lambda == 0.0) break;
    v = hv / lambda;
  }
  return lambda;
}

double stable_dt(const GameSpec& game, MixerMode mode, const FlowState& point,
                 const Policy& policy, double tau_cap_fraction) {
  const double tau = policy.kind == Policy::Kind::kSoftmax ? policy.tau : 1.0;
  const double lambda = estimate_max_curvature(game, mode, point, policy);
  double dt = tau_cap_fraction * tau;
  if (lambda > 0) dt = std::min(dt, 1.5 / lambda);
  return dt;
}

double hessian_quadratic_form(const GameSpec& game, MixerMode mode,
                              const FlowState& point, const Policy& policy,
                              const Vec& v) {
  if (v.norm() == 0) throw ParameterError("hessian_quadratic_form: |v| must be > 0");
  FlowSpace fs = make_flow_space(game, mode, point.params);
  if (v.size() != fs.dim())
    throw DimensionError("hessian_quadratic_form: direction has wrong dimension");
  LossOracle oracle{game, fs, policy};
  const Vec x = fs.pack(point);
  const double h0 = 1e-4 * (1.0 + x.cwiseAbs().maxCoeff());
  const double f0 = oracle.loss(x);

  auto second_diff = [&](double h) {
    return (oracle.loss(x + h * v) - 2.0 * f0 + oracle.loss(x - h * v)) / (h * h);
  };
  const double d1 = second_diff(h0);
  const double d2 = second_diff(h0 / 2.0);
  const double d3 = second_diff(h0 / 4.0);
  const double r1 = (4.0 * d2 - d1) / 3.0;
  const double r2 = (4.0 * d3 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kAttractor: return "attractor";
    case Classification::kSaddle: return "saddle";
    case Classification::kInconclusive: return "inconclusive";
  }
  return "?";
}

StabilityReport classify_fixed_point(const GameSpec& game, MixerMode mode,
                                     const FlowState& point, const Policy& policy,
                                     double tol) {
  FlowSpace fs = make_flow_space(game, mode, point.params);
  LossOracle oracle{game, fs, policy};
  const Vec x = fs.pack(point);

  StabilityReport report;
  report.point = point;
  report.loss = oracle.loss(x);
  report.grad_norm = oracle.grad(x).norm();
  if (report.grad_norm >= 1e-6)
    throw PreconditionError("classify_fixed_point: gradient norm " +
                            std::to_string(report.grad_norm) +
                            " exceeds the fixed-point tolerance 1e-6");

  // constraint Jacobian over all joint actions
  const long kcells = joint_action_count(game.action_counts);
  Mat jac(kcells, fs.dim());
  long row = 0;
  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    QTotEval ev = q_tot_gradients(mode, point.params, fs.state, point.q, a);
    jac.row(row).head(fs.q_dim()) = ev.grad_q.transpose();
    if (fs.dim() > fs.q_dim())
      jac.row(row).tail(fs.dim() - fs.q_dim()) = ev.grad_params.transpose();
    ++row;
  });

  Eigen::JacobiSVD<Mat> svd(jac, Eigen::ComputeThinV);
  const Vec& sing = svd.singularValues();
  long rank = 0;
  for (long i = 0; i < sing.size(); ++i)
    if (sing[i] > 1e-8) ++rank;
  report.manifold_normal_rank = rank;

  // probe directions: orthonormal basis of the normal subspace + action flips
  std::vector<std::pair<std::string, Vec>> dirs;
  for (long i = 0; i < rank; ++i)
    dirs.emplace_back("normal_" + std::to_string(i), svd.matrixV().col(i));
  const JointAction g = greedy_joint(point.q);
  for (int i = 0; i < point.q.n_agents(); ++i) {
    for (int b = 0; b < point.q.count(i); ++b) {
      if (b == g[i]) continue;
      Vec v = Vec::Zero(fs.dim());
      v[point.q.offset(i) + b] = 1.0;
      v[point.q.offset(i) + g[i]] = -1.0;
      dirs.emplace_back("flip_agent" + std::to_string(i) + "_" + std::to_string(g[i]) +
                            "to" + std::to_string(b),
                        v / v.norm());
    }
  }

  bool any_negative = false;
  bool all_positive = true;
  for (const auto& [label, v] : dirs) {
    const double qf = hessian_quadratic_form(game, mode, point, policy, v);
    report.probes.emplace_back(label, qf);
    if (qf < -tol) any_negative = true;
    if (!(qf > tol)) all_positive = false;
  }
  report.classification = any_negative ? Classification::kSaddle
                          : all_positive ? Classification::kAttractor
                                         : Classification::kInconclusive;

  // restricted Hessian spectrum on the orthonormalized probe span
  Mat basis(fs.dim(), static_cast<long>(dirs.size()));
  long cols = 0;
  for (const auto& [label, v] : dirs) {
    Vec w = v;
    for (long c = 0; c < cols; ++c) w -= basis.col(c).dot(w) * basis.col(c);
    if (w.norm() > 1e-10) basis.col(cols++) = w / w.norm();
  }
  basis.conservativeResize(Eigen::NoChange, cols);
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  Mat hb(fs.dim(), cols);
  for (long c = 0; c < cols; ++c)
    hb.col(c) = (oracle.grad(x + h * basis.col(c)) - oracle.grad(x - h * basis.col(c))) /
                (2.0 * h);
  Mat restricted = basis.transpose() * hb;
  restricted = 0.5 * (restricted + restricted.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(restricted);
  report.eigenvalues.assign(eig.eigenvalues().data(),
                            eig.eigenvalues().data() + eig.eigenvalues().size());
  report.min_eigenvalue = report.eigenvalues.empty()
                              ? 0.0
                              : *std::min_element(report.eigenvalues.begin(),
                                                  report.eigenvalues.end());
  for (const auto& [label, qf] : report.probes)
    report.min_eigenvalue = std::min(report.min_eigenvalue, qf);
  return report;
}

std::vector<std::pair<double, double>> clarke_limit_probe(
    const GameSpec& game, MixerMode mode, const FlowState& point,
    const std::vector<double>& tau_sequence) {
  for (std::size_t i = 0; i + 1 < tau_sequence.size(); ++i)
    if (!(tau_sequence[i] > tau_sequence[i + 1]) || !(tau_sequence[i + 1] > 0))
      throw ParameterError("clarke_limit_probe: taus must be positive and decreasing");

  // H1: unique greedy actions with a minimum margin
  const JointAction g = greedy_joint(point.q);
  for (int i = 0; i < point.q.n_agents(); ++i) {
    double best = point.q(i, g[i]);
    for (int b = 0; b < point.q.count(i); ++b) {
      if (b == g[i]) continue;
      if (best - point.q(i, b) < 1e-6)
        throw PreconditionError(
            "clarke_limit_probe: greedy action of agent " + std::to_string(i) +
            " is not unique (margin < 1e-6)");
    }
  }

  FlowSpace fs = make_flow_space(game, mode, point.params);
  const long qd = fs.q_dim();
  const long pd = fs.dim() - qd;

  // gradient of the greedy-policy loss (y(g) - Q_tot(g))^2; the greedy policy
  // is locally constant so only the value term appears
  QTotEval ev = q_tot_gradients(mode, point.params, fs.state, point.q, g);
  const double resid = payoff(game, g) - ev.value;
  Vec greedy_grad = Vec::Zero(fs.dim());
  greedy_grad.head(qd) = -2.0 * resid * ev.grad_q;
  if (pd > 0) greedy_grad.tail(pd) = -2.0 * resid * ev.grad_params;

  std::vector<std::pair<double, double>> out;
  out.reserve(tau_sequence.size());
  for (double tau : tau_sequence) {
    LossGradient lg = loss_gradient(game, mode, point.params, fs.state, point.q,
                                    Policy::softmax(tau));
    out.emplace_back(tau, (lg.total - greedy_grad).norm());
  }
  return out;
}

double escape_statistics(const GameSpec& game, MixerMode mode, const FlowState& point,
                         const Policy& policy, int n_trials, double noise_scale,
                         std::uint64_t seed, const EscapeOptions& opts) {
  FlowSpace fs = make_flow_space(game, mode, point.params);
  const Vec x0 = fs.pack(point);
  const JointAction optimum = optimal_joint_action(game);
  const double dt = opts.dt > 0 ? opts.dt : stable_dt(game, mode, point, policy);

  Rng rng(seed);
  int successes = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    Rng trial_rng = rng.fork(static_cast<std::uint64_t>(trial));
    Vec x = x0;
    for (long i = 0; i < x.size(); ++i) x[i] += noise_scale * trial_rng.normal();
    FlowState start = fs.unpack(x);
    try {
      FlowTrace trace =
          integrate_flow(game, mode, start, policy, dt, opts.t_max, StopRule{});
      const bool igm = greedy_joint(trace.final_state.q) == optimum;
      const double loss = expected_loss(game, mode, trace.final_state.params, fs.state,
                                        trace.final_state.q, policy);
      if (igm && loss < opts.success_loss) ++successes;
    } catch (const FlowDivergenceError&) {
      // divergent trial counts as failure
    }
  }
  return n_trials > 0 ? static_cast<double>(successes) / n_trials : 0.0;
}

void to_json(nlohmann::json& j, const StabilityReport& r) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& [label, value] : r.probes)
    probes.push_back({{"direction", label}, {"quadratic_form", value}});
  j = nlohmann::json{{"loss", r.loss},
                     {"grad_norm", r.grad_norm},
                     {"eigenvalues", r.eigenvalues},
                     {"min_eigenvalue", r.min_eigenvalue},
                     {"classification", to_string(r.classification)},
                     {"manifold_normal_rank", r.manifold_normal_rank},
                     {"greedy", greedy_joint(r.point.q).actions},
                     {"q", std::vector<double>(r.point.q.flat().data(),
                                               r.point.q.flat().data() + r.point.q.size())},
                     {"probes", std::move(probes)}};
}

void to_json(nlohmann::json& j, const FlowTrace& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.events)
    events.push_back({{"time", e.time}, {"from", e.from.actions}, {"to", e.to.actions}});
  nlohmann::json greedy = nlohmann::json::array();
  for (const auto& g : t.greedy) greedy.push_back(g.actions);
  const char* reason = t.reason == StopReason::kTimeLimit ? "time_limit"
                       : t.reason == StopReason::kGradientTolerance ? "grad_tol"
                                                                    : "loss_tol";
  j = nlohmann::json{{"times", t.times},
                     {"losses", t.losses},
                     {"greedy", std::move(greedy)},
                     {"events", std::move(events)},
                     {"final_grad_norm", t.final_grad_norm},
                     {"stop_reason", reason}};
}

std::string flow_trace_csv(const FlowTrace& t) {
  std::string out = "time,loss";
  const int n = t.greedy.empty() ? 0 : t.greedy.front().size();
  for (int i = 0; i < n; ++i) out += ",greedy_agent" + std::to_string(i);
  out += "\n";
  char buf[64];
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", t.times[k], t.losses[k]);
    out += buf;
    for (int i = 0; i < n; ++i) {
      out += ",";
      out += static_cast<char>('A' + t.greedy[k][i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace vff
