#include "vff/mixer.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "vff/adam.hpp"
#include "vff/rng.hpp"

namespace vff {

const char* to_string(MixerMode mode) {
  switch (mode) {
    case MixerMode::kAdditive: return "additive";
    case MixerMode::kMonotonic: return "monotonic";
    case MixerMode::kUnconstrained: return "unconstrained";
  }
  return "?";
}

MixerMode mixer_mode_from_string(const std::string& s) {
  if (s == "additive") return MixerMode::kAdditive;
  if (s == "monotonic") return MixerMode::kMonotonic;
  if (s == "unconstrained") return MixerMode::kUnconstrained;
  throw ParameterError("unknown mixer mode '" + s + "'");
}

MixerParams MixerParams::zeros(int n_inputs, int hidden_dim, int state_dim) {
  MixerParams p;
  p.n_inputs = n_inputs;
  p.hidden_dim = hidden_dim;
  p.state_dim = state_dim;
  auto zero_gen = [&](long out) {
    return AffineGenerator{Mat::Zero(out, state_dim), Vec::Zero(out)};
  };
  p.w1_gen = zero_gen(static_cast<long>(hidden_dim) * n_inputs);
  p.b1_gen = zero_gen(hidden_dim);
  p.w2_gen = zero_gen(hidden_dim);
  p.b2_gen = zero_gen(1);
  return p;
}

MixerParams MixerParams::random(int n_inputs, int hidden_dim, int state_dim,
                                std::uint64_t seed) {
  MixerParams p = zeros(n_inputs, hidden_dim, state_dim);
  Rng rng(seed);
  const double wstd = 1.0 / std::sqrt(static_cast<double>(state_dim));
  auto fill = [&](AffineGenerator& g) {
    for (long c = 0; c < g.weight.cols(); ++c)
      for (long r = 0; r < g.weight.rows(); ++r) g.weight(r, c) = rng.normal(0, wstd);
    for (long r = 0; r < g.bias.size(); ++r) g.bias[r] = rng.normal(0, 0.2);
  };
  fill(p.w1_gen);
  fill(p.b1_gen);
  fill(p.w2_gen);
  fill(p.b2_gen);
  return p;
}

long MixerParams::param_count() const {
  return w1_gen.param_count() + b1_gen.param_count() + w2_gen.param_count() +
         b2_gen.param_count();
}

bool MixerParams::same_shape(const MixerParams& o) const {
  return n_inputs == o.n_inputs && hidden_dim == o.hidden_dim &&
         state_dim == o.state_dim;
}

namespace {

void pack_block(const AffineGenerator& g, Vec& out, long& pos) {
  const long wn = g.weight.size();
  out.segment(pos, wn) = Eigen::Map<const Vec>(g.weight.data(), wn);
  pos += wn;
  out.segment(pos, g.bias.size()) = g.bias;
  pos += g.bias.size();
}

void unpack_block(AffineGenerator& g, const Vec& in, long& pos) {
  const long wn = g.weight.size();
  Eigen::Map<Vec>(g.weight.data(), wn) = in.segment(pos, wn);
  pos += wn;
  g.bias = in.segment(pos, g.bias.size());
  pos += g.bias.size();
}

}  // namespace

Vec MixerParams::pack() const {
  Vec out(param_count());
  long pos = 0;
  pack_block(w1_gen, out, pos);
  pack_block(b1_gen, out, pos);
  pack_block(w2_gen, out, pos);
  pack_block(b2_gen, out, pos);
  return out;
}

void MixerParams::unpack(const Vec& flat) {
  if (flat.size() != param_count())
    throw DimensionError("MixerParams::unpack: wrong length");
  long pos = 0;
  unpack_block(w1_gen, flat, pos);
  unpack_block(b1_gen, flat, pos);
  unpack_block(w2_gen, flat, pos);
  unpack_block(b2_gen, flat, pos);
}

namespace {

nlohmann::json gen_to_json(const AffineGenerator& g) {
  nlohmann::json w = nlohmann::json::array();
  for (long r = 0; r < g.weight.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (long c = 0; c < g.weight.cols(); ++c) row.push_back(g.weight(r, c));
    w.push_back(std::move(row));
  }
  nlohmann::json b = nlohmann::json::array();
  for (long r = 0; r < g.bias.size(); ++r) b.push_back(g.bias[r]);
  return nlohmann::json{{"weight", std::move(w)}, {"bias", std::move(b)}};
}

AffineGenerator gen_from_json(const nlohmann::json& j, long out, long state_dim) {
  AffineGenerator g{Mat::Zero(out, state_dim), Vec::Zero(out)};
  const auto& w = j.at("weight");
  for (long r = 0; r < out; ++r)
    for (long c = 0; c < state_dim; ++c)
      g.weight(r, c) = w.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  const auto& b = j.at("bias");
  for (long r = 0; r < out; ++r) g.bias[r] = b.at(static_cast<std::size_t>(r)).get<double>();
  return g;
}

}  // namespace

void to_json(nlohmann::json& j, const MixerParams& p) {
  j = nlohmann::json{{"n_inputs", p.n_inputs},
                     {"hidden_dim", p.hidden_dim},
                     {"state_dim", p.state_dim},
                     {"w1_gen", gen_to_json(p.w1_gen)},
                     {"b1_gen", gen_to_json(p.b1_gen)},
                     {"w2_gen", gen_to_json(p.w2_gen)},
                     {"b2_gen", gen_to_json(p.b2_gen)}};
}

void from_json(const nlohmann::json& j, MixerParams& p) {
  p.n_inputs = j.at("n_inputs").get<int>();
  p.hidden_dim = j.at("hidden_dim").get<int>();
  p.state_dim = j.at("state_dim").get<int>();
  p.w1_gen = gen_from_json(j.at("w1_gen"), static_cast<long>(p.hidden_dim) * p.n_inputs, p.state_dim);
  p.b1_gen = gen_from_json(j.at("b1_gen"), p.hidden_dim, p.state_dim);
  p.w2_gen = gen_from_json(j.at("w2_gen"), p.hidden_dim, p.state_dim);
  p.b2_gen = gen_from_json(j.at("b2_gen"), 1, p.state_dim);
}

namespace {

inline double elu(double z) { return z > 0 ? z : std::expm1(z); }
inline double elu_deriv(double z) { return z > 0 ? 1.0 : std::exp(z); }
inline double sign0(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void check_shapes(MixerMode mode, const MixerParams& params, const Vec& state,
                  const QVector& q, const JointAction& a) {
  if (a.size() != q.n_agents())
    throw DimensionError("q_tot: joint action arity does not match q");
  for (int i = 0; i < a.size(); ++i)
    if (a[i] < 0 || a[i] >= q.count(i))
      throw InvalidActionError("q_tot: action index out of range");
  if (mode == MixerMode::kAdditive) return;
  if (params.n_inputs != q.n_agents())
    throw DimensionError("q_tot: params.n_inputs does not match agent count");
  if (params.state_dim != state.size())
    throw DimensionError("q_tot: state dimension mismatch");
}

}  // namespace

double q_tot_forward(MixerMode mode, const MixerParams& params, const Vec& state,
                     const QVector& q, const JointAction& a) {
  check_shapes(mode, params, state, q, a);
  const int n = q.n_agents();
  if (mode == MixerMode::kAdditive) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += q(i, a[i]);
    return s;
  }
  const int hdim = params.hidden_dim;
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = q(i, a[i]);

  Vec w1_flat = params.w1_gen.generate(state);
  Eigen::Map<const Mat> w1(w1_flat.data(), hdim, n);
  Vec b1 = params.b1_gen.generate(state);
  Vec w2 = params.w2_gen.generate(state);
  const double b2 = params.b2_gen.generate(state)[0];

  Vec z;
  if (mode == MixerMode::kMonotonic)
    z = w1.cwiseAbs() * u + b1;
  else
    z = w1 * u + b1;
  double out = b2;
  for (int r = 0; r < hdim; ++r)
    out += (mode == MixerMode::kMonotonic ? std::abs(w2[r]) : w2[r]) * elu(z[r]);
  return out;
}

QTotEval q_tot_gradients(MixerMode mode, const MixerParams& params, const Vec& state,
                         const QVector& q, const JointAction& a) {
  check_shapes(mode, params, state, q, a);
  const int n = q.n_agents();
  QTotEval ev;
  ev.grad_q = Vec::Zero(q.size());
  ev.grad_params = Vec::Zero(params.param_count());

  if (mode == MixerMode::kAdditive) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      s += q(i, a[i]);
      ev.grad_q[q.offset(i) + a[i]] = 1.0;
    }
    ev.value = s;
    return ev;
  }

  const int hdim = params.hidden_dim;
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = q(i, a[i]);

  Vec w1_flat = params.w1_gen.generate(state);
  Eigen::Map<const Mat> w1(w1_flat.data(), hdim, n);
  Vec b1 = params.b1_gen.generate(state);
  Vec w2 = params.w2_gen.generate(state);
  const double b2 = params.b2_gen.generate(state)[0];

  const bool mono = (mode == MixerMode::kMonotonic);
  Mat w1_eff = mono ? w1.cwiseAbs() : Mat(w1);
  Vec w2_eff = mono ? w2.cwiseAbs() : w2;

  Vec z = w1_eff * u + b1;
  Vec h(hdim), dh_dz(hdim);
  for (int r = 0; r < hdim; ++r) {
    h[r] = elu(z[r]);
    dh_dz[r] = elu_deriv(z[r]);
  }
  ev.value = w2_eff.dot(h) + b2;

  // reverse pass
  Vec dz = w2_eff.cwiseProduct(dh_dz);
  Vec du = w1_eff.transpose() * dz;
  for (int i = 0; i < n; ++i) ev.grad_q[q.offset(i) + a[i]] = du[i];

  Mat dw1_eff = dz * u.transpose();            // hdim x n
  Vec dw2_eff = h;
  Mat dw1 = mono ? Mat(dw1_eff.cwiseProduct(w1.unaryExpr([](double x) { return sign0(x); })))
                 : dw1_eff;
  Vec dw2 = mono ? Vec(dw2_eff.cwiseProduct(w2.unaryExpr([](double x) { return sign0(x); })))
                 : dw2_eff;

  // generator backward: out_flat = weight*state + bias
  long pos = 0;
  auto emit = [&](const Vec& dout, const AffineGenerator& g) {
    // d/dweight laid out column-major to match pack()
    for (long c = 0; c < g.weight.cols(); ++c)
      ev.grad_params.segment(pos + c * g.weight.rows(), g.weight.rows()) = dout * state[c];
    pos += g.weight.size();
    ev.grad_params.segment(pos, g.bias.size()) = dout;
    pos += g.bias.size();
  };
  emit(Eigen::Map<const Vec>(dw1.data(), dw1.size()), params.w1_gen);
  emit(dz, params.b1_gen);
  emit(dw2, params.w2_gen);
  emit(Vec::Ones(1), params.b2_gen);
  return ev;
}

JointAction greedy_joint(const QVector& q) {
  JointAction g(std::vector<int>(static_cast<std::size_t>(q.n_agents()), 0));
  for (int i = 0; i < q.n_agents(); ++i) {
    int best = 0;
    for (int b = 1; b < q.count(i); ++b)
      if (q(i, b) > q(i, best)) best = b;
    g[i] = best;
  }
  return g;
}

IgmResult igm_check(const QVector& q, const GameSpec& game) {
  if (q.action_counts() != game.action_counts)
    throw DimensionError("igm_check: q layout does not match game");
  IgmResult r;
  r.greedy = greedy_joint(q);
  r.optimum = optimal_joint_action(game);
  r.consistent = (r.greedy == r.optimum);
  return r;
}

double fit_max_error(const GameSpec& game, MixerMode mode, const MixerParams& params,
                     const Vec& state, const QVector& q) {
  double worst = 0;
  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    worst = std::max(worst, std::abs(q_tot_forward(mode, params, state, q, a) -
                                     payoff(game, a)));
  });
  return worst;
}

namespace {

// Gauss-Newton refinement of the residual system Q_tot(a) - y(a) over mixer
// parameters; minimum-norm steps via the (small) K x K normal system.
bool gauss_newton_polish(const GameSpec& game, MixerMode mode, MixerParams& params,
                         const Vec& state, const QVector& q, double tol) {
  const long kcells = joint_action_count(game.action_counts);
  const long pdim = params.param_count();
  Vec p = params.pack();
  for (int it = 0; it < 60; ++it) {
    Vec r(kcells);
    Mat jac(kcells, pdim);
    long row = 0;
    params.unpack(p);
    for_each_joint_action(game.action_counts, [&](const JointAction& a) {
      QTotEval ev = q_tot_gradients(mode, params, state, q, a);
      r[row] = ev.value - payoff(game, a);
      jac.row(row) = ev.grad_params.transpose();
      ++row;
    });
    const double err = r.cwiseAbs().maxCoeff();
    if (err <= tol) return true;
    Mat jjt = jac * jac.transpose();
    jjt.diagonal().array() += 1e-12;
    Vec d = jac.transpose() * jjt.ldlt().solve(r);
    if (!d.allFinite()) return false;
    p -= d;
  }
  params.unpack(p);
  Vec r(kcells);
  long row = 0;
  for_each_joint_action(game.action_counts, [&](const JointAction& a) {
    r[row++] = q_tot_forward(mode, params, state, q, a) - payoff(game, a);
  });
  return r.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

MixerParams fit_zero_loss(const GameSpec& game, const QVector& q_pattern,
                          MixerMode mode, const FitOptions& opts) {
  if (q_pattern.action_counts() != game.action_counts)
    throw DimensionError("fit_zero_loss: pattern layout does not match game");
  const Vec state = Vec::Ones(1);
  const long kcells = joint_action_count(game.action_counts);

  if (mode == MixerMode::kAdditive) {
    MixerParams p = MixerParams::zeros(game.n_agents(), 1, 1);
    const double err = fit_max_error(game, mode, p, state, q_pattern);
    if (err <= opts.tol) return p;
    throw FitFailureError("fit_zero_loss: additive mixer has no trainable "
                          "parameters and the pattern does not match", err);
  }

  constexpr int kHidden = 32;
  MixerParams params =
      MixerParams::random(game.n_agents(), kHidden, 1, opts.seed);
  Vec p = params.pack();
  AdamOptimizer adam(p.size(), opts.lr);

  double best = std::numeric_limits<double>::infinity();
  const bool can_polish = opts.polish && mode == MixerMode::kUnconstrained;
  for (long step = 0; step < opts.budget; ++step) {
    params.unpack(p);
    Vec grad = Vec::Zero(p.size());
    double maxerr = 0;
    for_each_joint_action(game.action_counts, [&](const JointAction& a) {
      QTotEval ev = q_tot_gradients(mode, params, state, q_pattern, a);
      const double resid = ev.value - payoff(game, a);
      maxerr = std::max(maxerr, std::abs(resid));
      grad += (2.0 / static_cast<double>(kcells)) * resid * ev.grad_params;
    });
    best = std::min(best, maxerr);
    if (maxerr <= opts.tol) return params;
    if (can_polish && maxerr <= 0.05 && step % 200 == 0) {
      MixerParams polished = params;
      if (gauss_newton_polish(game, mode, polished, state, q_pattern, opts.tol))
        return polished;
    }
    adam.step(p, grad);
  }
  params.unpack(p);
  const double final_err = fit_max_error(game, mode, params, state, q_pattern);
  if (final_err <= opts.tol) return params;
  if (can_polish) {
    MixerParams polished = params;
    if (gauss_newton_polish(game, mode, polished, state, q_pattern, opts.tol))
      return polished;
  }
  throw FitFailureError("fit_zero_loss: budget exhausted at max error " +
                            std::to_string(std::min(best, final_err)),
                        std::min(best, final_err));
}

}  // namespace vff
