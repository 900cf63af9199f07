#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <utility>
#include <vector>

#include "vff/game.hpp"
#include "vff/mixer.hpp"
#include "vff/policy.hpp"
#include "vff/types.hpp"

namespace vff {

// Joint flow coordinates: local values plus mixer parameters (the zero-loss
// manifold only exists in the joint space). Additive mode has no mixer
// coordinates.
struct FlowState {
  QVector q;
  MixerParams params;
  double time = 0.0;
};

// Flat coordinate layout for one (game, mode) pair: [q | mixer params].
struct FlowSpace {
  MixerMode mode;
  std::vector<int> action_counts;
  MixerParams shape;  // carries dimensions; values ignored
  Vec state;          // hypernetwork input, [1] for matrix games

  long dim() const;
  long q_dim() const;
  Vec pack(const FlowState& s) const;
  FlowState unpack(const Vec& x, double time = 0.0) const;
};

FlowSpace make_flow_space(const GameSpec& game, MixerMode mode,
                          const MixerParams& params_shape);

double expected_loss(const GameSpec& game, MixerMode mode, const MixerParams& params,
                     const Vec& state, const QVector& q, const Policy& policy);

// total = policy_term + value_term over the concatenated (q, params)
// coordinates. The policy term is nonzero only in q coordinates and vanishes
// identically for the Uniform policy.
struct LossGradient {
  Vec total, policy_term, value_term;
};

LossGradient loss_gradient(const GameSpec& game, MixerMode mode,
                           const MixerParams& params, const Vec& state,
                           const QVector& q, const Policy& policy);

struct StopRule {
  double grad_tol = 1e-10;
  double loss_tol = 1e-12;
};

enum class StopReason { kTimeLimit, kGradientTolerance, kLossTolerance };

struct FlowEvent {
  double time;
  JointAction from, to;
};

struct FlowTrace {
  std::vector<double> times;
  std::vector<double> losses;
  std::vector<JointAction> greedy;
  std::vector<FlowEvent> events;
  FlowState final_state;
  double final_grad_norm = 0.0;
  StopReason reason = StopReason::kTimeLimit;
};

// Divergence during integration; carries the last finite state.
struct FlowDivergenceError : std::runtime_error {
  FlowDivergenceError(const std::string& what, FlowState last)
      : std::runtime_error(what), last_finite_state(std::move(last)) {}
  FlowState last_finite_state;
};

// Classical fixed-step 4th-order integration of x' = -grad L. Samples the
// trace every `sample_stride` steps and records greedy-action changes.
FlowTrace integrate_flow(const GameSpec& game, MixerMode mode, const FlowState& start,
                         const Policy& policy, double dt, double t_max,
                         const StopRule& stop = {}, int sample_stride = 50);

// Largest-curvature estimate via a few Hessian-vector power iterations;
// useful for choosing a stable RK4 step (dt ~ 2 / lambda_max).
double estimate_max_curvature(const GameSpec& game, MixerMode mode,
                              const FlowState& point, const Policy& policy,
                              int iterations = 12, std::uint64_t seed = 0);

double stable_dt(const GameSpec& game, MixerMode mode, const FlowState& point,
                 const Policy& policy, double tau_cap_fraction = 0.01);

// v^T H v by second central differences of expected_loss along v,
// h = 1e-4 * (1 + |x|_inf), refined by two Richardson extrapolation levels
// from D(h), D(h/2), D(h/4).
double hessian_quadratic_form(const GameSpec& game, MixerMode mode,
                              const FlowState& point, const Policy& policy,
                              const Vec& v);

enum class Classification { kAttractor, kSaddle, kInconclusive };

const char* to_string(Classification c);

struct StabilityReport {
  FlowState point;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::vector<double> eigenvalues;  // restricted Hessian spectrum on the probe subspace
  double min_eigenvalue = 0.0;
  Classification classification = Classification::kInconclusive;
  long manifold_normal_rank = 0;
  // probe label -> normalized quadratic form value
  std::vector<std::pair<std::string, double>> probes;
};

// Builds the constraint Jacobian d Q_tot(a)/d coords over all joint actions,
// takes its row space (singular values > 1e-8) as the normal subspace, probes
// the Hessian quadratic form on that basis plus all per-agent action-flip
// directions, and classifies by the probed signs.
StabilityReport classify_fixed_point(const GameSpec& game, MixerMode mode,
                                     const FlowState& point, const Policy& policy,
                                     double tol = 1e-5);

// gap(tau) = | grad L_tau - grad L_greedy | at the point, for a decreasing
// temperature sequence. L_greedy puts all policy mass on the greedy joint
// action. Requires unique per-agent greedy actions (margin >= 1e-6).
std::vector<std::pair<double, double>> clarke_limit_probe(
    const GameSpec& game, MixerMode mode, const FlowState& point,
    const std::vector<double>& tau_sequence);

struct EscapeOptions {
  double t_max = 50.0;
  double dt = 0.0;  // 0 -> stable_dt at the start point
  double success_loss = 1e-3;
};

// Perturbs the point with isotropic Gaussian noise, integrates the flow, and
// returns the fraction of trials that end IGM-consistent with small loss.
double escape_statistics(const GameSpec& game, MixerMode mode, const FlowState& point,
                         const Policy& policy, int n_trials, double noise_scale,
                         std::uint64_t seed, const EscapeOptions& opts = {});

void to_json(nlohmann::json& j, const StabilityReport& r);
void to_json(nlohmann::json& j, const FlowTrace& t);

// CSV with header: time,loss,greedy per-agent labels.
std::string flow_trace_csv(const FlowTrace& t);

}  // namespace vff
