#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>

#include "vff/game.hpp"
#include "vff/types.hpp"

namespace vff {

enum class MixerMode { kAdditive, kMonotonic, kUnconstrained };

const char* to_string(MixerMode mode);
MixerMode mixer_mode_from_string(const std::string& s);

// Linear-plus-bias map from the state vector to a flat parameter block.
struct AffineGenerator {
  Mat weight;  // out_dim x state_dim
  Vec bias;    // out_dim

  Vec generate(const Vec& state) const { return weight * state + bias; }
  long param_count() const { return weight.size() + bias.size(); }
};

// Parameters of the state-conditioned mixing network. The four generators
// produce the mixing weights W1 (hidden x n_inputs), bias b1 (hidden),
// output weights w2 (hidden) and scalar bias b2. Additive mode uses none
// of them.
struct MixerParams {
  int n_inputs = 0;
  int hidden_dim = 0;
  int state_dim = 0;
  AffineGenerator w1_gen, b1_gen, w2_gen, b2_gen;

  static MixerParams zeros(int n_inputs, int hidden_dim, int state_dim);
  // Gaussian init, std 1/sqrt(fan_in) for generator weights.
  static MixerParams random(int n_inputs, int hidden_dim, int state_dim,
                            std::uint64_t seed);

  long param_count() const;
  Vec pack() const;
  void unpack(const Vec& flat);
  bool same_shape(const MixerParams& o) const;
};

void to_json(nlohmann::json& j, const MixerParams& p);
void from_json(const nlohmann::json& j, MixerParams& p);

// Value plus exact reverse-mode derivatives of q_tot_forward. grad_q is laid
// out like q.flat() and is nonzero only at the selected (agent, action)
// coordinates; grad_params is laid out like MixerParams::pack().
struct QTotEval {
  double value = 0.0;
  Vec grad_q;
  Vec grad_params;
};

double q_tot_forward(MixerMode mode, const MixerParams& params, const Vec& state,
                     const QVector& q, const JointAction& a);

QTotEval q_tot_gradients(MixerMode mode, const MixerParams& params, const Vec& state,
                         const QVector& q, const JointAction& a);

// Per-agent argmax of local values; ties break to the lowest action index.
JointAction greedy_joint(const QVector& q);

struct IgmResult {
  bool consistent = false;
  JointAction greedy;
  JointAction optimum;
};

IgmResult igm_check(const QVector& q, const GameSpec& game);

struct FitOptions {
  long budget = 50000;       // Adam steps
  double tol = 1e-3;         // max-abs fit error target
  std::uint64_t seed = 0;
  double lr = 1e-2;
  bool polish = true;        // Gauss-Newton refinement once Adam is close
};

// Regress q_tot_forward onto the game payoffs over all joint actions with the
// local values held fixed at q_pattern; only mixer parameters train. Throws
// FitFailureError when the tolerance is unreachable within the budget (the
// expected outcome for Monotonic mode on non-monotone tables, and for
// Additive mode whenever the pattern sums do not already match).
MixerParams fit_zero_loss(const GameSpec& game, const QVector& q_pattern,
                          MixerMode mode, const FitOptions& opts = {});

// Maximum absolute error of the fitted table against the game payoffs.
double fit_max_error(const GameSpec& game, MixerMode mode, const MixerParams& params,
                     const Vec& state, const QVector& q);

}  // namespace vff
