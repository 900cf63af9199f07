#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>

#include "vff/adam.hpp"
#include "vff/mlp.hpp"
#include "vff/types.hpp"

namespace vff {

// Linear anneal, clamped at the end value.
struct BetaSchedule {
  double start = 0.5;
  double end = 0.05;
  std::int64_t anneal_steps = 100000;

  double at(std::int64_t step) const {
    if (anneal_steps <= 0 || step >= anneal_steps) return end;
    if (step <= 0) return start;
    const double f = static_cast<double>(step) / static_cast<double>(anneal_steps);
    return start + f * (end - start);
  }
};

// Random network distillation pair: a frozen random target embedding and a
// trainable predictor of the same shape.
struct RndPair {
  Mlp target;     // never trained
  Mlp predictor;
  AdamOptimizer opt;
  std::uint64_t seed = 0;
  int state_dim = 0;
  int embed_dim = 0;
  int hidden_dim = 0;
};

RndPair make_rnd(int state_dim, std::uint64_t seed, int embed_dim = 32,
                 int hidden_dim = 64, double lr = 5e-4);

// One-half squared distance between predictor and target embeddings.
double intrinsic_reward(const RndPair& rnd, const Vec& s);

// One Adam step on the mean intrinsic reward over the batch (rows = states);
// the target network is untouched. Returns the pre-step loss.
double update_predictor(RndPair& rnd, const Mat& states);

double total_reward(double r_ext, double r_int, std::int64_t step,
                    const BetaSchedule& sched);

void to_json(nlohmann::json& j, const RndPair& rnd);
void from_json(const nlohmann::json& j, RndPair& rnd);

}  // namespace vff
