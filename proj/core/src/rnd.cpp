#include "vff/rnd.hpp"

#include <nlohmann/json.hpp>

#include "vff/errors.hpp"

namespace vff {

RndPair make_rnd(int state_dim, std::uint64_t seed, int embed_dim, int hidden_dim,
                 double lr) {
  if (state_dim < 1) throw ParameterError("make_rnd: state_dim must be >= 1");
  Rng rng(seed);
  RndPair rnd;
  rnd.seed = seed;
  rnd.state_dim = state_dim;
  rnd.embed_dim = embed_dim;
  rnd.hidden_dim = hidden_dim;
  rnd.target = Mlp({state_dim, hidden_dim, embed_dim}, rng);
  rnd.predictor = Mlp({state_dim, hidden_dim, embed_dim}, rng);
  rnd.opt = AdamOptimizer(rnd.predictor.param_count(), lr);
  return rnd;
}

double intrinsic_reward(const RndPair& rnd, const Vec& s) {
  if (s.size() != rnd.state_dim)
    throw DimensionError("intrinsic_reward: state dimension mismatch");
  return 0.5 * (rnd.predictor.forward(s) - rnd.target.forward(s)).squaredNorm();
}

double update_predictor(RndPair& rnd, const Mat& states) {
  if (states.rows() == 0) throw PreconditionError("update_predictor: empty batch");
  if (states.cols() != rnd.state_dim)
    throw DimensionError("update_predictor: state dimension mismatch");

  Mlp::Cache cache;
  const Mat pred = rnd.predictor.forward_batch(states, cache);
  const Mat targ = rnd.target.forward_batch(states);
  const Mat diff = pred - targ;
  const double n = static_cast<double>(states.rows());
  const double loss = 0.5 * diff.squaredNorm() / n;
  if (!std::isfinite(loss))
    throw TrainingDivergenceError("update_predictor: non-finite loss");

  const Vec grad = rnd.predictor.backward(cache, diff / n);
  Vec params = rnd.predictor.pack();
  rnd.opt.step(params, grad);
  rnd.predictor.unpack(params);
  return loss;
}

double total_reward(double r_ext, double r_int, std::int64_t step,
                    const BetaSchedule& sched) {
  return r_ext + sched.at(step) * r_int;
}

void to_json(nlohmann::json& j, const RndPair& rnd) {
  j = nlohmann::json{{"seed", rnd.seed},
                     {"state_dim", rnd.state_dim},
                     {"embed_dim", rnd.embed_dim},
                     {"hidden_dim", rnd.hidden_dim},
                     {"target", rnd.target},
                     {"predictor", rnd.predictor}};
}

void from_json(const nlohmann::json& j, RndPair& rnd) {
  rnd.seed = j.at("seed").get<std::uint64_t>();
  rnd.state_dim = j.at("state_dim").get<int>();
  rnd.embed_dim = j.at("embed_dim").get<int>();
  rnd.hidden_dim = j.at("hidden_dim").get<int>();
  rnd.target = j.at("target").get<Mlp>();
  rnd.predictor = j.at("predictor").get<Mlp>();
  rnd.opt = AdamOptimizer(rnd.predictor.param_count(), 5e-4);
}

}  // namespace vff
