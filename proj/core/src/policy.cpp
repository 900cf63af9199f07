#include "vff/policy.hpp"

#include <cmath>

#include "vff/errors.hpp"
#include "vff/mixer.hpp"

namespace vff {

Policy Policy::epsilon_greedy(double eps) {
  if (eps < 0.0 || eps > 1.0)
    throw ParameterError("epsilon must lie in [0, 1]");
  return {Kind::kEpsilonGreedy, eps, 1.0};
}

Policy Policy::softmax(double tau) {
  if (!(tau > 0.0)) throw ParameterError("softmax temperature must be > 0");
  return {Kind::kSoftmax, 0.0, tau};
}

Vec agent_softmax(const QVector& q, int agent, double tau) {
  if (!(tau > 0.0)) throw ParameterError("softmax temperature must be > 0");
  const int m = q.count(agent);
  Vec z(m);
  const double mx = q.agent_slice(agent).maxCoeff();
  for (int b = 0; b < m; ++b) z[b] = std::exp((q(agent, b) - mx) / tau);
  return z / z.sum();
}

double joint_probability(const Policy& policy, const QVector& q, const JointAction& a) {
  if (a.size() != q.n_agents())
    throw DimensionError("joint_probability: arity mismatch");
  switch (policy.kind) {
    case Policy::Kind::kUniform: {
      return 1.0 / static_cast<double>(joint_action_count(q.action_counts()));
    }
    case Policy::Kind::kEpsilonGreedy: {
      const JointAction g = greedy_joint(q);
      double prob = 1.0;
      for (int i = 0; i < q.n_agents(); ++i) {
        const double base = policy.epsilon / static_cast<double>(q.count(i));
        prob *= base + (a[i] == g[i] ? 1.0 - policy.epsilon : 0.0);
      }
      return prob;
    }
    case Policy::Kind::kSoftmax: {
      double prob = 1.0;
      for (int i = 0; i < q.n_agents(); ++i)
        prob *= agent_softmax(q, i, policy.tau)[a[i]];
      return prob;
    }
  }
  return 0.0;
}

JointAction sample_joint(const Policy& policy, const QVector& q, Rng& rng) {
  const int n = q.n_agents();
  JointAction a(std::vector<int>(static_cast<std::size_t>(n), 0));
  switch (policy.kind) {
    case Policy::Kind::kUniform: {
      for (int i = 0; i < n; ++i) a[i] = rng.uniform_int(q.count(i));
      return a;
    }
    case Policy::Kind::kEpsilonGreedy: {
      const JointAction g = greedy_joint(q);
      for (int i = 0; i < n; ++i) {
        if (rng.uniform() < policy.epsilon)
          a[i] = rng.uniform_int(q.count(i));
        else
          a[i] = g[i];
      }
      return a;
    }
    case Policy::Kind::kSoftmax: {
      for (int i = 0; i < n; ++i) {
        const Vec pi = agent_softmax(q, i, policy.tau);
        double u = rng.uniform();
        int pick = q.count(i) - 1;
        double acc = 0.0;
        for (int b = 0; b < q.count(i); ++b) {
          acc += pi[b];
          if (u < acc) {
            pick = b;
            break;
          }
        }
        a[i] = pick;
      }
      return a;
    }
  }
  return a;
}

Vec policy_gradient(const Policy& policy, const QVector& q, const JointAction& a) {
  if (policy.kind != Policy::Kind::kSoftmax)
    throw UnsupportedPolicyError(
        "policy_gradient: only the Softmax policy is differentiable");
  const int n = q.n_agents();
  double mu = 1.0;
  std::vector<Vec> pis(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pis[static_cast<std::size_t>(i)] = agent_softmax(q, i, policy.tau);
    mu *= pis[static_cast<std::size_t>(i)][a[i]];
  }
  Vec grad(q.size());
  for (int i = 0; i < n; ++i) {
    const Vec& pi = pis[static_cast<std::size_t>(i)];
    for (int b = 0; b < q.count(i); ++b) {
      const double score = ((b == a[i] ? 1.0 : 0.0) - pi[b]) / policy.tau;
      grad[q.offset(i) + b] = mu * score;
    }
  }
  return grad;
}

}  // namespace vff
