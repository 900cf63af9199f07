#pragma once

#include <string>

#include "vff/rng.hpp"
#include "vff/types.hpp"

namespace vff {

// Behavior policy over joint actions. Uniform and Softmax are the
// analysis-facing kinds; EpsilonGreedy is training-facing only.
struct Policy {
  enum class Kind { kUniform, kEpsilonGreedy, kSoftmax };

  Kind kind = Kind::kUniform;
  double epsilon = 0.0;  // EpsilonGreedy
  double tau = 1.0;      // Softmax temperature

  static Policy uniform() { return {Kind::kUniform, 0.0, 1.0}; }
  static Policy epsilon_greedy(double eps);
  static Policy softmax(double tau);
};

// Per-agent softmax probabilities with max-subtraction (mandatory: small tau
// with |Q| of table scale overflows otherwise).
Vec agent_softmax(const QVector& q, int agent, double tau);

double joint_probability(const Policy& policy, const QVector& q, const JointAction& a);

JointAction sample_joint(const Policy& policy, const QVector& q, Rng& rng);

// Gradient of the joint Softmax probability mu(a | q) with respect to q.
// Per-agent score: d log pi_i(a_i) / d q[i,b] = (1[b = a_i] - pi_i(b)) / tau.
Vec policy_gradient(const Policy& policy, const QVector& q, const JointAction& a);

}  // namespace vff
