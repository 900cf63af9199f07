#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <string>
#include <vector>

#include "vff/errors.hpp"

namespace vff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One action index per agent.
struct JointAction {
  std::vector<int> actions;

  JointAction() = default;
  explicit JointAction(std::vector<int> a) : actions(std::move(a)) {}
  JointAction(std::initializer_list<int> a) : actions(a) {}

  int size() const { return static_cast<int>(actions.size()); }
  int operator[](int i) const { return actions[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return actions[static_cast<std::size_t>(i)]; }

  bool operator==(const JointAction& o) const { return actions == o.actions; }
  bool operator!=(const JointAction& o) const { return !(*this == o); }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < size(); ++i) {
      if (i) s += ",";
      s += std::to_string(actions[static_cast<std::size_t>(i)]);
    }
    return s + ")";
  }
};

// Concatenation of all agents' local action values, with per-agent slices
// recoverable through the action-count layout.
class QVector {
 public:
  QVector() = default;

  explicit QVector(std::vector<int> action_counts)
      : counts_(std::move(action_counts)) {
    init_offsets();
    values_ = Vec::Zero(total_);
  }

  QVector(std::vector<int> action_counts, Vec values)
      : counts_(std::move(action_counts)), values_(std::move(values)) {
    init_offsets();
    if (values_.size() != total_)
      throw DimensionError("QVector: value length does not match action counts");
  }

  double operator()(int agent, int action) const {
    return values_[index(agent, action)];
  }
  double& operator()(int agent, int action) {
    return values_[index(agent, action)];
  }

  const Vec& flat() const { return values_; }
  Vec& flat() { return values_; }

  int n_agents() const { return static_cast<int>(counts_.size()); }
  int count(int agent) const { return counts_[static_cast<std::size_t>(agent)]; }
  int offset(int agent) const { return offsets_[static_cast<std::size_t>(agent)]; }
  int size() const { return total_; }
  const std::vector<int>& action_counts() const { return counts_; }

  Eigen::VectorBlock<const Vec> agent_slice(int agent) const {
    return values_.segment(offset(agent), count(agent));
  }

  bool same_layout(const QVector& o) const { return counts_ == o.counts_; }

 private:
  int index(int agent, int action) const {
    if (agent < 0 || agent >= n_agents() || action < 0 || action >= count(agent))
      throw InvalidActionError("QVector: (agent, action) out of range");
    return offset(agent) + action;
  }

  void init_offsets() {
    offsets_.resize(counts_.size());
    int acc = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      offsets_[i] = acc;
      acc += counts_[i];
    }
    total_ = acc;
  }

  std::vector<int> counts_;
  std::vector<int> offsets_;
  int total_ = 0;
  Vec values_;
};

// Enumerate all joint actions in row-major order (last agent fastest) and
// call fn(const JointAction&) for each.
template <typename Fn>
void for_each_joint_action(const std::vector<int>& action_counts, Fn&& fn) {
  const int n = static_cast<int>(action_counts.size());
  JointAction a(std::vector<int>(static_cast<std::size_t>(n), 0));
  while (true) {
    fn(const_cast<const JointAction&>(a));
    int i = n - 1;
    while (i >= 0) {
      if (++a[i] < action_counts[static_cast<std::size_t>(i)]) break;
      a[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

inline long joint_action_count(const std::vector<int>& action_counts) {
  long k = 1;
  for (int c : action_counts) k *= c;
  return k;
}

}  // namespace vff
