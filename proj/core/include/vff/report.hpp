#pragma once

#include <string>
#include <vector>

#include "vff/config.hpp"
#include "vff/dynamics.hpp"
#include "vff/training.hpp"

namespace vff {

// Fixed-width text table in the reference layout: local values as headers
// ("A(7.4)"), joint values in the cells, one decimal place throughout.
std::string render_payoff_table(const std::vector<Vec>& agent_values,
                                const Mat& q_tot_table);

struct CommandResult {
  std::vector<std::string> files;  // paths written, relative to out_dir
};

// Train {unconstrained+sarsa, monotonic+qlearning, additive+qlearning} on the
// configured games and seeds; emit per-run text tables and a JSON summary
// with IGM flags and entrywise errors.
CommandResult cmd_reproduce_matrix(const KeyValueConfig& cfg,
                                   const std::string& out_dir);

// Single-method matrix training with per-step metric CSVs and model dumps.
CommandResult cmd_train_matrix(const KeyValueConfig& cfg, const std::string& out_dir);

// Zero-loss witnesses per greedy pattern; classification, temperature-scaling
// probes, gradient-gap probes, and escape statistics.
CommandResult cmd_dynamics(const KeyValueConfig& cfg, const std::string& out_dir);

// Gridworld method comparison across seeds with per-run metric CSVs and a
// cross-method summary (mean and interquartile range of success rates).
CommandResult cmd_train_gridworld(const KeyValueConfig& cfg,
                                  const std::string& out_dir);

// Shared config -> TrainConfig plumbing (also used by the test suites).
TrainConfig matrix_train_config(const KeyValueConfig& cfg, std::uint64_t seed);
TrainConfig gridworld_train_config(const KeyValueConfig& cfg, std::uint64_t seed,
                                   const std::string& method);
GridConfig gridworld_env_config(const KeyValueConfig& cfg);

double percentile(std::vector<double> values, double p);  // p in [0, 100]
std::string csv_double(double v);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace vff
