#pragma once

#include <stdexcept>
#include <string>

namespace vff {

struct InvalidActionError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateGameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedPolicyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fit did not reach the requested tolerance within the step budget.
struct FitFailureError : std::runtime_error {
  FitFailureError(const std::string& what, double best_error)
      : std::runtime_error(what), best_error(best_error) {}
  double best_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingDivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vff
