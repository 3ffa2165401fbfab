#pragma once

#include "invpend/types.hpp"

#include <stdexcept>
#include <string>

namespace invpend {

/// Fewer path samples than a cubic periodic spline needs.
class InsufficientData : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The equations of motion are singular at |x| = 1 (rod on the floor).
class SingularityError : public std::domain_error {
  public:
    SingularityError(const std::string& what, PhaseState state)
        : std::domain_error(what), state_(std::move(state)) {}
    const PhaseState& state() const { return state_; }

  private:
    PhaseState state_;
};

class StepBudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class StepSizeUnderflow : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A trajectory reached the fall threshold before the requested end time.
class FallError : public std::runtime_error {
  public:
    FallError(const std::string& what, double fall_time)
        : std::runtime_error(what), fall_time_(fall_time) {}
    double fall_time() const { return fall_time_; }

  private:
    double fall_time_;
};

class NewtonFailure : public std::runtime_error {
  public:
    enum class Kind { IllConditioned, NoConvergence };
    NewtonFailure(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

class ContinuationStuck : public std::runtime_error {
  public:
    ContinuationStuck(const std::string& what, double last_good_lambda)
        : std::runtime_error(what), last_good_lambda_(last_good_lambda) {}
    double last_good_lambda() const { return last_good_lambda_; }

  private:
    double last_good_lambda_;
};

/// Raised when no b below the configured cap yields a verified bound set.
class VerificationFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A curvature check was handed a point that is not on the required face.
class InvalidSample : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace invpend
