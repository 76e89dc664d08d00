#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hoslab {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a documented precondition. `field` names
// the offending parameter so the CLI can echo it back. Messages that already
// start with the field name are kept verbatim.
class InvalidArgument : public Error
{
 public:
  InvalidArgument(std::string field, const std::string& what)
      : Error(what.rfind(field, 0) == 0 ? what : field + ": " + what)
      , field_(std::move(field))
  {
  }

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Two objects that must share a BasisGrid do not.
class BasisMismatch : public Error
{
 public:
  using Error::Error;
};

// free_propagate was asked for a time its output resolution cannot represent.
class AliasingGuard : public Error
{
 public:
  using Error::Error;
};

// Picard iteration failed: either a non-finite / runaway value appeared at a
// time node, or the iteration budget ran out.
class SolverFailure : public Error
{
 public:
  enum class Kind { divergence, max_iterations };

  SolverFailure(Kind kind, const std::string& what, int time_node,
                std::vector<double> history)
      : Error(what)
      , kind_(kind)
      , time_node_(time_node)
      , history_(std::move(history))
  {
  }

  Kind kind() const noexcept { return kind_; }
  // Offending node for divergence, -1 otherwise.
  int time_node() const noexcept { return time_node_; }
  const std::vector<double>& contraction_history() const noexcept { return history_; }

 private:
  Kind kind_;
  int time_node_;
  std::vector<double> history_;
};

// A Monte Carlo estimate is too noisy to support a verdict.
class UnstableEstimate : public Error
{
 public:
  using Error::Error;
};

}  // namespace hoslab
