#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppcform {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Laplacian (or a matrix derived from it) is numerically singular.
class DegenerateTopology : public Error {
 public:
  using Error::Error;
};

/// Auxiliary signal has eaten one side of the tracking corridor.
class CorridorCollapse : public Error {
 public:
  using Error::Error;
};

/// Asymmetric transform called with a non-positive corridor half-width.
class BoundaryDomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Commanded vertical specific force too small to define a thrust direction.
class ThrustDegenerate : public Error {
 public:
  using Error::Error;
};

class SingularOffset : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Scenario text could not be parsed; carries a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// One failed check, addressed by a JSON-pointer-like field path.
struct ValidationIssue {
  std::string path;
  std::string message;
};

/// Every validation failure found in a scenario, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues)
      : Error(summarize(issues)), issues_(std::move(issues)) {}
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<ValidationIssue>& issues) {
    std::string out = std::to_string(issues.size()) + " validation issue(s)";
    for (const auto& issue : issues) out += "\n  " + issue.path + ": " + issue.message;
    return out;
  }
  std::vector<ValidationIssue> issues_;
};

/// A run aborted mid-simulation; names the agent, axis and time.
class SimulationAborted : public Error {
 public:
  SimulationAborted(const std::string& cause, int agent, int axis, double t)
      : Error(cause + " (agent " + std::to_string(agent) + ", axis " +
              std::to_string(axis) + ", t=" + std::to_string(t) + ")"),
        agent_(agent),
        axis_(axis),
        t_(t) {}
  int agent() const noexcept { return agent_; }
  int axis() const noexcept { return axis_; }
  double time() const noexcept { return t_; }

 private:
  int agent_;
  int axis_;
  double t_;
};

}  // namespace ppcform
