#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class ErrorKind {
  Domain,            // point outside dom h
  InvalidArgument,   // malformed inputs / parameters
  DegenerateActiveSet,
  SubproblemNotConverged,
  MoreauNotConverged,
  MissingLowerBound,
  AuditViolation,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

// log^+(x) = max{log x, 0}
inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

}  // namespace pbf
