#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace symcap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline constexpr double kPi = 3.14159265358979323846;

// Bad input: malformed specs, mismatched dimensions, nonpositive parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not deliver a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Body grammar or config text could not be parsed. Line/column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        message_(what),
        line_(line),
        column_(column) {}
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

// Monte Carlo (or otherwise error-barred) scalar.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
};

inline Estimate operator-(const Estimate& a, const Estimate& b) {
  // independent errors
  return {a.value - b.value, std::hypot(a.std_error, b.std_error), std::min(a.count, b.count)};
}

// |a - b| <= k * sqrt(sa^2 + sb^2)
inline bool agree(const Estimate& a, const Estimate& b, double k = 3.0) {
  return std::abs(a.value - b.value) <= k * std::hypot(a.std_error, b.std_error);
}

}  // namespace symcap
