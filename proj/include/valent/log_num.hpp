#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <utility>

#include "valent/errors.hpp"

namespace valent {

// A nonnegative real stored as its natural logarithm. Zero is -inf.
// Keeps magnitudes like n^{-pn} representable long after doubles underflow.
class LogNum {
 public:
  constexpr LogNum() = default;

  static LogNum from_log(double log_value) {
    if (std::isnan(log_value) || log_value == std::numeric_limits<double>::infinity()) {
      throw DomainError("LogNum: log value must be finite or -inf");
    }
    LogNum r;
    r.log_ = log_value;
    return r;
  }

  static LogNum from_value(double value) {
    if (!(value >= 0.0) || std::isinf(value)) {
      throw DomainError("LogNum: value must be finite and nonnegative");
    }
    return from_log(std::log(value));
  }

  static constexpr LogNum zero() { return LogNum{}; }
  static LogNum one() { return from_log(0.0); }

  double log() const { return log_; }
  double value() const { return std::exp(log_); }
  bool is_zero() const { return log_ == kNegInf; }

  // log-sum-exp in the max-rescaled form
  friend LogNum operator+(LogNum a, LogNum b) {
    if (a.log_ < b.log_) std::swap(a, b);
    if (b.is_zero()) return a;
    LogNum r;
    r.log_ = a.log_ + std::log1p(std::exp(b.log_ - a.log_));
    return r;
  }
  LogNum& operator+=(LogNum other) { return *this = *this + other; }

  friend LogNum operator*(LogNum a, LogNum b) {
    if (a.is_zero() || b.is_zero()) return zero();
    LogNum r;
    r.log_ = a.log_ + b.log_;
    return r;
  }
  LogNum& operator*=(LogNum other) { return *this = *this * other; }

  friend LogNum operator/(LogNum a, LogNum b) {
    if (b.is_zero()) throw DomainError("LogNum: division by zero");
    if (a.is_zero()) return zero();
    return from_log(a.log_ - b.log_);
  }

  friend bool operator==(LogNum a, LogNum b) { return a.log_ == b.log_; }
  friend std::partial_ordering operator<=>(LogNum a, LogNum b) { return a.log_ <=> b.log_; }

 private:
  static constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double log_ = kNegInf;
};

}  // namespace valent
