#pragma once

#include "tubqi/rational.hpp"

#include <string>

namespace tubqi {

// Exact carrier for heights and height errors: the real number (1/2)*log2(q)
// for a positive rational q.  Addition multiplies the q's, so the type is a
// totally ordered abelian group with no floating point anywhere.
class LogValue {
public:
  LogValue() : q_(1) {}  // zero height
  static LogValue half_log2_of(const Rational& q);
  // n as an exact height, i.e. q = 4^n for integer n.
  static LogValue integer(long n);

  const Rational& ratio() const { return q_; }

  LogValue operator+(const LogValue& o) const;
  LogValue operator-(const LogValue& o) const;
  LogValue operator-() const;
  LogValue scaled(long n) const;  // n * value, n may be negative

  bool operator==(const LogValue& o) const { return q_ == o.q_; }
  bool operator!=(const LogValue& o) const { return q_ != o.q_; }
  bool operator<(const LogValue& o) const { return q_ < o.q_; }
  bool operator<=(const LogValue& o) const { return q_ <= o.q_; }
  bool operator>(const LogValue& o) const { return q_ > o.q_; }
  bool operator>=(const LogValue& o) const { return q_ >= o.q_; }

  bool is_zero() const { return q_ == Rational(1); }
  int sign() const;

  double to_double() const;      // display only
  std::string str() const;       // exact, e.g. "(1/2)log2(16)"
  std::string decimal() const;   // display only

private:
  explicit LogValue(Rational q) : q_(std::move(q)) {}
  Rational q_;  // > 0
};

}  // namespace tubqi
