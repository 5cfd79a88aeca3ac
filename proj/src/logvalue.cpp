#include "tubqi/logvalue.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tubqi {

LogValue LogValue::half_log2_of(const Rational& q) {
  if (q.sign() <= 0) throw std::invalid_argument("LogValue: ratio must be positive");
  return LogValue(q);
}

LogValue LogValue::integer(long n) {
  Rational four(4);
  if (n >= 0) return LogValue(four.pow(static_cast<unsigned long>(n)));
  return LogValue(four.pow(static_cast<unsigned long>(-n)).inverse());
}

LogValue LogValue::operator+(const LogValue& o) const { return LogValue(q_ * o.q_); }
LogValue LogValue::operator-(const LogValue& o) const { return LogValue(q_ / o.q_); }
LogValue LogValue::operator-() const { return LogValue(q_.inverse()); }

LogValue LogValue::scaled(long n) const {
  if (n >= 0) return LogValue(q_.pow(static_cast<unsigned long>(n)));
  return LogValue(q_.pow(static_cast<unsigned long>(-n)).inverse());
}

int LogValue::sign() const {
  // sign of log(q) = sign of (num - den)
  return cmp(q_.numerator(), q_.denominator());
}

double LogValue::to_double() const {
  // log2 via mantissa/exponent split; safe for huge integers, display only.
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, q_.numerator().get_mpz_t());
  double md = mpz_get_d_2exp(&ed, q_.denominator().get_mpz_t());
  return 0.5 * ((std::log2(mn) + static_cast<double>(en)) -
                (std::log2(md) + static_cast<double>(ed)));
}

std::string LogValue::str() const { return "(1/2)log2(" + q_.str() + ")"; }

std::string LogValue::decimal() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", to_double());
  return buf;
}

}  // namespace tubqi
