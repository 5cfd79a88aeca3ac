#pragma once

#include <gmpxx.h>

#include <string>

namespace tubqi {

using Int = mpz_class;

// Arbitrary-precision rational, always stored reduced with a positive
// denominator (mpq_class canonical form).
class Rational {
public:
  Rational() : q_(0) {}
  Rational(long n) : q_(n) {}
  Rational(const Int& n) : q_(n) {}
  // Accept integer gmp expression templates (e.g. products of Ints).
  template <class U>
  Rational(const __gmp_expr<mpz_t, U>& e) : q_(Int(e)) {}
  Rational(long num, long den);
  Rational(const Int& num, const Int& den);

  const Int numerator() const { return q_.get_num(); }
  const Int denominator() const { return q_.get_den(); }

  Rational operator+(const Rational& o) const { return Rational(q_ + o.q_); }
  Rational operator-(const Rational& o) const { return Rational(q_ - o.q_); }
  Rational operator*(const Rational& o) const { return Rational(q_ * o.q_); }
  Rational operator/(const Rational& o) const;
  Rational operator-() const { return Rational(mpq_class(-q_)); }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }

  bool operator==(const Rational& o) const { return q_ == o.q_; }
  bool operator!=(const Rational& o) const { return q_ != o.q_; }
  bool operator<(const Rational& o) const { return q_ < o.q_; }
  bool operator<=(const Rational& o) const { return q_ <= o.q_; }
  bool operator>(const Rational& o) const { return q_ > o.q_; }
  bool operator>=(const Rational& o) const { return q_ >= o.q_; }

  int sign() const { return sgn(q_); }
  Rational inverse() const;
  Rational pow(unsigned long e) const;
  Rational abs() const { return sign() < 0 ? -*this : *this; }

  std::string str() const;       // "n/d", or "n" when d == 1
  double to_double() const;

private:
  explicit Rational(mpq_class q) : q_(std::move(q)) {}
  mpq_class q_;
};

}  // namespace tubqi
