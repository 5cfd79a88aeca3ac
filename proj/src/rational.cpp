#include "tubqi/rational.hpp"

#include <stdexcept>

namespace tubqi {

Rational::Rational(long num, long den) : q_(num, den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  q_.canonicalize();
}

Rational::Rational(const Int& num, const Int& den) : q_(num, den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  q_.canonicalize();
}

Rational Rational::operator/(const Rational& o) const {
  if (o.sign() == 0) throw std::invalid_argument("Rational: division by zero");
  return Rational(mpq_class(q_ / o.q_));
}

Rational Rational::inverse() const {
  if (sign() == 0) throw std::invalid_argument("Rational: inverse of zero");
  return Rational(mpq_class(1 / q_));
}

Rational Rational::pow(unsigned long e) const {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), q_.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), q_.get_den().get_mpz_t(), e);
  return Rational(num, den);
}

std::string Rational::str() const {
  if (q_.get_den() == 1) return q_.get_num().get_str();
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

double Rational::to_double() const { return q_.get_d(); }

}  // namespace tubqi
