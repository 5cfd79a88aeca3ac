#include "tubqi/pattern.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tubqi {

ProjectiveSlope slope_of(const Vec2& v) {
  if (v.is_zero()) throw std::invalid_argument("slope_of: zero vector");
  Int g;
  mpz_gcd(g.get_mpz_t(), v.a.get_mpz_t(), v.b.get_mpz_t());
  Int a = v.a / g, b = v.b / g;
  if (a < 0 || (a == 0 && b < 0)) {
    a = -a;
    b = -b;
  }
  return ProjectiveSlope{a, b};
}

namespace {

// Divide the four entries by their gcd and fix the sign of the first nonzero.
void canonicalize(std::array<Int, 4>& m) {
  Int g = 0;
  for (const auto& x : m) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
  if (g == 0) throw std::logic_error("Moebius: zero matrix");
  for (auto& x : m) x /= g;
  for (const auto& x : m) {
    if (x != 0) {
      if (x < 0)
        for (auto& y : m) y = -y;
      break;
    }
  }
}

}  // namespace

Moebius Moebius::identity() { return Moebius{{1, 0, 0, 1}}; }

Moebius Moebius::from_entries(const Rational& a, const Rational& b, const Rational& c,
                              const Rational& d) {
  Int lcm = 1;
  for (const Rational* r : {&a, &b, &c, &d}) {
    Int den = r->denominator();
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
  }
  auto scale = [&](const Rational& r) -> Int { return Int(r.numerator() * (lcm / r.denominator())); };
  Moebius out{{scale(a), scale(b), scale(c), scale(d)}};
  canonicalize(out.m);
  if (out.det() == 0) throw std::invalid_argument("Moebius: singular matrix");
  return out;
}

Moebius Moebius::compose(const Moebius& o) const {
  Moebius out{{m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
               m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]}};
  canonicalize(out.m);
  return out;
}

Moebius Moebius::inverse() const {
  Moebius out{{m[3], -m[1], -m[2], m[0]}};
  canonicalize(out.m);
  return out;
}

ProjectiveSlope Moebius::apply(const ProjectiveSlope& s) const {
  Vec2 v{m[0] * s.a + m[1] * s.b, m[2] * s.a + m[3] * s.b};
  return slope_of(v);
}

Vec2 Moebius::apply_vec(const Vec2& v) const {
  return Vec2{m[0] * v.a + m[1] * v.b, m[2] * v.a + m[3] * v.b};
}

bool Moebius::operator<(const Moebius& o) const {
  for (int i = 0; i < 4; ++i) {
    int c = cmp(m[i], o.m[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

std::string Moebius::str() const {
  return "[" + m[0].get_str() + "," + m[1].get_str() + ";" + m[2].get_str() + "," +
         m[3].get_str() + "]";
}

bool Gram::positive_definite() const {
  return g11.sign() > 0 && (g11 * g22 - g12 * g12).sign() > 0;
}

Gram Gram::canonical() const {
  Int lcm = 1;
  for (const Rational* r : {&g11, &g12, &g22})
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), r->denominator().get_mpz_t());
  Int n11 = g11.numerator() * (lcm / g11.denominator());
  Int n12 = g12.numerator() * (lcm / g12.denominator());
  Int n22 = g22.numerator() * (lcm / g22.denominator());
  Int g = 0;
  for (const Int* x : {&n11, &n12, &n22})
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x->get_mpz_t());
  if (g == 0) throw std::logic_error("Gram: zero form");
  return Gram{Rational(n11, g), Rational(n12, g), Rational(n22, g)};
}

std::string Gram::str() const {
  return "[" + g11.str() + "," + g12.str() + ";" + g12.str() + "," + g22.str() + "]";
}

Moebius moebius_through(const std::array<ProjectiveSlope, 3>& src,
                        const std::array<ProjectiveSlope, 3>& dst) {
  // P sends e1, e2, e1+e2 to the three source lines; same for Q and targets;
  // the answer is Q P^{-1}.
  auto standardize = [](const std::array<ProjectiveSlope, 3>& t) {
    Rational det(t[0].a * t[1].b - t[0].b * t[1].a);
    if (det.sign() == 0) throw std::invalid_argument("moebius_through: coincident slopes");
    // c1 * t0 + c2 * t1 = t2 by Cramer's rule.
    Rational c1 = Rational(t[2].a * t[1].b - t[2].b * t[1].a) / det;
    Rational c2 = Rational(t[0].a * t[2].b - t[0].b * t[2].a) / det;
    if (c1.sign() == 0 || c2.sign() == 0)
      throw std::invalid_argument("moebius_through: coincident slopes");
    return std::array<Rational, 4>{c1 * Rational(t[0].a), c2 * Rational(t[1].a),
                                   c1 * Rational(t[0].b), c2 * Rational(t[1].b)};
  };
  auto p = standardize(src);
  auto q = standardize(dst);
  Rational pdet = p[0] * p[3] - p[1] * p[2];
  std::array<Rational, 4> pinv{p[3] / pdet, -p[1] / pdet, -p[2] / pdet, p[0] / pdet};
  return Moebius::from_entries(q[0] * pinv[0] + q[1] * pinv[2], q[0] * pinv[1] + q[1] * pinv[3],
                               q[2] * pinv[0] + q[3] * pinv[2], q[2] * pinv[1] + q[3] * pinv[3]);
}

namespace {

bool maps_onto(const Moebius& m, const std::vector<ProjectiveSlope>& src,
               const std::vector<ProjectiveSlope>& dst) {
  for (const auto& s : src) {
    ProjectiveSlope t = m.apply(s);
    if (!std::binary_search(dst.begin(), dst.end(), t)) return false;
  }
  return true;  // injective on distinct lines, so onto when |src| == |dst|
}

std::vector<Moebius> equivalences_by_triples(const EdgePattern& p, const EdgePattern& q) {
  std::vector<ProjectiveSlope> sorted_q = q.slopes;
  std::sort(sorted_q.begin(), sorted_q.end());
  std::array<ProjectiveSlope, 3> base{p.slopes[0], p.slopes[1], p.slopes[2]};
  std::set<Moebius> found;
  size_t n = q.slopes.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        Moebius m = moebius_through(base, {q.slopes[i], q.slopes[j], q.slopes[k]});
        if (maps_onto(m, p.slopes, sorted_q)) found.insert(m);
      }
  return std::vector<Moebius>(found.begin(), found.end());
}

}  // namespace

std::vector<Moebius> symmetry_group(const EdgePattern& p) {
  if (p.slopes.size() < 3)
    throw std::invalid_argument("symmetry_group: need at least 3 slopes");
  return equivalences_by_triples(p, p);
}

std::vector<Moebius> linear_equivalences(const EdgePattern& p, const EdgePattern& q) {
  if (p.slopes.size() != q.slopes.size()) return {};
  if (p.slopes.size() == 2) {
    // Two-line patterns are never rigid; offer both family bijections.
    auto basis = [](const EdgePattern& e) {
      return std::array<Rational, 4>{Rational(e.slopes[0].a), Rational(e.slopes[1].a),
                                     Rational(e.slopes[0].b), Rational(e.slopes[1].b)};
    };
    auto bp = basis(p);
    Rational det = bp[0] * bp[3] - bp[1] * bp[2];
    std::array<Rational, 4> pinv{bp[3] / det, -bp[1] / det, -bp[2] / det, bp[0] / det};
    auto bq = basis(q);
    auto mul = [&](const std::array<Rational, 4>& a) {
      return Moebius::from_entries(a[0] * pinv[0] + a[1] * pinv[2], a[0] * pinv[1] + a[1] * pinv[3],
                                   a[2] * pinv[0] + a[3] * pinv[2], a[2] * pinv[1] + a[3] * pinv[3]);
    };
    Moebius direct = mul(bq);
    Moebius swapped = mul({bq[1], bq[0], bq[3], bq[2]});
    std::vector<Moebius> out{direct, swapped};
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  return equivalences_by_triples(p, q);
}

Gram symmetric_gram(const EdgePattern& p) {
  if (p.slopes.size() < 2) throw std::invalid_argument("symmetric_gram: need at least 2 slopes");
  if (p.slopes.size() == 2) {
    // The form making the two primitive slope vectors orthonormal: B^{-T}B^{-1}.
    Rational a0(p.slopes[0].a), b0(p.slopes[0].b), a1(p.slopes[1].a), b1(p.slopes[1].b);
    Rational det = a0 * b1 - a1 * b0;
    // B^{-1} rows: (b1, -a1)/det, (-b0, a0)/det.
    Rational d2 = det * det;
    Gram g{(b1 * b1 + b0 * b0) / d2, (-(b1 * a1) - b0 * a0) / d2, (a1 * a1 + a0 * a0) / d2};
    return g.canonical();
  }
  std::vector<Moebius> group = symmetry_group(p);
  Rational s11(0), s12(0), s22(0);
  for (const auto& m : group) {
    Rational det(m.det());
    Rational ad = det.abs();
    // M^T M / |det M|
    s11 += Rational(m.m[0] * m.m[0] + m.m[2] * m.m[2]) / ad;
    s12 += Rational(m.m[0] * m.m[1] + m.m[2] * m.m[3]) / ad;
    s22 += Rational(m.m[1] * m.m[1] + m.m[3] * m.m[3]) / ad;
  }
  return Gram{s11, s12, s22}.canonical();
}

Rational length_sq(const Gram& g, const Vec2& w) {
  if (w.is_zero()) throw std::invalid_argument("length_sq: zero vector");
  Rational a(w.a), b(w.b);
  Rational out = g.g11 * a * a + g.g12 * a * b * Rational(2) + g.g22 * b * b;
  if (out.sign() <= 0) throw std::logic_error("length_sq: form not positive definite");
  return out;
}

LogValue edge_height(const Gram& g0, const Gram& g1, const Vec2& w0, const Vec2& w1) {
  return LogValue::half_log2_of(length_sq(g0, w0) / length_sq(g1, w1));
}

Gram transform_gram(const Gram& g, const Moebius& b) {
  Rational det(b.det());
  std::array<Rational, 4> inv{Rational(b.m[3]) / det, Rational(-b.m[1]) / det,
                              Rational(-b.m[2]) / det, Rational(b.m[0]) / det};
  // B^{-T} g B^{-1}; entries of B^{-1} are inv row-major.
  Rational i11 = inv[0], i12 = inv[1], i21 = inv[2], i22 = inv[3];
  Rational h11 = g.g11 * i11 * i11 + Rational(2) * g.g12 * i11 * i21 + g.g22 * i21 * i21;
  Rational h12 = g.g11 * i11 * i12 + g.g12 * (i11 * i22 + i12 * i21) + g.g22 * i21 * i22;
  Rational h22 = g.g11 * i12 * i12 + Rational(2) * g.g12 * i12 * i22 + g.g22 * i22 * i22;
  return Gram{h11, h12, h22};
}

}  // namespace tubqi
