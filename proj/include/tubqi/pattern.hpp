#pragma once

#include "tubqi/logvalue.hpp"
#include "tubqi/model.hpp"
#include "tubqi/rational.hpp"

#include <array>
#include <string>
#include <vector>

namespace tubqi {

// A line through the origin: coprime (a,b) with a > 0, or exactly (0,1).
struct ProjectiveSlope {
  Int a, b;

  bool operator==(const ProjectiveSlope& o) const { return a == o.a && b == o.b; }
  bool operator!=(const ProjectiveSlope& o) const { return !(*this == o); }
  bool operator<(const ProjectiveSlope& o) const {
    int c = cmp(a, o.a);
    if (c != 0) return c < 0;
    return cmp(b, o.b) < 0;
  }
  std::string str() const { return "(" + a.get_str() + ":" + b.get_str() + ")"; }
};

ProjectiveSlope slope_of(const Vec2& v);

struct EdgePattern {
  int vertex = -1;
  std::vector<ProjectiveSlope> slopes;  // distinct, canonically ordered
};

// Element of PGL2(Q) as an integer matrix [[a,b],[c,d]], gcd 1, first nonzero
// entry positive, det != 0.
struct Moebius {
  std::array<Int, 4> m;  // row major: a b / c d

  static Moebius identity();
  static Moebius from_entries(const Rational& a, const Rational& b, const Rational& c,
                              const Rational& d);

  Int det() const { return m[0] * m[3] - m[1] * m[2]; }
  Moebius compose(const Moebius& o) const;  // this ∘ o
  Moebius inverse() const;
  ProjectiveSlope apply(const ProjectiveSlope& s) const;
  Vec2 apply_vec(const Vec2& v) const;

  bool operator==(const Moebius& o) const { return m == o.m; }
  bool operator<(const Moebius& o) const;
  std::string str() const;
};

// Symmetric positive-definite form, canonically scaled so that the three
// entries are integers with gcd 1.
struct Gram {
  Rational g11, g12, g22;

  static Gram identity() { return Gram{Rational(1), Rational(0), Rational(1)}; }
  Gram scaled(const Rational& c) const { return Gram{g11 * c, g12 * c, g22 * c}; }
  Gram canonical() const;
  bool positive_definite() const;
  bool operator==(const Gram& o) const { return g11 == o.g11 && g12 == o.g12 && g22 == o.g22; }
  std::string str() const;
};

// The unique projective map sending three pairwise-distinct source slopes to
// three pairwise-distinct target slopes.
Moebius moebius_through(const std::array<ProjectiveSlope, 3>& src,
                        const std::array<ProjectiveSlope, 3>& dst);

// Full finite subgroup of PGL2(Q) preserving the slope set, |slopes| >= 3.
std::vector<Moebius> symmetry_group(const EdgePattern& p);

// All projective maps carrying p.slopes onto q.slopes; for 2-line patterns
// the two maps realizing both family bijections.
std::vector<Moebius> linear_equivalences(const EdgePattern& p, const EdgePattern& q);

// Averaged invariant metric for the pattern (identity for a trivial symmetry
// group, exact orthonormalizing form for 2-line patterns).
Gram symmetric_gram(const EdgePattern& p);

Rational length_sq(const Gram& g, const Vec2& w);

// Height change across an edge traversed end0 -> end1:
// (1/2)log2( l0^2 / l1^2 ) = -log2(l1/l0).
LogValue edge_height(const Gram& g0, const Gram& g1, const Vec2& w0, const Vec2& w1);

// g' = B^{-T} g B^{-1}, exact.
Gram transform_gram(const Gram& g, const Moebius& b);

}  // namespace tubqi
