#pragma once

// Isometries of HT(q,p): the fibered product A(q,p) of Aff(H,q) with the
// p-adic affine maps of T_p, the reflection x -> -x, and the Baumslag-Solitar
// group BS(p) = <a, b | ab = b^p a> embedded diagonally when q == p.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "treebolic/errors.hpp"
#include "treebolic/padic.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/treebolic_space.hpp"

namespace treebolic {

// z -> q^n z + b.
struct AffH {
  double q = 2.0;
  std::int64_t n = 0;
  double b = 0.0;

  HPoint apply(const HPoint& z) const {
    const double s = std::pow(q, static_cast<double>(n));
    return HPoint(s * z.x + b, s * z.y);
  }
  friend bool operator==(const AffH&, const AffH&) = default;
};

// u -> p^k u + c on Q_p, hence on balls: B(u, p^-m) -> B(p^k u + c, p^-(m+k)).
// For p == 1 only the level shift k is meaningful.
struct AffT {
  std::int64_t p = 2;
  std::int64_t k = 0;
  PadicRational c;

  static AffT make(std::int64_t p, std::int64_t k, PadicRational c) {
    if (p >= 2 && c.base() != p) throw DomainError("AffT: translation has the wrong base");
    return AffT{p, k, p >= 2 ? std::move(c) : PadicRational{}};
  }
  static AffT identity(std::int64_t p) { return make(p, 0, p >= 2 ? PadicRational::zero(p) : PadicRational{}); }

  // Level shift Phi(gamma) = hor(gamma w) - hor(w).
  std::int64_t phi() const { return k; }

  TreeVertex apply(const TreeVertex& v) const {
    if (p == 1) return TreeVertex::on_axis(1, v.level() + k);
    return TreeVertex(v.center().shifted(k) + c, v.level() + k);
  }
  PadicRational apply(const PadicRational& u) const { return u.shifted(k) + c; }

  friend bool operator==(const AffT&, const AffT&) = default;
};

class AfElement {
 public:
  AfElement(AffH g, AffT gamma) : g_(std::move(g)), gamma_(std::move(gamma)) {
    if (g_.n != gamma_.k) throw DomainError("AfElement: level shifts of the two factors must agree");
  }
  // [b, gamma] coordinates of the semidirect product R x| Aff(T).
  static AfElement make(double q, std::int64_t p, std::int64_t n, double b, PadicRational c) {
    return AfElement(AffH{q, n, b}, AffT::make(p, n, std::move(c)));
  }
  static AfElement identity(double q, std::int64_t p) { return AfElement(AffH{q, 0, 0.0}, AffT::identity(p)); }

  const AffH& h_part() const { return g_; }
  const AffT& t_part() const { return gamma_; }
  std::int64_t phi() const { return gamma_.k; }
  double q() const { return g_.q; }
  std::int64_t p() const { return gamma_.p; }

  friend bool operator==(const AfElement&, const AfElement&) = default;

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "[n=" << g_.n << ", b=" << g_.b << ", c=" << gamma_.c.to_string() << "]";
    return os.str();
  }

 private:
  AffH g_;
  AffT gamma_;
};

inline void check_same_group(const AfElement& a, const AfElement& b) {
  if (a.q() != b.q() || a.p() != b.p()) throw DomainError("AfElement: mismatched (q, p)");
}

inline AfElement compose(const AfElement& a1, const AfElement& a2) {
  check_same_group(a1, a2);
  const AffH& g1 = a1.h_part();
  const AffH& g2 = a2.h_part();
  const AffT& t1 = a1.t_part();
  const AffT& t2 = a2.t_part();
  AffH g{g1.q, g1.n + g2.n, g1.b + std::pow(g1.q, static_cast<double>(g1.n)) * g2.b};
  AffT t = t1.p >= 2 ? AffT::make(t1.p, t1.k + t2.k, t1.c + t2.c.shifted(t1.k))
                     : AffT::make(1, t1.k + t2.k, PadicRational{});
  return AfElement(std::move(g), std::move(t));
}

inline AfElement operator*(const AfElement& a1, const AfElement& a2) { return compose(a1, a2); }

inline AfElement invert(const AfElement& a) {
  const AffH& g = a.h_part();
  const AffT& t = a.t_part();
  AffH gi{g.q, -g.n, -std::pow(g.q, static_cast<double>(-g.n)) * g.b};
  AffT ti = t.p >= 2 ? AffT::make(t.p, -t.k, -t.c.shifted(-t.k)) : AffT::make(1, -t.k, PadicRational{});
  return AfElement(std::move(gi), std::move(ti));
}

inline TreeVertex act(const AfElement& a, const TreeVertex& v) { return a.t_part().apply(v); }

inline TreePoint act(const AfElement& a, const TreePoint& w) {
  return TreePoint(a.t_part().apply(w.upper()), w.offset());
}

inline HTPoint act(const AfElement& a, const HTPoint& z) {
  const AffH& g = a.h_part();
  return HTPoint{std::pow(g.q, static_cast<double>(g.n)) * z.x + g.b, act(a, z.w)};
}

inline double modular_h(const AffH& g) { return std::pow(g.q, -static_cast<double>(g.n)); }
inline double modular_t(const AffT& t) { return std::pow(static_cast<double>(t.p), static_cast<double>(t.k)); }
// (p/q)^Phi.
inline double modular(const AfElement& a) {
  return std::pow(static_cast<double>(a.p()) / a.q(), static_cast<double>(a.phi()));
}
// Left Haar density q^-Phi in [b, gamma] coordinates.
inline double haar_density(const AfElement& a) { return std::pow(a.q(), -static_cast<double>(a.phi())); }

inline HTPoint reflect(const HTPoint& z) { return HTPoint{-z.x, z.w}; }

// ---------------------------------------------------------------------------
// BS(p) as the matrices (p^n, t) with t in Z[1/p]; a = (p, 0), b = (1, 1).

struct BsMatrix {
  std::int64_t n = 0;
  PadicRational t;

  static BsMatrix identity(std::int64_t p) { return BsMatrix{0, PadicRational::zero(p)}; }
  static BsMatrix gen_a(std::int64_t p) { return BsMatrix{1, PadicRational::zero(p)}; }
  static BsMatrix gen_b(std::int64_t p) { return BsMatrix{0, PadicRational::integer(p, 1)}; }

  friend BsMatrix operator*(const BsMatrix& x, const BsMatrix& y) {
    return BsMatrix{x.n + y.n, x.t + y.t.shifted(x.n)};
  }
  BsMatrix inverse() const { return BsMatrix{-n, -t.shifted(-n)}; }
  friend bool operator==(const BsMatrix&, const BsMatrix&) = default;
};

struct BsLetter {
  char gen = 'a';  // 'a' or 'b'
  std::int64_t power = 1;
  friend bool operator==(const BsLetter&, const BsLetter&) = default;
};

// Words such as "a b a^-1 b^-1", "ab", "b^3 a", "aB" (capitals are inverses).
inline std::vector<BsLetter> parse_bs_word(std::string_view word) {
  std::vector<BsLetter> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const char ch = word[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == '.') {
      ++i;
      continue;
    }
    BsLetter letter;
    switch (ch) {
      case 'a': letter = {'a', 1}; break;
      case 'b': letter = {'b', 1}; break;
      case 'A': letter = {'a', -1}; break;
      case 'B': letter = {'b', -1}; break;
      default: throw DomainError(std::string("bs word: unexpected character '") + ch + "'");
    }
    ++i;
    if (i < word.size() && word[i] == '^') {
      ++i;
      std::size_t start = i;
      if (i < word.size() && (word[i] == '-' || word[i] == '+')) ++i;
      while (i < word.size() && std::isdigit(static_cast<unsigned char>(word[i]))) ++i;
      const std::string exponent(word.substr(start, i - start));
      if (exponent.empty() || exponent == "-" || exponent == "+") throw DomainError("bs word: missing exponent");
      letter.power *= std::stoll(exponent);
    }
    out.push_back(letter);
  }
  return out;
}

inline BsMatrix evaluate_bs_word(const std::vector<BsLetter>& word, std::int64_t p) {
  if (p < 2) throw DomainError("bs word: p must be >= 2");
  BsMatrix acc = BsMatrix::identity(p);
  for (const BsLetter& l : word) {
    const BsMatrix g = l.gen == 'a' ? BsMatrix::gen_a(p) : BsMatrix::gen_b(p);
    const BsMatrix step = l.power >= 0 ? g : g.inverse();
    for (std::int64_t i = 0; i < std::abs(l.power); ++i) acc = acc * step;
  }
  return acc;
}

// Diagonal embedding into A(p, p).
inline AfElement embed_bs(const BsMatrix& m, std::int64_t p) {
  return AfElement::make(static_cast<double>(p), p, m.n, m.t.to_double(), m.t);
}

inline AfElement bs_word(std::string_view word, std::int64_t p) {
  return embed_bs(evaluate_bs_word(parse_bs_word(word), p), p);
}

}  // namespace treebolic
