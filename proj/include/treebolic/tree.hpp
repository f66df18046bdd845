#pragma once

// The homogeneous tree T_p with a fixed reference end omega, in p-adic ball
// coordinates. A vertex at level m (= its horocycle index) is the closed ball
// B(c, p^-m) of Q_p; its predecessor is the ball one level down, its p
// successors are the balls B(c + j p^m, p^-(m+1)).
//
// p == 1 is the bi-infinite line graph: one vertex per level, centre fixed at 0.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "treebolic/errors.hpp"
#include "treebolic/padic.hpp"

namespace treebolic {

class TreeVertex {
 public:
  TreeVertex() = default;

  TreeVertex(const PadicRational& u, std::int64_t level)
      : p_(u.base()), level_(level), center_(canonical_ball_center(u, level)) {}

  // Vertex of the line graph (p == 1) or any tree at level m through centre 0.
  static TreeVertex on_axis(std::int64_t p, std::int64_t level) {
    if (p < 1) throw DomainError("TreeVertex: p must be >= 1");
    if (p == 1) {
      TreeVertex v;
      v.p_ = 1;
      v.level_ = level;
      return v;
    }
    return TreeVertex(PadicRational::zero(p), level);
  }
  // The root o: ball (0, level 0).
  static TreeVertex root(std::int64_t p) { return on_axis(p, 0); }

  std::int64_t p() const { return p_; }
  std::int64_t level() const { return level_; }
  double hor() const { return static_cast<double>(level_); }
  const PadicRational& center() const { return center_; }

  TreeVertex predecessor() const {
    if (p_ == 1) return on_axis(1, level_ - 1);
    return TreeVertex(center_, level_ - 1);
  }

  TreeVertex successor(std::int64_t j) const {
    if (j < 0 || j >= p_) throw DomainError("TreeVertex::successor: index out of range");
    if (p_ == 1) return on_axis(1, level_ + 1);
    return TreeVertex(center_ + PadicRational::integer(p_, j).shifted(level_), level_ + 1);
  }

  std::vector<TreeVertex> successors() const {
    std::vector<TreeVertex> out;
    out.reserve(static_cast<std::size_t>(p_));
    for (std::int64_t j = 0; j < p_; ++j) out.push_back(successor(j));
    return out;
  }

  // Index j such that this == predecessor().successor(j).
  std::int64_t child_index() const {
    if (p_ == 1) return 0;
    return digits(center_, level_ - 1, level_).front();
  }

  friend bool operator==(const TreeVertex& a, const TreeVertex& b) {
    return a.p_ == b.p_ && a.level_ == b.level_ && a.center_ == b.center_;
  }

  // "(center)@level"
  std::string to_string() const { return "(" + center_.to_string() + ")@" + std::to_string(level_); }
  friend std::ostream& operator<<(std::ostream& os, const TreeVertex& v) { return os << v.to_string(); }

 private:
  std::int64_t p_ = 2;
  std::int64_t level_ = 0;
  PadicRational center_;
};

// Point on the metric edge [v^-, v]; offset t in (0, 1] measured from v^-,
// t == 1 being v itself.
class TreePoint {
 public:
  TreePoint() = default;
  TreePoint(TreeVertex upper, double offset) : upper_(std::move(upper)), offset_(offset) {
    if (!(offset_ > 0.0 && offset_ <= 1.0)) throw DomainError("TreePoint: offset must lie in (0, 1]");
  }
  static TreePoint at(const TreeVertex& v) { return TreePoint(v, 1.0); }
  // The point at height h on the geodesic from v down to omega (h <= hor(v)).
  static TreePoint below(const TreeVertex& v, double h);

  const TreeVertex& upper() const { return upper_; }
  double offset() const { return offset_; }
  double hor() const { return static_cast<double>(upper_.level()) - 1.0 + offset_; }
  bool is_vertex() const { return offset_ == 1.0; }

  friend bool operator==(const TreePoint& a, const TreePoint& b) {
    return a.upper_ == b.upper_ && a.offset_ == b.offset_;
  }

 private:
  TreeVertex upper_;
  double offset_ = 1.0;
};

// Either the reference end omega or a rational end u of Q_p.
struct TreeEnd {
  std::optional<PadicRational> point;
  static TreeEnd omega() { return {}; }
  static TreeEnd at(PadicRational u) { return TreeEnd{std::move(u)}; }
  bool is_omega() const { return !point.has_value(); }
};

inline TreeVertex confluent(const TreeVertex& a, const TreeVertex& b) {
  if (a.p() != b.p()) throw DomainError("confluent: mismatched trees");
  std::int64_t j = std::min(a.level(), b.level());
  if (a.p() == 1) return TreeVertex::on_axis(1, j);
  const Valuation v = (a.center() - b.center()).valuation();
  if (!v.is_infinite()) j = std::min(j, v.value());
  return TreeVertex(a.center(), j);
}

// Graph distance hor(a) + hor(b) - 2 hor(a ^ b).
inline std::int64_t tree_distance(const TreeVertex& a, const TreeVertex& b) {
  return a.level() + b.level() - 2 * confluent(a, b).level();
}

// a is on the geodesic from omega to b (a == b included).
inline bool is_ancestor_or_equal(const TreeVertex& a, const TreeVertex& b) {
  if (a.p() != b.p()) throw DomainError("is_ancestor_or_equal: mismatched trees");
  if (a.level() > b.level()) return false;
  if (a.p() == 1) return true;
  return canonical_ball_center(b.center(), a.level()) == a.center();
}

inline TreePoint TreePoint::below(const TreeVertex& v, double h) {
  if (h > v.hor()) throw DomainError("TreePoint::below: height above the vertex");
  TreeVertex u = v;
  while (u.hor() - 1.0 >= h) u = u.predecessor();
  return TreePoint(u, h - (u.hor() - 1.0));
}

// Metric-tree distance between points (edge lengths 1).
inline double tree_distance(const TreePoint& a, const TreePoint& b) {
  if (a.upper() == b.upper()) return std::abs(a.offset() - b.offset());
  if (is_ancestor_or_equal(a.upper(), b.upper())) return b.hor() - a.hor();
  if (is_ancestor_or_equal(b.upper(), a.upper())) return a.hor() - b.hor();
  return a.hor() + b.hor() - 2.0 * confluent(a.upper(), b.upper()).hor();
}

inline double hor(const TreeVertex& v) { return v.hor(); }
inline double hor(const TreePoint& w) { return w.hor(); }

// w lies in the cone of v: v is on the geodesic from omega to w.
inline bool cone_contains(const TreeVertex& v, const TreeVertex& w) { return is_ancestor_or_equal(v, w); }

inline bool cone_contains(const TreeVertex& v, const TreeEnd& end) {
  if (end.is_omega()) return false;
  if (v.p() == 1) return true;
  if (end.point->base() != v.p()) throw DomainError("cone_contains: mismatched trees");
  return canonical_ball_center(*end.point, v.level()) == v.center();
}

// lambda*(boundary cone of v) = p^(-hor v).
inline double boundary_mass(const TreeVertex& v) {
  return std::pow(static_cast<double>(v.p()), -static_cast<double>(v.level()));
}

}  // namespace treebolic
