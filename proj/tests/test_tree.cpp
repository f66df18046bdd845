#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include "support.hpp"
#include "treebolic/tree.hpp"

using namespace treebolic;

namespace {

// Truncated tree grown from a top vertex by explicit child words; BFS gives
// graph distances without touching valuations or confluents.
struct Truncation {
  std::vector<TreeVertex> vertices;
  std::vector<std::vector<int>> adj;

  Truncation(const TreeVertex& top, int depth) {
    vertices.push_back(top);
    adj.emplace_back();
    std::vector<int> frontier{0};
    for (int d = 0; d < depth; ++d) {
      std::vector<int> next;
      for (int id : frontier) {
        for (std::int64_t j = 0; j < top.p(); ++j) {
          const int child = static_cast<int>(vertices.size());
          vertices.push_back(vertices[id].successor(j));
          adj.emplace_back();
          adj[id].push_back(child);
          adj[child].push_back(id);
          next.push_back(child);
        }
      }
      frontier = std::move(next);
    }
  }

  std::vector<int> bfs(int src) const {
    std::vector<int> dist(vertices.size(), -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int w : adj[u])
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
    }
    return dist;
  }
};

}  // namespace

TEST(Tree, RootAndSuccessors) {
  const auto o = TreeVertex::root(2);
  const auto kids = o.successors();
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0], TreeVertex(PadicRational::zero(2), 1));
  EXPECT_EQ(kids[1], TreeVertex(PadicRational::integer(2, 1), 1));
  EXPECT_EQ(kids[1].predecessor(), o);
  EXPECT_EQ(kids[1].child_index(), 1);
  EXPECT_EQ(o.hor(), 0.0);
  EXPECT_EQ(kids[0].hor(), 1.0);
  EXPECT_DOUBLE_EQ(TreePoint(TreeVertex::on_axis(2, 2), 0.25).hor(), 1.25);
}

TEST(Tree, RoundTripRandom) {
  std::mt19937_64 g(21);
  for (std::int64_t p : {1, 2, 3, 5}) {
    for (int i = 0; i < 500; ++i) {
      const auto v = fixtures::random_vertex(g, p);
      for (std::int64_t j = 0; j < p; ++j) {
        EXPECT_EQ(v.successor(j).predecessor(), v);
        EXPECT_EQ(v.successor(j).child_index(), j);
      }
      EXPECT_EQ(tree_distance(v, v.predecessor()), 1);
    }
  }
}

TEST(Tree, Confluent) {
  const auto o = TreeVertex::root(2);
  EXPECT_EQ(confluent(o, o), o);
  EXPECT_EQ(confluent(o.successor(0), o.successor(1)), o);
  const TreeVertex v(PadicRational::integer(2, 1), 2), w(PadicRational::integer(2, 3), 2);
  EXPECT_EQ(confluent(v, w), TreeVertex(PadicRational::integer(2, 1), 1));
  EXPECT_EQ(tree_distance(o.successor(0), o.successor(1)), 2);
}

TEST(Tree, DistanceMatchesBfsExhaustively) {
  for (std::int64_t p : {2, 3}) {
    const Truncation tr(TreeVertex::on_axis(p, -3), 6);
    for (std::size_t a = 0; a < tr.vertices.size(); ++a) {
      const auto dist = tr.bfs(static_cast<int>(a));
      for (std::size_t b = 0; b < tr.vertices.size(); ++b)
        ASSERT_EQ(tree_distance(tr.vertices[a], tr.vertices[b]), dist[b])
            << tr.vertices[a] << " " << tr.vertices[b];
    }
  }
}

TEST(Tree, PointDistanceMatchesEndpointOracle) {
  std::mt19937_64 g(22);
  for (std::int64_t p : {1, 2, 3}) {
    for (int i = 0; i < 3000; ++i) {
      const auto a = fixtures::random_tree_point(g, p);
      const auto b = fixtures::random_tree_point(g, p);
      double oracle;
      if (a.upper() == b.upper()) {
        oracle = std::abs(a.offset() - b.offset());
      } else {
        const TreeVertex ea[2] = {a.upper().predecessor(), a.upper()};
        const TreeVertex eb[2] = {b.upper().predecessor(), b.upper()};
        const double la[2] = {a.offset(), 1.0 - a.offset()};
        const double lb[2] = {b.offset(), 1.0 - b.offset()};
        oracle = 1e300;
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t)
            oracle = std::min(oracle, la[s] + static_cast<double>(tree_distance(ea[s], eb[t])) + lb[t]);
      }
      ASSERT_NEAR(tree_distance(a, b), oracle, 1e-12);
    }
  }
}

TEST(Tree, ConesAndBoundaryMass) {
  const auto o = TreeVertex::root(2);
  EXPECT_TRUE(cone_contains(o, o.successor(1)));
  EXPECT_FALSE(cone_contains(o.successor(0), o.successor(1)));
  const auto one = TreeEnd::at(PadicRational::integer(2, 1));
  EXPECT_TRUE(cone_contains(o.successor(1), one));
  EXPECT_FALSE(cone_contains(o.successor(0), one));
  EXPECT_FALSE(cone_contains(o, TreeEnd::omega()));
  EXPECT_DOUBLE_EQ(boundary_mass(o), 1.0);
  EXPECT_DOUBLE_EQ(boundary_mass(TreeVertex::root(3).successor(2)), 1.0 / 3.0);
  std::mt19937_64 g(23);
  for (int i = 0; i < 200; ++i) {
    const auto v = fixtures::random_vertex(g, 3);
    double s = 0.0;
    for (const auto& w : v.successors()) s += boundary_mass(w);
    EXPECT_NEAR(s, boundary_mass(v), 1e-12 * boundary_mass(v));
  }
}

TEST(Tree, PointBelow) {
  const auto v = TreeVertex::root(2).successor(1).successor(0);  // level 2
  const auto w = TreePoint::below(v, 0.5);
  EXPECT_EQ(w.upper(), TreeVertex::root(2).successor(1));
  EXPECT_DOUBLE_EQ(w.offset(), 0.5);
  EXPECT_EQ(TreePoint::below(v, 2.0).upper(), v);
  EXPECT_THROW(TreePoint::below(v, 2.5), DomainError);
  EXPECT_THROW(TreePoint(v, 0.0), DomainError);
}
