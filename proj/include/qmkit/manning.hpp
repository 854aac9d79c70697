#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qmkit/cayley.hpp"
#include "qmkit/counting.hpp"

namespace qmkit {

// lambda * f with lambda = 1/q, q odd: lambda f(v) is never a half-integer
// and changes by at most max_step across an edge.
struct ScaledChar {
  QmExpr base;
  Rational scale;
  Rational max_step;
  long max_edge_change = 0;  // of f itself
  std::vector<long> values;  // f per ball vertex
  std::size_t checked_vertices = 0;
  std::size_t checked_edges = 0;
};

ScaledChar admissible_scale(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                            const Rational& max_step = make_rational(1, 4));

// Band index n with lambda f(v) in (n - 1/2, n + 1/2).
long band_of(const ScaledChar& sc, VertexId v);

struct TreeNode {
  long band = 0;
  std::size_t size = 0;
  // meets the inner ball of radius floor(R/2)
  bool interior = false;
  bool touches_boundary = false;
  int depth = 0;  // least word length among its vertices
  VertexId representative = 0;
};

struct TreeEdge {
  std::size_t a = 0, b = 0;  // band(b) = band(a) + 1
  std::size_t track = 0;
  std::size_t crossing_edges = 0;
};

struct ComponentTree {
  std::vector<TreeNode> nodes;
  std::vector<TreeEdge> edges;
  std::vector<std::size_t> component_of;  // per ball vertex
  std::size_t tracks = 0;
  std::size_t identity_node = 0;
  int radius = 0;
  int inner_radius = 0;
  // square 2-cells were used to merge crossing edges
  bool two_cells = false;
  std::vector<std::size_t> valence;  // distinct neighbouring nodes
};

ComponentTree component_tree(const ScaledChar& sc, const Ball& ball);

struct BushinessStats {
  std::map<std::size_t, std::size_t> histogram;  // valence -> interior nodes
  std::size_t interior = 0;
  std::size_t branching = 0;  // interior nodes of valence >= 3
  Rational fraction;
  bool bushy_evidence = false;
  bool interior_connected = false;
  bool interior_acyclic = false;
};

BushinessStats bushiness_report(const ComponentTree& ct,
                                const Rational& threshold = make_rational(1, 2));

std::string to_dot(const ComponentTree& ct);

}  // namespace qmkit
