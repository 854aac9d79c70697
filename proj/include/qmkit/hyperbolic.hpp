#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmkit/cayley.hpp"
#include "qmkit/rational.hpp"

namespace qmkit {

// (x|y)_o = (d(x,o) + d(y,o) - d(x,y)) / 2. All three distances must be
// reliable in the ball.
Rational gromov_product(const Ball& ball, VertexId o, VertexId x, VertexId y);

struct DeltaOptions {
  std::uint64_t exhaustive_cutoff = 50'000'000;
  std::uint64_t samples = 2'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct DeltaEstimate {
  Rational delta;
  bool sampled = false;
  // Quadruples (o; x, y, z) with every distance reliable. x <= y <= z, since
  // the four-point condition is symmetric in the three points.
  std::uint64_t reliable_quadruples = 0;
  std::uint64_t checked = 0;
  std::uint64_t seed = 0;
  // A quadruple attaining delta, if delta > 0.
  std::optional<std::vector<VertexId>> witness;
};

DeltaEstimate delta_estimate(const Ball& ball, const DeltaOptions& opts = {});

struct BottleneckPair {
  VertexId x = 0;
  VertexId y = 0;
  int separation = 0;
  // Midpoint on the subdivided graph: a vertex, or the midpoint of the edge
  // (midpoint_vertex, midpoint_other).
  VertexId midpoint_vertex = 0;
  std::optional<VertexId> midpoint_other;
  // Least grid value whose open ball around the midpoint separates x from y;
  // empty when no grid value does.
  std::optional<Rational> delta_min;
};

struct GrowthRow {
  int separation = 0;
  Rational delta_min;  // max over pairs at this separation
  std::size_t pairs = 0;
};

struct BottleneckReport {
  std::vector<Rational> grid;
  std::vector<BottleneckPair> pairs;
  std::optional<Rational> sup;
  bool all_resolved = true;
  std::vector<GrowthRow> growth;
};

// Every unordered pair {x, y} (including x == y) whose distance is reliable.
std::vector<std::pair<VertexId, VertexId>> reliable_pairs(const Ball& ball);

// Half-integer grid 1/2, 1, ..., R + 1/2.
std::vector<Rational> default_delta_grid(const Ball& ball);

BottleneckReport bottleneck_profile(const Ball& ball,
                                    const std::vector<std::pair<VertexId, VertexId>>& pairs,
                                    std::vector<Rational> grid, unsigned threads = 1);

// The once-subdivided graph of a region: node v < n is vertex v, node n + e
// sits at the middle of undirected edge e. Hop counts are half-units.
class SubdividedGraph {
 public:
  explicit SubdividedGraph(const Ball& ball);
  std::size_t num_nodes() const noexcept { return adj_.size(); }
  std::size_t num_vertices() const noexcept { return n_; }
  // Node for the edge joining adjacent vertices u and v.
  std::size_t edge_node(VertexId u, VertexId v) const;
  const std::vector<std::uint32_t>& neighbors(std::size_t node) const { return adj_[node]; }
  std::vector<int> hops_from(std::size_t node) const;
  // Whether x and y are joined by a path avoiding all nodes with hop < 2*delta.
  bool connected_avoiding(VertexId x, VertexId y, const std::vector<int>& hops,
                          const Rational& delta) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::uint32_t>> adj_;
};

}  // namespace qmkit
