#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qmkit/words.hpp"

namespace qmkit {

using VertexId = std::uint32_t;

inline constexpr std::uint64_t kDefaultVertexBudget = 2'000'000;
inline constexpr int kDefaultOracleBudget = 12;

// QMKIT_VERTEX_BUDGET overrides kDefaultVertexBudget when set.
std::uint64_t default_vertex_budget();

struct BallOptions {
  std::uint64_t vertex_budget = default_vertex_budget();
};

struct Edge {
  VertexId to;
  Letter label;
};

enum class RegionKind { Ball, Tube };

// A frozen finite piece of a Cayley graph (or of an explicit graph).
//
// A Ball is the radius-R neighbourhood of the identity. A Tube is the
// thickness-T neighbourhood of the path spelled by a normal-form word from
// the identity; tubes let the counting code reach long elements without
// materialising a whole ball. Vertex 0 is the identity in both cases.
class Ball {
 public:
  static Ball build(const GroupModel& model, int radius, const BallOptions& opts = {});
  static Ball build_tube(const GroupModel& model, const Word& core, int thickness,
                         const BallOptions& opts = {});

  const GroupModel& model() const noexcept { return model_; }
  RegionKind kind() const noexcept { return kind_; }
  // Ball radius, or tube thickness.
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return depth_.size(); }

  bool has_elements() const noexcept { return model_.has_group_law(); }
  const Word& element(VertexId v) const;
  std::optional<VertexId> find(const Word& normal_form) const;
  // Normalises g and looks it up; throws when g is outside the region.
  VertexId require(const Word& g) const;
  // Original id for explicit-graph regions.
  std::uint32_t graph_id(VertexId v) const;

  std::span<const Edge> neighbors(VertexId v) const {
    return {edges_.data() + offsets_[v], edges_.data() + offsets_[v + 1]};
  }
  int dist0(VertexId v) const { return dist0_[v]; }
  // Distance to the seed set: the identity for balls, the core path for tubes.
  int depth(VertexId v) const { return depth_[v]; }
  // Some neighbour in the full graph lies outside the region.
  bool on_boundary(VertexId v) const { return boundary_[v] != 0; }

  std::optional<VertexId> step(VertexId v, Letter s) const;
  // Vertices visited when reading `w` from v (w.size()+1 entries), if the
  // whole path stays in the region.
  std::optional<std::vector<VertexId>> follow(VertexId v, const Word& w) const;

  // Core path of a tube (prefixes of its word); {0} for a ball.
  const std::vector<VertexId>& core() const noexcept { return core_; }
  bool on_core(VertexId v) const { return core_index_[v] >= 0; }

  // The region-internal distance between u and v is provably the distance
  // in the full graph: dist0(u)+dist0(v) <= R for balls, both on the core
  // for tubes.
  bool reliable(VertexId u, VertexId v) const;

  void check_vertex(VertexId v) const;

 private:
  Ball() = default;
  void finish(std::vector<VertexId> seeds, int max_depth, const BallOptions& opts);
  void compute_dist0();

  GroupModel model_;
  RegionKind kind_ = RegionKind::Ball;
  int radius_ = 0;
  std::vector<Word> elements_;
  std::unordered_map<Word, VertexId, WordHash> index_;
  std::vector<std::uint32_t> graph_ids_;
  std::vector<std::uint32_t> offsets_;
  std::vector<Edge> edges_;
  std::vector<int> dist0_;
  std::vector<int> depth_;
  std::vector<std::uint8_t> boundary_;
  std::vector<VertexId> core_;
  std::vector<int> core_index_;
};

Ball build_ball(const GroupModel& model, int radius, const BallOptions& opts = {});
Ball build_tube(const GroupModel& model, const Word& core, int thickness,
                const BallOptions& opts = {});

// Exact vertex count of the radius-R ball of Free(rank); saturates at
// UINT64_MAX.
std::uint64_t free_ball_size(int rank, int radius);

struct Path {
  std::vector<VertexId> vertices;
  Word labels;
  std::size_t length() const noexcept { return labels.size(); }
};

struct Distance {
  int value = 0;
  bool reliable = false;
};

// Region-internal BFS distances from `source` (-1 when unreachable).
std::vector<int> bfs_distances(const Ball& ball, VertexId source);

Distance distance(const Ball& ball, VertexId u, VertexId v);

// Shortest path with the lexicographically least label sequence.
Path geodesic(const Ball& ball, VertexId u, VertexId v);

// Every path u -> v of length <= max_len inside the region, each once.
// The visitor sees paths in depth-first label order.
void for_each_path(const Ball& ball, VertexId u, VertexId v, int max_len,
                   const std::function<void(const Path&)>& visit,
                   int oracle_budget = kDefaultOracleBudget);

std::vector<Path> enumerate_paths(const Ball& ball, VertexId u, VertexId v, int max_len,
                                  int oracle_budget = kDefaultOracleBudget);

// All-pairs region-internal distances.
class DistanceTable {
 public:
  static constexpr std::size_t kMaxVertices = 8000;
  explicit DistanceTable(const Ball& ball);
  int operator()(VertexId u, VertexId v) const { return d_[u * n_ + v]; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::uint16_t> d_;
};

}  // namespace qmkit
