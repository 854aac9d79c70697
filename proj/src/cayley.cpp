#include "qmkit/cayley.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <limits>
#include <string>

#include "qmkit/error.hpp"

namespace qmkit {

std::uint64_t default_vertex_budget() {
  if (const char* env = std::getenv("QMKIT_VERTEX_BUDGET")) {
    try {
      auto v = std::stoull(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return kDefaultVertexBudget;
}

std::uint64_t free_ball_size(int rank, int radius) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (rank == 0 || radius == 0) return 1;
  std::uint64_t total = 1;
  std::uint64_t sphere = 2ULL * static_cast<std::uint64_t>(rank);
  const std::uint64_t branch = sphere - 1;
  for (int r = 1; r <= radius; ++r) {
    if (total > kMax - sphere) return kMax;
    total += sphere;
    if (r < radius) {
      if (branch != 0 && sphere > kMax / branch) return kMax;
      sphere *= branch;
    }
  }
  return total;
}

namespace {

Letter normalize_step(const GroupModel& model, Letter s) {
  if (model.kind() == ModelKind::FreeProductCyclic && s.gen < model.orders().size() &&
      model.orders()[s.gen] == 2) {
    return Letter{s.gen, 1};
  }
  return s;
}

}  // namespace

Ball Ball::build(const GroupModel& model, int radius, const BallOptions& opts) {
  if (radius < 0) throw ParseError("ball radius must be non-negative");
  Ball b;
  b.model_ = model;
  b.kind_ = RegionKind::Ball;
  b.radius_ = radius;

  if (model.kind() == ModelKind::ExplicitGraph) {
    const auto& g = model.graph();
    std::vector<std::vector<Edge>> full(g.num_vertices);
    for (const auto& e : g.edges) {
      full[e.u].push_back(Edge{e.v, e.label});
      full[e.v].push_back(Edge{e.u, e.label.inverse()});
    }
    for (auto& adj : full) {
      std::sort(adj.begin(), adj.end(), [](const Edge& x, const Edge& y) {
        return x.label != y.label ? x.label < y.label : x.to < y.to;
      });
    }
    std::vector<std::int64_t> local(g.num_vertices, -1);
    local[0] = 0;
    b.graph_ids_.push_back(0);
    b.depth_.push_back(0);
    for (std::size_t i = 0; i < b.graph_ids_.size(); ++i) {
      auto gid = b.graph_ids_[i];
      if (b.depth_[i] == radius) continue;
      for (const auto& e : full[gid]) {
        if (local[e.to] < 0) {
          if (b.graph_ids_.size() >= opts.vertex_budget) {
            throw BudgetExceeded("graph ball exceeds vertex budget", opts.vertex_budget + 1);
          }
          local[e.to] = static_cast<std::int64_t>(b.graph_ids_.size());
          b.graph_ids_.push_back(e.to);
          b.depth_.push_back(b.depth_[i] + 1);
        }
      }
    }
    const std::size_t n = b.graph_ids_.size();
    b.offsets_.push_back(0);
    b.boundary_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& e : full[b.graph_ids_[i]]) {
        if (local[e.to] >= 0) {
          b.edges_.push_back(Edge{static_cast<VertexId>(local[e.to]), e.label});
        } else {
          b.boundary_[i] = 1;
        }
      }
      b.offsets_.push_back(static_cast<std::uint32_t>(b.edges_.size()));
    }
    b.dist0_ = b.depth_;
    b.core_ = {0};
    b.core_index_.assign(n, -1);
    b.core_index_[0] = 0;
    return b;
  }

  if (model.kind() == ModelKind::Free) {
    auto need = free_ball_size(model.rank(), radius);
    if (need > opts.vertex_budget) {
      throw BudgetExceeded("ball of radius " + std::to_string(radius) + " in " + model.describe() +
                               " needs " + std::to_string(need) + " vertices, budget is " +
                               std::to_string(opts.vertex_budget),
                           need);
    }
  }
  b.elements_.push_back(Word{});
  b.finish({}, radius, opts);
  b.dist0_ = b.depth_;
  b.core_ = {0};
  b.core_index_.assign(b.size(), -1);
  b.core_index_[0] = 0;
  return b;
}

Ball Ball::build_tube(const GroupModel& model, const Word& core, int thickness,
                      const BallOptions& opts) {
  if (!model.has_group_law()) throw Unsupported("tubes need a group model");
  if (thickness < 0) throw ParseError("tube thickness must be non-negative");
  Ball b;
  b.model_ = model;
  b.kind_ = RegionKind::Tube;
  b.radius_ = thickness;
  Word nf = model.normal_form(core);
  Word prefix;
  b.elements_.push_back(prefix);
  for (Letter l : nf) {
    prefix.push_back(l);
    b.elements_.push_back(model.normal_form(prefix));
  }
  b.finish({}, thickness, opts);
  b.core_.resize(nf.size() + 1);
  b.core_index_.assign(b.size(), -1);
  for (std::size_t i = 0; i <= nf.size(); ++i) {
    b.core_[i] = static_cast<VertexId>(i);
    b.core_index_[i] = static_cast<int>(i);
  }
  b.compute_dist0();
  return b;
}

// Breadth-first exploration from the words already in elements_ (all at
// depth 0), out to max_depth.
void Ball::finish(std::vector<VertexId>, int max_depth, const BallOptions& opts) {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!index_.emplace(elements_[i], static_cast<VertexId>(i)).second) {
      throw Error("region seeds must be distinct elements");
    }
  }
  depth_.assign(elements_.size(), 0);
  const auto letters = model_.step_letters();
  offsets_.push_back(0);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const Word cur = elements_[i];
    bool boundary = false;
    for (Letter s : letters) {
      Word next = cur;
      next.push_back(s);
      Word nb = model_.normal_form(next);
      auto it = index_.find(nb);
      if (it != index_.end()) {
        edges_.push_back(Edge{it->second, s});
      } else if (depth_[i] < max_depth) {
        if (elements_.size() >= opts.vertex_budget) {
          throw BudgetExceeded("region around " + model_.describe() + " exceeds vertex budget " +
                                   std::to_string(opts.vertex_budget),
                               opts.vertex_budget + 1);
        }
        auto id = static_cast<VertexId>(elements_.size());
        index_.emplace(nb, id);
        elements_.push_back(std::move(nb));
        depth_.push_back(depth_[i] + 1);
        edges_.push_back(Edge{id, s});
      } else {
        boundary = true;
      }
    }
    boundary_.push_back(boundary ? 1 : 0);
    offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
  }
}

void Ball::compute_dist0() { dist0_ = bfs_distances(*this, 0); }

const Word& Ball::element(VertexId v) const {
  if (!has_elements()) throw Unsupported("explicit graph vertices carry no group elements");
  check_vertex(v);
  return elements_[v];
}

std::optional<VertexId> Ball::find(const Word& normal_form) const {
  if (!has_elements()) return std::nullopt;
  auto it = index_.find(normal_form);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId Ball::require(const Word& g) const {
  if (!has_elements()) throw Unsupported("explicit graph vertices carry no group elements");
  Word nf = model_.normal_form(g);
  auto v = find(nf);
  if (!v) throw BoundaryHit("element " + model_.format(nf) + " lies outside the region");
  return *v;
}

std::uint32_t Ball::graph_id(VertexId v) const {
  check_vertex(v);
  return graph_ids_.empty() ? v : graph_ids_[v];
}

std::optional<VertexId> Ball::step(VertexId v, Letter s) const {
  s = normalize_step(model_, s);
  for (const auto& e : neighbors(v)) {
    if (e.label == s) return e.to;
  }
  return std::nullopt;
}

std::optional<std::vector<VertexId>> Ball::follow(VertexId v, const Word& w) const {
  std::vector<VertexId> path;
  path.reserve(w.size() + 1);
  path.push_back(v);
  for (Letter l : w) {
    auto n = step(path.back(), l);
    if (!n) return std::nullopt;
    path.push_back(*n);
  }
  return path;
}

bool Ball::reliable(VertexId u, VertexId v) const {
  check_vertex(u);
  check_vertex(v);
  if (kind_ == RegionKind::Tube) return on_core(u) && on_core(v);
  return dist0_[u] + dist0_[v] <= radius_;
}

void Ball::check_vertex(VertexId v) const {
  if (v >= size()) throw ParseError("vertex " + std::to_string(v) + " is not in the region");
}

Ball build_ball(const GroupModel& model, int radius, const BallOptions& opts) {
  return Ball::build(model, radius, opts);
}

Ball build_tube(const GroupModel& model, const Word& core, int thickness, const BallOptions& opts) {
  return Ball::build_tube(model, core, thickness, opts);
}

// ---------------------------------------------------------------------------

std::vector<int> bfs_distances(const Ball& ball, VertexId source) {
  ball.check_vertex(source);
  std::vector<int> dist(ball.size(), -1);
  std::vector<VertexId> queue;
  queue.reserve(ball.size());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    VertexId x = queue[head];
    for (const auto& e : ball.neighbors(x)) {
      if (dist[e.to] < 0) {
        dist[e.to] = dist[x] + 1;
        queue.push_back(e.to);
      }
    }
  }
  return dist;
}

Distance distance(const Ball& ball, VertexId u, VertexId v) {
  ball.check_vertex(v);
  auto d = bfs_distances(ball, u);
  return Distance{d[v], ball.reliable(u, v)};
}

Path geodesic(const Ball& ball, VertexId u, VertexId v) {
  if (!ball.reliable(u, v)) {
    throw UnreliableDistance("geodesic between vertices " + std::to_string(u) + " and " +
                             std::to_string(v) + " may leave the region");
  }
  auto dv = bfs_distances(ball, v);
  Path p;
  p.vertices.push_back(u);
  VertexId cur = u;
  while (cur != v) {
    // Adjacency is sorted by label, so the first improving edge is the
    // lexicographically least continuation.
    const Edge* best = nullptr;
    for (const auto& e : ball.neighbors(cur)) {
      if (dv[e.to] == dv[cur] - 1 && (!best || e.label < best->label)) best = &e;
    }
    if (!best) throw Error("geodesic: region is disconnected");
    p.labels.push_back(best->label);
    p.vertices.push_back(best->to);
    cur = best->to;
  }
  return p;
}

namespace {

void dfs_paths(const Ball& ball, VertexId v, int max_len, const std::vector<int>& dv, Path& cur,
               const std::function<void(const Path&)>& visit) {
  VertexId x = cur.vertices.back();
  if (x == v) visit(cur);
  const int used = static_cast<int>(cur.length());
  for (const auto& e : ball.neighbors(x)) {
    if (dv[e.to] < 0 || used + 1 + dv[e.to] > max_len) continue;
    cur.vertices.push_back(e.to);
    cur.labels.push_back(e.label);
    dfs_paths(ball, v, max_len, dv, cur, visit);
    cur.vertices.pop_back();
    cur.labels.pop_back();
  }
}

}  // namespace

void for_each_path(const Ball& ball, VertexId u, VertexId v, int max_len,
                   const std::function<void(const Path&)>& visit, int oracle_budget) {
  ball.check_vertex(u);
  ball.check_vertex(v);
  if (max_len > oracle_budget) {
    throw BudgetExceeded("path enumeration length " + std::to_string(max_len) +
                             " exceeds oracle budget " + std::to_string(oracle_budget),
                         static_cast<unsigned long long>(max_len));
  }
  if (max_len < 0) return;
  auto dv = bfs_distances(ball, v);
  if (dv[u] < 0 || dv[u] > max_len) return;
  Path cur;
  cur.vertices.push_back(u);
  dfs_paths(ball, v, max_len, dv, cur, visit);
}

std::vector<Path> enumerate_paths(const Ball& ball, VertexId u, VertexId v, int max_len,
                                  int oracle_budget) {
  std::vector<Path> out;
  for_each_path(ball, u, v, max_len, [&](const Path& p) { out.push_back(p); }, oracle_budget);
  return out;
}

DistanceTable::DistanceTable(const Ball& ball) : n_(ball.size()) {
  if (n_ > kMaxVertices) {
    throw BudgetExceeded("all-pairs distance table limited to " + std::to_string(kMaxVertices) +
                             " vertices",
                         n_);
  }
  d_.assign(n_ * n_, std::numeric_limits<std::uint16_t>::max());
  for (VertexId s = 0; s < n_; ++s) {
    auto row = bfs_distances(ball, s);
    for (std::size_t t = 0; t < n_; ++t) {
      if (row[t] >= 0) d_[s * n_ + t] = static_cast<std::uint16_t>(row[t]);
    }
  }
}

}  // namespace qmkit
