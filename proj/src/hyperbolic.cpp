#include "qmkit/hyperbolic.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "qmkit/error.hpp"
#include "qmkit/parallel.hpp"

namespace qmkit {

Rational gromov_product(const Ball& ball, VertexId o, VertexId x, VertexId y) {
  if (!ball.reliable(x, o) || !ball.reliable(y, o) || !ball.reliable(x, y)) {
    throw UnreliableDistance("Gromov product needs reliable distances among o, x, y");
  }
  auto from_o = bfs_distances(ball, o);
  auto from_x = bfs_distances(ball, x);
  Rational r(from_o[x] + from_o[y] - from_x[y], 2);
  r.canonicalize();
  return r;
}

namespace {

std::uint64_t choose2(std::uint64_t c) { return c * (c + 1) / 2; }
std::uint64_t choose3(std::uint64_t c) { return c * (c + 1) * (c + 2) / 6; }

// Number of (o; x <= y <= z) with all six distances reliable.
std::uint64_t count_reliable_quadruples(const Ball& ball) {
  if (ball.kind() == RegionKind::Tube) {
    std::uint64_t m = ball.core().size();
    return m * choose3(m);
  }
  const int R = ball.radius();
  std::vector<std::uint64_t> c(R + 1, 0);
  for (VertexId v = 0; v < ball.size(); ++v) ++c[ball.dist0(v)];
  std::uint64_t total = 0;
  for (int lo = 0; lo <= R; ++lo) {
    for (int lx = 0; lx <= R - lo; ++lx) {
      for (int ly = lx; ly <= R - lo; ++ly) {
        for (int lz = ly; lz <= R - lo && ly + lz <= R; ++lz) {
          std::uint64_t t;
          if (lx == ly && ly == lz) {
            t = choose3(c[lx]);
          } else if (lx == ly) {
            t = choose2(c[lx]) * c[lz];
          } else if (ly == lz) {
            t = c[lx] * choose2(c[ly]);
          } else {
            t = c[lx] * c[ly] * c[lz];
          }
          total += c[lo] * t;
        }
      }
    }
  }
  return total;
}

// Twice the four-point defect of (o; x, y, z).
int doubled_defect(const DistanceTable& d, VertexId o, VertexId x, VertexId y, VertexId z) {
  int pxy = d(x, o) + d(y, o) - d(x, y);
  int pxz = d(x, o) + d(z, o) - d(x, z);
  int pyz = d(y, o) + d(z, o) - d(y, z);
  int lo = std::min({pxy, pxz, pyz});
  int hi = std::max({pxy, pxz, pyz});
  int mid = pxy + pxz + pyz - lo - hi;
  return mid - lo;
}

struct LocalBest {
  int value = 0;
  std::vector<VertexId> witness;
  std::uint64_t checked = 0;
};

}  // namespace

DeltaEstimate delta_estimate(const Ball& ball, const DeltaOptions& opts) {
  DeltaEstimate out;
  out.seed = opts.seed;
  out.reliable_quadruples = count_reliable_quadruples(ball);
  if (ball.size() <= 1) {
    out.delta = 0;
    out.checked = out.reliable_quadruples;
    return out;
  }
  DistanceTable table(ball);
  const std::size_t n = ball.size();

  if (out.reliable_quadruples <= opts.exhaustive_cutoff) {
    std::vector<LocalBest> best(n);
    parallel_for(n, opts.threads, [&](std::size_t oi) {
      auto o = static_cast<VertexId>(oi);
      std::vector<VertexId> near;
      for (VertexId v = 0; v < n; ++v) {
        if (ball.reliable(o, v)) near.push_back(v);
      }
      LocalBest& b = best[oi];
      for (std::size_t i = 0; i < near.size(); ++i) {
        for (std::size_t j = i; j < near.size(); ++j) {
          if (!ball.reliable(near[i], near[j])) continue;
          for (std::size_t k = j; k < near.size(); ++k) {
            if (!ball.reliable(near[i], near[k]) || !ball.reliable(near[j], near[k])) continue;
            ++b.checked;
            int v = doubled_defect(table, o, near[i], near[j], near[k]);
            if (v > b.value) {
              b.value = v;
              b.witness = {o, near[i], near[j], near[k]};
            }
          }
        }
      }
    });
    int top = 0;
    for (const auto& b : best) {
      out.checked += b.checked;
      if (b.value > top) {
        top = b.value;
        out.witness = b.witness;
      }
    }
    out.delta = Rational(top, 2);
    out.delta.canonicalize();
    return out;
  }

  out.sampled = true;
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
  int top = 0;
  const std::uint64_t max_attempts = opts.samples * 50;
  for (std::uint64_t attempt = 0; attempt < max_attempts && out.checked < opts.samples; ++attempt) {
    VertexId q[4] = {pick(rng), pick(rng), pick(rng), pick(rng)};
    std::sort(q + 1, q + 4);
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      for (int j = i + 1; j < 4 && ok; ++j) ok = ball.reliable(q[i], q[j]);
    }
    if (!ok) continue;
    ++out.checked;
    int v = doubled_defect(table, q[0], q[1], q[2], q[3]);
    if (v > top) {
      top = v;
      out.witness = std::vector<VertexId>(q, q + 4);
    }
  }
  out.delta = Rational(top, 2);
  out.delta.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------

SubdividedGraph::SubdividedGraph(const Ball& ball) : n_(ball.size()) {
  adj_.resize(n_);
  for (VertexId u = 0; u < n_; ++u) {
    for (const auto& e : ball.neighbors(u)) {
      if (e.to <= u) continue;
      auto node = static_cast<std::uint32_t>(adj_.size());
      adj_.push_back({u, e.to});
      adj_[u].push_back(node);
      adj_[e.to].push_back(node);
    }
  }
}

std::size_t SubdividedGraph::edge_node(VertexId u, VertexId v) const {
  for (auto node : adj_[u]) {
    const auto& ends = adj_[node];
    if ((ends[0] == u && ends[1] == v) || (ends[0] == v && ends[1] == u)) return node;
  }
  throw Error("vertices are not adjacent");
}

std::vector<int> SubdividedGraph::hops_from(std::size_t node) const {
  std::vector<int> hops(adj_.size(), -1);
  std::vector<std::size_t> queue{node};
  hops[node] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto x = queue[head];
    for (auto y : adj_[x]) {
      if (hops[y] < 0) {
        hops[y] = hops[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return hops;
}

bool SubdividedGraph::connected_avoiding(VertexId x, VertexId y, const std::vector<int>& hops,
                                         const Rational& delta) const {
  // A node survives when its distance hops/2 from the midpoint is >= delta.
  auto survives = [&](std::size_t node) {
    return hops[node] < 0 || make_rational(hops[node], 2) >= delta;
  };
  if (!survives(x) || !survives(y)) return false;
  std::vector<char> seen(adj_.size(), 0);
  std::vector<std::size_t> queue{x};
  seen[x] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto a = queue[head];
    if (a == y) return true;
    for (auto b : adj_[a]) {
      if (!seen[b] && survives(b)) {
        seen[b] = 1;
        queue.push_back(b);
      }
    }
  }
  return false;
}

std::vector<std::pair<VertexId, VertexId>> reliable_pairs(const Ball& ball) {
  std::vector<std::pair<VertexId, VertexId>> out;
  for (VertexId x = 0; x < ball.size(); ++x) {
    for (VertexId y = x; y < ball.size(); ++y) {
      if (ball.reliable(x, y)) out.emplace_back(x, y);
    }
  }
  return out;
}

std::vector<Rational> default_delta_grid(const Ball& ball) {
  std::vector<Rational> grid;
  for (int j = 1; j <= 2 * ball.radius() + 1; ++j) {
    Rational r(j, 2);
    r.canonicalize();
    grid.push_back(r);
  }
  return grid;
}

BottleneckReport bottleneck_profile(const Ball& ball,
                                    const std::vector<std::pair<VertexId, VertexId>>& pairs,
                                    std::vector<Rational> grid, unsigned threads) {
  if (grid.empty()) grid = default_delta_grid(ball);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (const auto& g : grid) {
    if (g <= 0) throw ParseError("bottleneck grid values must be positive");
  }
  for (const auto& [x, y] : pairs) {
    if (!ball.reliable(x, y)) {
      throw UnreliableDistance("bottleneck pair (" + std::to_string(x) + ", " +
                               std::to_string(y) + ") has no reliable geodesic");
    }
  }

  SubdividedGraph sub(ball);
  BottleneckReport report;
  report.grid = grid;
  report.pairs.resize(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    auto [x, y] = pairs[i];
    Path p = geodesic(ball, x, y);
    BottleneckPair& rec = report.pairs[i];
    rec.x = x;
    rec.y = y;
    rec.separation = static_cast<int>(p.length());
    std::size_t mid_node;
    if (p.length() % 2 == 0) {
      rec.midpoint_vertex = p.vertices[p.length() / 2];
      mid_node = rec.midpoint_vertex;
    } else {
      rec.midpoint_vertex = p.vertices[p.length() / 2];
      rec.midpoint_other = p.vertices[p.length() / 2 + 1];
      mid_node = sub.edge_node(rec.midpoint_vertex, *rec.midpoint_other);
    }
    auto hops = sub.hops_from(mid_node);
    for (const auto& delta : grid) {
      if (!sub.connected_avoiding(x, y, hops, delta)) {
        rec.delta_min = delta;
        break;
      }
    }
  });

  std::map<int, GrowthRow> rows;
  for (const auto& rec : report.pairs) {
    if (!rec.delta_min) {
      report.all_resolved = false;
      continue;
    }
    if (!report.sup || *rec.delta_min > *report.sup) report.sup = *rec.delta_min;
    auto& row = rows[rec.separation];
    row.separation = rec.separation;
    if (row.pairs == 0 || *rec.delta_min > row.delta_min) row.delta_min = *rec.delta_min;
    ++row.pairs;
  }
  for (auto& [k, row] : rows) report.growth.push_back(row);
  return report;
}

}  // namespace qmkit
