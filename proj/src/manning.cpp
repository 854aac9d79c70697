#include "qmkit/manning.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "qmkit/error.hpp"

namespace qmkit {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

ScaledChar admissible_scale(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                            const Rational& max_step) {
  if (!ball.has_elements()) throw Unsupported("scaling needs a group model");
  if (max_step <= 0) throw ParseError("max_step must be positive");
  ScaledChar sc;
  sc.base = f;
  sc.max_step = max_step;
  sc.values.resize(ball.size());
  for (VertexId v = 0; v < ball.size(); ++v) {
    Rational x = ev.value(f, ball.element(v));
    if (x.get_den() != 1) {
      throw ParseError("f is not integer-valued: f(" + ball.model().format(ball.element(v)) +
                       ") = " + to_string(x));
    }
    sc.values[v] = x.get_num().get_si();
  }
  for (VertexId u = 0; u < ball.size(); ++u) {
    for (const auto& e : ball.neighbors(u)) {
      if (e.to < u) continue;
      ++sc.checked_edges;
      sc.max_edge_change = std::max(sc.max_edge_change, std::abs(sc.values[u] - sc.values[e.to]));
    }
  }
  long q = 5;
  while (q <= 99 && Rational(sc.max_edge_change, q) > max_step) q += 2;
  if (q > 99) {
    throw BudgetExceeded("no admissible scale 1/q with odd q <= 99 (per-edge change " +
                             std::to_string(sc.max_edge_change) + ")",
                         static_cast<unsigned long long>(q));
  }
  sc.scale = make_rational(1, q);
  // 2 f = q (2m + 1) has no solution for odd q; checked anyway.
  for (long x : sc.values) {
    if ((2 * x) % q == 0 && ((2 * x) / q) % 2 != 0) throw Error("scaled value hits Z + 1/2");
    ++sc.checked_vertices;
  }
  return sc;
}

long band_of(const ScaledChar& sc, VertexId v) {
  const long q = sc.scale.get_den().get_si();
  const long p = sc.scale.get_num().get_si();
  // round(p f / q) with no ties
  return floor_div(2 * p * sc.values[v] + q, 2 * q);
}

ComponentTree component_tree(const ScaledChar& sc, const Ball& ball) {
  if (sc.values.size() != ball.size()) throw Error("scaled character does not match the ball");
  const std::size_t n = ball.size();
  std::vector<long> band(n);
  for (VertexId v = 0; v < n; ++v) band[v] = band_of(sc, v);

  UnionFind comps(n);
  struct Crossing {
    VertexId lo, hi;  // band(hi) = band(lo) + 1
  };
  std::vector<Crossing> crossings;
  std::map<std::pair<VertexId, VertexId>, std::size_t> crossing_id;
  for (VertexId u = 0; u < n; ++u) {
    for (const auto& e : ball.neighbors(u)) {
      if (e.to < u) continue;
      if (band[u] == band[e.to]) {
        comps.unite(u, e.to);
      } else {
        if (std::abs(band[u] - band[e.to]) != 1) throw Error("edge skips a band");
        Crossing c = band[u] < band[e.to] ? Crossing{u, e.to} : Crossing{e.to, u};
        crossing_id.emplace(std::make_pair(u, e.to), crossings.size());
        crossings.push_back(c);
      }
    }
  }

  ComponentTree ct;
  ct.radius = ball.radius();
  ct.inner_radius = ball.radius() / 2;

  // Tracks: crossing edges, glued through square cells at the same level.
  UnionFind tracks(crossings.size());
  const GroupModel& m = ball.model();
  if (m.kind() == ModelKind::FreeAbelian && m.rank() >= 2) {
    ct.two_cells = true;
    auto id = [&](VertexId x, VertexId y) -> std::optional<std::size_t> {
      auto it = crossing_id.find(std::minmax(x, y));
      if (it == crossing_id.end()) return std::nullopt;
      return it->second;
    };
    for (VertexId g = 0; g < n; ++g) {
      for (int i = 0; i < m.rank(); ++i) {
        for (int j = i + 1; j < m.rank(); ++j) {
          auto gi = ball.step(g, Letter{static_cast<std::uint8_t>(i), 1});
          auto gj = ball.step(g, Letter{static_cast<std::uint8_t>(j), 1});
          if (!gi || !gj) continue;
          auto gij = ball.step(*gi, Letter{static_cast<std::uint8_t>(j), 1});
          if (!gij) continue;
          std::pair<VertexId, VertexId> sides[4] = {{g, *gi}, {g, *gj}, {*gi, *gij}, {*gj, *gij}};
          std::map<long, std::size_t> first_at_level;
          for (auto [x, y] : sides) {
            auto c = id(x, y);
            if (!c) continue;
            long level = band[crossings[*c].lo];
            auto [it, fresh] = first_at_level.emplace(level, *c);
            if (!fresh) tracks.unite(it->second, *c);
          }
        }
      }
    }
  }

  std::map<std::size_t, std::size_t> node_of_root;
  ct.component_of.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    auto root = comps.find(v);
    auto [it, fresh] = node_of_root.emplace(root, ct.nodes.size());
    if (fresh) {
      TreeNode node;
      node.band = band[v];
      node.depth = ball.dist0(v);
      node.representative = v;
      ct.nodes.push_back(node);
    }
    TreeNode& node = ct.nodes[it->second];
    ++node.size;
    node.depth = std::min(node.depth, ball.dist0(v));
    if (ball.dist0(v) <= ct.inner_radius) node.interior = true;
    if (ball.on_boundary(v)) node.touches_boundary = true;
    ct.component_of[v] = it->second;
  }
  ct.identity_node = ct.component_of[0];

  std::map<std::size_t, std::size_t> track_index;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> edge_index;
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    auto [ti, fresh_track] = track_index.emplace(tracks.find(c), track_index.size());
    (void)fresh_track;
    std::size_t a = ct.component_of[crossings[c].lo];
    std::size_t b = ct.component_of[crossings[c].hi];
    auto key = std::make_tuple(ti->second, a, b);
    auto [ei, fresh] = edge_index.emplace(key, ct.edges.size());
    if (fresh) ct.edges.push_back(TreeEdge{a, b, ti->second, 0});
    ++ct.edges[ei->second].crossing_edges;
  }
  ct.tracks = track_index.size();

  std::vector<std::set<std::size_t>> nbrs(ct.nodes.size());
  for (const auto& e : ct.edges) {
    nbrs[e.a].insert(e.b);
    nbrs[e.b].insert(e.a);
  }
  for (const auto& s : nbrs) ct.valence.push_back(s.size());
  return ct;
}

BushinessStats bushiness_report(const ComponentTree& ct, const Rational& threshold) {
  BushinessStats st;
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < ct.nodes.size(); ++i) {
    if (!ct.nodes[i].interior) continue;
    interior.push_back(i);
    ++st.histogram[ct.valence[i]];
    if (ct.valence[i] >= 3) ++st.branching;
  }
  st.interior = interior.size();
  if (interior.empty()) throw Inconclusive("component tree has no interior nodes; radius too small");
  st.fraction = Rational(static_cast<long>(st.branching)) / static_cast<long>(st.interior);
  st.bushy_evidence = st.fraction >= threshold;

  // Interior subgraph: connected and acyclic iff |E| = |V| - 1 with one component.
  UnionFind uf(ct.nodes.size());
  std::size_t edges = 0, merges = 0;
  for (const auto& e : ct.edges) {
    if (!ct.nodes[e.a].interior || !ct.nodes[e.b].interior) continue;
    ++edges;
    if (uf.unite(e.a, e.b)) ++merges;
  }
  st.interior_acyclic = edges == merges;
  st.interior_connected = merges + 1 == st.interior;
  return st;
}

std::string to_dot(const ComponentTree& ct) {
  std::ostringstream out;
  out << "graph components {\n";
  for (std::size_t i = 0; i < ct.nodes.size(); ++i) {
    const auto& nd = ct.nodes[i];
    out << "  n" << i << " [label=\"" << nd.band << " (" << nd.size << ")\"";
    if (!nd.interior) out << ", style=dashed";
    if (i == ct.identity_node) out << ", shape=box";
    out << "];\n";
  }
  for (const auto& e : ct.edges) {
    out << "  n" << e.a << " -- n" << e.b << " [label=\"" << e.crossing_edges << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace qmkit
