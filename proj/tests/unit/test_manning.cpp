#include <map>
#include <queue>
#include <set>

#include "doctest.h"
#include "qmkit/error.hpp"
#include "qmkit/manning.hpp"
#include "support.hpp"

using namespace qmkit;
using qmkit::test::w;

namespace {

// Vertices reachable from the identity through words whose exponent sum
// stays in [lo, hi], with word length <= radius. Plain BFS on normal forms.
std::set<Word> band_component(const GroupModel& m, long lo, long hi, int radius) {
  auto fval = [](const Word& u) {
    long s = 0;
    for (Letter l : u) s += l.sign;
    return s;
  };
  std::set<Word> seen{Word{}};
  std::queue<Word> q;
  q.push(Word{});
  while (!q.empty()) {
    Word x = q.front();
    q.pop();
    for (int g = 0; g < m.rank(); ++g) {
      for (int s : {1, -1}) {
        Word y = m.multiply(x, Word{Letter{static_cast<std::uint8_t>(g), static_cast<std::int8_t>(s)}});
        if (static_cast<int>(y.size()) > radius) continue;
        long v = fval(y);
        if (v < lo || v > hi) continue;
        if (seen.insert(y).second) q.push(y);
      }
    }
  }
  return seen;
}

}  // namespace

TEST_SUITE("manning") {
  TEST_CASE("admissible scale") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    auto ball = build_ball(F2, 4);
    auto sc = admissible_scale(ev, parse_qm("hom(a=1,b=1)", F2), ball);
    CHECK(sc.scale == make_rational(1, 5));
    CHECK(sc.max_edge_change == 1);
    CHECK(sc.checked_vertices == ball.size());
    for (VertexId v = 0; v < ball.size(); ++v) {
      Rational x = sc.scale * sc.values[v];
      Rational frac = x - Rational(mpz_class(x.get_num() / x.get_den()));
      CHECK(abs(frac) != make_rational(1, 2));
    }
    CHECK(admissible_scale(ev, parse_qm("hom(a=0,b=0)", F2), ball).scale == make_rational(1, 5));
    CHECK(admissible_scale(ev, parse_qm("hom(a=2,b=1)", F2), ball).scale == make_rational(1, 9));
    CHECK(admissible_scale(ev, parse_qm("hom(a=3,b=0)", F2), ball).scale == make_rational(1, 13));
    CHECK_THROWS_AS(admissible_scale(ev, parse_qm("1/2*hom(a=1,b=0)", F2), ball), ParseError);
    CHECK_THROWS_AS(admissible_scale(ev, parse_qm("hom(a=30,b=0)", F2), ball), BudgetExceeded);
  }

  TEST_CASE("component tree of a free group") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    const int R = 12;
    auto ball = build_ball(F2, R);
    auto sc = admissible_scale(ev, parse_qm("hom(a=1,b=1)", F2), ball);
    auto ct = component_tree(sc, ball);
    const auto& id = ct.nodes[ct.identity_node];
    CHECK(id.band == 0);
    CHECK(id.interior);
    CHECK(ct.valence[ct.identity_node] >= 3);
    auto oracle = band_component(F2, -2, 2, R);
    CHECK(id.size == oracle.size());
    for (VertexId v = 0; v < ball.size(); ++v) {
      CHECK((ct.component_of[v] == ct.identity_node) == (oracle.count(ball.element(v)) > 0));
    }
    // On a tree every crossing edge is its own track and the whole graph is a tree.
    CHECK(ct.tracks == ct.edges.size());
    CHECK(ct.edges.size() + 1 == ct.nodes.size());
    for (const auto& e : ct.edges) CHECK(ct.nodes[e.b].band == ct.nodes[e.a].band + 1);
    auto st = bushiness_report(ct);
    CHECK(st.interior_connected);
    CHECK(st.interior_acyclic);
    CHECK(st.bushy_evidence);
    std::size_t total = 0;
    for (auto [val, count] : st.histogram) total += count;
    CHECK(total == st.interior);
    CHECK(to_dot(ct).find("graph components") == 0);

    // Components can only split as the radius grows outward, never vanish.
    auto small = build_ball(F2, 8);
    auto cs = component_tree(admissible_scale(ev, parse_qm("hom(a=1,b=1)", F2), small), small);
    CHECK(cs.nodes.size() <= ct.nodes.size());
  }

  TEST_CASE("component tree of Z is a path") {
    auto Z = GroupModel::free(1);
    QmEvaluator ev(Z);
    auto ball = build_ball(Z, 12);
    auto ct = component_tree(admissible_scale(ev, parse_qm("hom(a=1)", Z), ball), ball);
    // Bands -2..2 of five consecutive integers each.
    CHECK(ct.nodes.size() == 5);
    CHECK(ct.edges.size() == 4);
    auto st = bushiness_report(ct);
    CHECK(st.interior == 3);
    CHECK(st.histogram == std::map<std::size_t, std::size_t>{{2, 3}});
    CHECK_FALSE(st.bushy_evidence);
    CHECK(st.interior_connected);
    CHECK(st.interior_acyclic);
  }

  TEST_CASE("tracks merge across squares") {
    auto Z2 = GroupModel::free_abelian(2);
    QmEvaluator ev(Z2);
    auto ball = build_ball(Z2, 6);
    auto ct = component_tree(admissible_scale(ev, parse_qm("hom(a=1,b=0)", Z2), ball), ball);
    CHECK(ct.two_cells);
    CHECK(ct.nodes.size() == 3);
    CHECK(ct.tracks == 2);
    REQUIRE(ct.edges.size() == 2);
    // Level 1/2 is crossed by (2,y) -> (3,y) for |y| <= 3.
    for (const auto& e : ct.edges) CHECK(e.crossing_edges == 7);
    auto st = bushiness_report(ct);
    CHECK(st.interior_acyclic);
    CHECK_FALSE(st.bushy_evidence);

    auto X = GroupModel::free(1);
    QmEvaluator evx(X);
    auto tiny = build_ball(X, 1);
    auto t = component_tree(admissible_scale(evx, parse_qm("hom(a=1)", X), tiny), tiny);
    CHECK(bushiness_report(t).interior == 1);
  }
}
