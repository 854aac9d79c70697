#include "doctest.h"
#include "qmkit/cayley.hpp"
#include "qmkit/dynamics.hpp"
#include "qmkit/error.hpp"
#include "support.hpp"

using namespace qmkit;
using qmkit::test::random_word;
using qmkit::test::w;

TEST_SUITE("dynamics") {
  TEST_CASE("translation lengths on Free(2)") {
    auto F2 = GroupModel::free(2);
    auto a = classify_element(F2, w("a", F2));
    CHECK(a.hyperbolic);
    CHECK(a.tau == 1);
    auto c = classify_element(F2, w("baB", F2), 6);
    CHECK(c.hyperbolic);
    CHECK(c.tau == 1);
    // Orbit distances against BFS in a radius-8 ball: d(1, g^n) = n + 2.
    auto ball = build_ball(F2, 8);
    for (auto [n, d] : c.orbit) {
      CHECK(d == static_cast<std::size_t>(n + 2));
      CHECK(ball.dist0(ball.require(power(w("baB", F2), n))) == n + 2);
    }
    auto one = classify_element(F2, Word{});
    CHECK_FALSE(one.hyperbolic);
    CHECK(one.tau == 0);
    CHECK(classify_element(F2, w("abab", F2)).tau == 2 * classify_element(F2, w("ab", F2)).tau);
  }

  TEST_CASE("tau is a homogeneous conjugacy invariant") {
    std::mt19937_64 rng(31);
    for (const auto& m : {GroupModel::free(2), GroupModel::free_product({2, 3}),
                          GroupModel::free_product({0, 2}), GroupModel::free_abelian(2)}) {
      for (int i = 0; i < 150; ++i) {
        Word g = m.normal_form(random_word(rng, m, 1 + rng() % 6));
        Word h = m.normal_form(random_word(rng, m, rng() % 4));
        auto cg = classify_element(m, g, 24);
        for (long n = 1; n <= 4; ++n) {
          CHECK(classify_element(m, power(g, n)).tau == n * cg.tau);
        }
        CHECK(classify_element(m, m.multiply(m.multiply(h, g), m.inverse(h))).tau == cg.tau);
        CHECK(cg.hyperbolic == (cg.tau > 0));
        if (cg.hyperbolic) {
          // Oracle: the orbit increments settle at tau.
          auto d24 = static_cast<long>(cg.orbit[23].second);
          auto d23 = static_cast<long>(cg.orbit[22].second);
          CHECK(Rational(d24 - d23) == cg.tau);
        } else {
          for (auto [n, d] : cg.orbit) CHECK(d <= 2 * g.size());
        }
      }
    }
  }

  TEST_CASE("elliptic elements of free products") {
    auto C = GroupModel::free_product({2, 3});
    CHECK_FALSE(classify_element(C, w("a", C)).hyperbolic);
    CHECK_FALSE(classify_element(C, w("bb", C)).hyperbolic);
    CHECK_FALSE(classify_element(C, w("aba", C)).hyperbolic);
    CHECK(classify_element(C, w("ab", C)).tau == 2);
    CHECK(classify_element(C, w("abaB", C)).tau == 4);
    auto Zc = GroupModel::free_product({0, 2});
    CHECK(classify_element(Zc, w("baaab", Zc)).tau == 3);
    CHECK_THROWS_AS(classify_element(GroupModel::explicit_graph({}, {}), Word{}), Unsupported);
  }

  TEST_CASE("quasi-axis segments") {
    auto F2 = GroupModel::free(2);
    auto sa = quasi_axis_segment(F2, w("a", F2), 3);
    REQUIRE(sa.vertices.size() == 7);
    for (int k = -3; k <= 3; ++k) CHECK(sa.vertices[k + 3] == F2.normal_form(power(w("a", F2), k)));
    CHECK(sa.origin == 3);
    CHECK(sa.K == 1);
    CHECK(sa.L == 0);

    auto sab = quasi_axis_segment(F2, w("ab", F2), 2);
    REQUIRE(sab.vertices.size() == 9);
    Word g = w("ab", F2);
    for (int k = -2; k < 2; ++k) {
      // Each block is the g^k translate of the geodesic 1, a, ab.
      Word gk = F2.normal_form(power(g, k));
      CHECK(sab.vertices[2 * (k + 2)] == gk);
      CHECK(sab.vertices[2 * (k + 2) + 1] == F2.multiply(gk, w("a", F2)));
    }
    CHECK(sab.vertices.back() == F2.normal_form(power(g, 2)));

    auto sc = quasi_axis_segment(F2, w("baB", F2), 2);
    for (const auto& v : sc.vertices) {
      std::size_t best = 99;
      for (int k = -6; k <= 6; ++k) {
        best = std::min(best, F2.distance(v, F2.multiply(w("b", F2), power(w("a", F2), k))));
      }
      CHECK(best <= 1);
    }
    CHECK(sc.K == 3);
    // The defining inequality holds with the measured L, and L has settled.
    for (std::size_t i = 0; i < sc.vertices.size(); ++i) {
      for (std::size_t j = i; j < sc.vertices.size(); ++j) {
        CHECK(Rational(static_cast<long>(F2.distance(sc.vertices[i], sc.vertices[j]))) >=
              Rational(static_cast<long>(j - i)) / sc.K - sc.L);
      }
    }
    CHECK(quasi_axis_segment(F2, w("baB", F2), 5).L == quasi_axis_segment(F2, w("baB", F2), 4).L);
    CHECK_THROWS_AS(quasi_axis_segment(F2, Word{}, 2), Unsupported);
  }

  TEST_CASE("axis divergence") {
    auto F2 = GroupModel::free(2);
    auto ab = axis_divergence(F2, w("a", F2), w("b", F2), {2, 3, 4, 5, 6});
    for (const auto& r : ab.rows) {
      // d(a^n, b^k) = n + |k| in the tree, minimized at k = 0.
      CHECK(r.symmetric == static_cast<std::size_t>(r.n));
      CHECK(r.forward == r.backward);
    }
    CHECK(ab.verdict == IndependenceVerdict::Independent);

    auto same = axis_divergence(F2, w("a", F2), w("aa", F2), {2, 4, 6});
    for (const auto& r : same.rows) CHECK(r.symmetric == 0);
    CHECK(same.verdict == IndependenceVerdict::NotIndependent);
    CHECK(axis_divergence(F2, w("a", F2), w("A", F2), {2, 4, 6}).verdict ==
          IndependenceVerdict::NotIndependent);

    // The conjugate axis b<a> meets <a> at distance 1 only near the identity:
    // d(a^n, b a^k) = n + 1 + |k|, so the segments drift apart.
    auto conj = axis_divergence(F2, w("a", F2), w("baB", F2), {2, 3, 4, 5, 6});
    for (std::size_t i = 1; i < conj.rows.size(); ++i) {
      CHECK(conj.rows[i].symmetric >= conj.rows[i - 1].symmetric);
    }
    CHECK(conj.rows.back().symmetric > conj.rows.front().symmetric);
    CHECK(conj.verdict == IndependenceVerdict::Independent);

    auto Z2 = GroupModel::free_abelian(2);
    auto flat = axis_divergence(Z2, w("a", Z2), w("b", Z2), {2, 4, 6});
    CHECK(flat.rows.back().symmetric == 6);
  }

  TEST_CASE("Bestvina-Fujiwara similarity search") {
    auto F2 = GroupModel::free(2);
    auto v = bf_similar(F2, w("a", F2), w("baB", F2), 4, 2, 0);
    REQUIRE(v.found);
    CHECK(F2.format(v.witness) == "b");
    CHECK(v.B_used == 0);
    auto self = bf_similar(F2, w("a", F2), w("a", F2), 4, 2, 0);
    REQUIRE(self.found);
    CHECK(self.witness.empty());

    auto rev = bf_similar(F2, w("ab", F2), w("BA", F2), 6, 3, 1);
    CHECK_FALSE(rev.found);
    CHECK(rev.candidates == 53);
    CHECK(rev.L == 6);
    CHECK(rev.R == 3);
    CHECK(rev.B == 1);
    // The identity maps J onto the axis itself, only with the wrong orientation.
    CHECK(rev.contained >= 1);

    CHECK(elements_up_to(F2, 3).size() == 53);
    CHECK(elements_up_to(F2, 3)[1] == w("a", F2));

    // Symmetry on samples: similarity is found in both directions.
    for (const char* p : {"baB", "aab", "Bab"}) {
      Word g2 = w(p, F2);
      auto fwd = bf_similar(F2, w("a", F2), g2, 4, 2, 2);
      auto back = bf_similar(F2, g2, w("a", F2), 4, 2, 2);
      CHECK(fwd.found == back.found);
    }
    CHECK(bf_similar(F2, w("a", F2), w("baB", F2), 4, 2, 0, 4).witness == v.witness);
  }
}
