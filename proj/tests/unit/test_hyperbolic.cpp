#include "doctest.h"
#include "qmkit/error.hpp"
#include "qmkit/hyperbolic.hpp"
#include "support.hpp"

using namespace qmkit;
using qmkit::test::w;

namespace {

// Naive four-point defect over ordered quadruples, straight from the
// definition (x|y)_o >= min((x|z)_o, (z|y)_o) - delta.
Rational naive_delta(const Ball& b) {
  DistanceTable t(b);
  int best = 0;
  for (VertexId o = 0; o < b.size(); ++o)
    for (VertexId x = 0; x < b.size(); ++x)
      for (VertexId y = 0; y < b.size(); ++y)
        for (VertexId z = 0; z < b.size(); ++z) {
          if (!(b.reliable(o, x) && b.reliable(o, y) && b.reliable(o, z) && b.reliable(x, y) &&
                b.reliable(x, z) && b.reliable(y, z))) {
            continue;
          }
          int xy = t(x, o) + t(y, o) - t(x, y);
          int xz = t(x, o) + t(z, o) - t(x, z);
          int zy = t(z, o) + t(y, o) - t(z, y);
          best = std::max(best, std::min(xz, zy) - xy);
        }
  return make_rational(best, 2);
}

}  // namespace

TEST_SUITE("hyperbolic") {
  TEST_CASE("Gromov products") {
    auto F2 = GroupModel::free(2);
    auto b = build_ball(F2, 6);
    CHECK(gromov_product(b, 0, b.require(w("aa", F2)), b.require(w("bb", F2))) == 0);
    CHECK(gromov_product(b, 0, b.require(w("aaa", F2)), b.require(w("aab", F2))) == 2);
    VertexId x = b.require(w("ab", F2));
    CHECK(gromov_product(b, 0, x, x) == 2);
    CHECK_THROWS_AS(gromov_product(b, 0, b.require(w("aaaa", F2)), b.require(w("bbbb", F2))),
                    UnreliableDistance);
    auto Z2 = GroupModel::free_abelian(2);
    auto bz = build_ball(Z2, 4);
    for (VertexId p = 0; p < bz.size(); p += 3) {
      for (VertexId q = 0; q < bz.size(); q += 2) {
        if (bz.dist0(p) + bz.dist0(q) > 4) continue;
        auto g = gromov_product(bz, 0, p, q);
        CHECK(g >= 0);
        CHECK(g == gromov_product(bz, 0, q, p));
      }
    }
  }

  TEST_CASE("delta on trees is zero") {
    auto d = delta_estimate(build_ball(GroupModel::free(2), 3));
    CHECK(d.delta == 0);
    CHECK_FALSE(d.sampled);
    CHECK(d.checked == d.reliable_quadruples);
    CHECK(delta_estimate(build_ball(GroupModel::free_product({2, 0}), 5)).delta == 0);
    CHECK(delta_estimate(build_ball(GroupModel::free(0), 3)).delta == 0);
  }

  TEST_CASE("delta agrees with the naive ordered scan") {
    for (const auto& m : {GroupModel::free_abelian(2), GroupModel::free_product({2, 3}),
                          GroupModel::free_product({3, 3})}) {
      auto b = build_ball(m, 3);
      CHECK(delta_estimate(b).delta == naive_delta(b));
    }
  }

  TEST_CASE("Z^2 is not uniformly hyperbolic") {
    auto d = delta_estimate(build_ball(GroupModel::free_abelian(2), 6));
    CHECK(d.delta >= 2);
    CHECK_FALSE(d.sampled);
    CHECK(d.witness.has_value());
  }

  TEST_CASE("sampling is seeded") {
    DeltaOptions opts;
    opts.exhaustive_cutoff = 10;
    opts.samples = 2000;
    opts.seed = 9;
    auto b = build_ball(GroupModel::free_abelian(2), 4);
    auto d1 = delta_estimate(b, opts);
    auto d2 = delta_estimate(b, opts);
    CHECK(d1.sampled);
    CHECK(d1.delta == d2.delta);
    CHECK(d1.checked == d2.checked);
    CHECK(d1.delta <= delta_estimate(b).delta);
  }

  TEST_CASE("bottleneck on trees") {
    auto b = build_ball(GroupModel::free(2), 4);
    auto rep = bottleneck_profile(b, reliable_pairs(b), {});
    REQUIRE(rep.sup.has_value());
    CHECK(*rep.sup <= 1);
    CHECK(rep.all_resolved);
    for (const auto& p : rep.pairs) CHECK(*p.delta_min == Rational(1, 2));
  }

  TEST_CASE("bottleneck on Z^2 grows with separation") {
    auto Z2 = GroupModel::free_abelian(2);
    for (int k = 2; k <= 5; ++k) {
      auto b = build_ball(Z2, 2 * k);
      VertexId x = b.require(power(w("A", Z2), k));
      VertexId y = b.require(power(w("a", Z2), k));
      auto rep = bottleneck_profile(b, {{x, y}}, {});
      REQUIRE(rep.pairs[0].delta_min.has_value());
      CHECK(rep.pairs[0].midpoint_vertex == 0);
      CHECK(*rep.pairs[0].delta_min >= k);
      // The l1 sphere of radius k is a detour at distance k, so k itself
      // does not separate.
      CHECK(*rep.pairs[0].delta_min == Rational(2 * k + 1, 2));
    }
  }

  TEST_CASE("bottleneck degenerate pair and monotonicity") {
    auto b = build_ball(GroupModel::free_abelian(2), 4);
    auto rep = bottleneck_profile(b, {{3, 3}}, {});
    CHECK(*rep.pairs[0].delta_min == Rational(1, 2));
    SubdividedGraph sub(b);
    auto pairs = reliable_pairs(b);
    for (std::size_t i = 0; i < pairs.size(); i += 11) {
      auto [x, y] = pairs[i];
      Path p = geodesic(b, x, y);
      std::size_t mid = p.length() % 2 == 0
                            ? p.vertices[p.length() / 2]
                            : sub.edge_node(p.vertices[p.length() / 2], p.vertices[p.length() / 2 + 1]);
      auto hops = sub.hops_from(mid);
      bool cut = false;
      for (const auto& d : default_delta_grid(b)) {
        bool now = !sub.connected_avoiding(x, y, hops, d);
        if (cut) CHECK(now);
        cut = now;
      }
      CHECK(cut);
    }
  }

  TEST_CASE("bottleneck growth table") {
    auto b = build_ball(GroupModel::free_abelian(2), 4);
    auto rep = bottleneck_profile(b, reliable_pairs(b), {});
    REQUIRE(!rep.growth.empty());
    CHECK(rep.growth.front().separation == 0);
    CHECK(rep.growth.back().separation == 4);
    CHECK(rep.growth.back().delta_min > rep.growth[1].delta_min);
    auto coarse = bottleneck_profile(b, reliable_pairs(b), {Rational(1, 2)});
    CHECK_FALSE(coarse.all_resolved);
  }
}
