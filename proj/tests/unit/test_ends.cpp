#include "doctest.h"
#include "qmkit/ends.hpp"
#include "qmkit/error.hpp"
#include "support.hpp"

using namespace qmkit;
using qmkit::test::random_word;
using qmkit::test::w;

namespace {

// Exponent sum, the value of hom(a=1,b=1) computed from scratch.
long exponent_sum(const Word& u) {
  long s = 0;
  for (Letter l : u) s += l.sign;
  return s;
}

}  // namespace

TEST_SUITE("ends") {
  TEST_CASE("signs") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    auto hom = parse_qm("hom(a=1,b=1)", F2);
    auto D = defect_estimate(ev, hom, build_ball(F2, 2));
    CHECK(sign(ev, hom, w("ab", F2), D).sign == 1);
    CHECK(sign(ev, hom, w("aB", F2), D).sign == 0);
    auto cnt = parse_qm("homog(count(w=ab,W=1))", F2);
    auto Dc = defect_estimate(ev, cnt, build_ball(F2, 2));
    auto s = sign(ev, cnt, w("ab", F2), Dc);
    CHECK(s.sign == 1);
    CHECK(s.exact);
    CHECK(s.lower == 1);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 60; ++i) {
      Word g = F2.normal_form(random_word(rng, F2, 1 + rng() % 5));
      int sg = sign(ev, cnt, g, Dc).sign;
      for (long n = 2; n <= 3; ++n) CHECK(sign(ev, cnt, power(g, n), Dc).sign == sg);
      CHECK(sign(ev, cnt, F2.inverse(g), Dc).sign == -sg);
    }
    // Without an exact oracle the bracket decides, or the call is inconclusive.
    auto Z2 = GroupModel::free_abelian(2);
    QmEvaluator evz(Z2);
    auto cz = parse_qm("count(w=ab,W=1)", Z2);
    auto Dz = defect_estimate(evz, cz, build_ball(Z2, 2));
    auto sz = sign(evz, cz, w("ab", Z2), Dz, 6);
    CHECK_FALSE(sz.exact);
    CHECK(sz.lower <= sz.upper);
    CHECK_THROWS_AS(sign(evz, cz, w("aB", Z2), Dz, 1), Inconclusive);
  }

  TEST_CASE("slab search on trees certifies disconnection") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    auto hom = parse_qm("hom(a=1,b=1)", F2);
    auto r = connecting_word_search(ev, hom, w("a^10", F2), w("b^10", F2), 2, 10, 30);
    CHECK(r.outcome == SlabOutcome::Disconnected);
    CHECK(r.cut_vertex.empty());
    CHECK(r.cut_value == 0);
    CHECK(r.geodesic.size() == 21);
    CHECK(r.explored > 0);
    // The slab-connected part around a^10 never reaches b^10; on a small
    // radius the BFS runs to completion.
    auto small = connecting_word_search(ev, hom, w("a^10", F2), w("b^10", F2), 2, 10, 12);
    CHECK(small.outcome == SlabOutcome::Disconnected);
    CHECK(small.bfs_completed);

    auto Z = GroupModel::free(1);
    QmEvaluator evz(Z);
    auto id = connecting_word_search(evz, parse_qm("hom(a=1)", Z), w("a^10", Z), w("a^10", Z),
                                     make_rational(1, 2), 10, 10);
    CHECK(id.outcome == SlabOutcome::Connected);
    CHECK(id.connecting_word.empty());
    auto along = connecting_word_search(ev, hom, w("a^9b", F2), w("a^10", F2), 1, 10, 11);
    CHECK(along.outcome == SlabOutcome::Connected);
    CHECK(F2.format(along.connecting_word) == "Ba");
    CHECK_THROWS_AS(connecting_word_search(ev, hom, w("a", F2), w("a^10", F2), 2, 10, 30), ParseError);
  }

  TEST_CASE("slab search on Z^2 finds a staircase") {
    auto Z2 = GroupModel::free_abelian(2);
    QmEvaluator ev(Z2);
    auto hom = parse_qm("hom(a=1,b=1)", Z2);
    auto r = connecting_word_search(ev, hom, w("a^10", Z2), w("b^10", Z2), 1, 10, 12);
    REQUIRE(r.outcome == SlabOutcome::Connected);
    CHECK(r.path.size() == 21);
    CHECK(Z2.multiply(w("a^10", Z2), r.connecting_word) == w("b^10", Z2));
    Word prefix = w("a^10", Z2);
    for (std::size_t i = 0; i <= r.connecting_word.size(); ++i) {
      if (i > 0) prefix = Z2.multiply(prefix, Word{r.connecting_word[i - 1]});
      long fv = exponent_sum(prefix);
      CHECK((fv == 9 || fv == 10 || fv == 11));
      CHECK(r.path[i] == prefix);
    }
    // Monotone in C and radius.
    CHECK(connecting_word_search(ev, hom, w("a^10", Z2), w("b^10", Z2), 2, 10, 14).outcome ==
          SlabOutcome::Connected);
    // With C = 1/2 the slab holds one level set, which has no edges.
    auto tight = connecting_word_search(ev, hom, w("a^4", Z2), w("b^4", Z2), make_rational(1, 2), 4, 6);
    CHECK(tight.bfs_completed);
    CHECK(tight.outcome == SlabOutcome::Exhausted);
  }

  TEST_CASE("bornologous modulus") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    auto ball = build_ball(F2, 3);
    auto cnt = parse_qm("count(w=ab,W=1)", F2);
    auto rep = bornologous_modulus(ev, cnt, ball, {0, 1, 2, 3, 4});
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].S == 0);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      CHECK(rep.rows[i].S >= rep.rows[i - 1].S);
      CHECK(rep.rows[i].S <= 8 * rep.rows[i].R);
    }
    CHECK(rep.F == 1);
    CHECK(rep.tested == ball.size());
    auto hom = parse_qm("hom(a=1,b=1)", F2);
    auto rh = bornologous_modulus(ev, hom, ball, {1, 2, 3});
    // |f(g s) - f(g)| = |exponent sum of s| <= |s|, attained at s = a^R.
    for (const auto& row : rh.rows) CHECK(row.S == row.R);
  }

  TEST_CASE("bushiness certification") {
    auto F2 = GroupModel::free(2);
    QmEvaluator ev(F2);
    auto hom = parse_qm("hom(a=1,b=1)", F2);
    auto cert = classify_pseudocharacter(ev, hom, w("a", F2), w("b", F2));
    CHECK(cert.certified);
    CHECK(cert.verdict() == "bushy-certified");
    CHECK(cert.checks.size() == 7);
    CHECK(cert.failed().empty());
    CHECK(cert.evidence_only() == std::vector<std::string>{"independence"});
    REQUIRE(cert.slabs.size() == 2);
    for (const auto& s : cert.slabs) {
      CHECK(s.skipped.empty());
      CHECK(s.result.outcome == SlabOutcome::Disconnected);
    }

    auto flipped = classify_pseudocharacter(ev, hom, w("A", F2), w("b", F2));
    CHECK(flipped.certified);
    CHECK(F2.format(flipped.g1) == "a");
    CHECK(flipped.notes.size() == 1);

    auto same = classify_pseudocharacter(ev, hom, w("a", F2), w("aa", F2));
    CHECK_FALSE(same.certified);
    CHECK(same.failed() == std::vector<std::string>{"independence"});

    auto Z = GroupModel::free(1);
    QmEvaluator evz(Z);
    auto line = classify_pseudocharacter(evz, parse_qm("hom(a=1)", Z), w("a", Z), w("a", Z));
    CHECK(line.verdict() == "inconclusive");
    CHECK(line.failed() == std::vector<std::string>{"independence"});
    CHECK_FALSE(line.notes.empty());

    auto zero = classify_pseudocharacter(ev, hom, w("aB", F2), w("b", F2));
    CHECK_FALSE(zero.certified);
  }
}
