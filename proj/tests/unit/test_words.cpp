#include <filesystem>
#include <map>
#include <fstream>

#include "doctest.h"
#include "qmkit/error.hpp"
#include "qmkit/words.hpp"
#include "support.hpp"

using namespace qmkit;
using qmkit::test::random_word;
using qmkit::test::w;

TEST_SUITE("words") {
  TEST_CASE("parsing uses uppercase inverses and power syntax") {
    auto F2 = GroupModel::free(2);
    CHECK(F2.format(w("abA", F2)) == "abA");
    CHECK(w("aA", F2).empty());
    CHECK(F2.format(w("a^3B", F2)) == "aaaB");
    CHECK(F2.format(w("a^-2", F2)) == "AA");
    CHECK(F2.format(w("(ab)^2", F2)) == "abab");
    CHECK(F2.format(w("(ab)^-1", F2)) == "BA");
    CHECK(w("1", F2).empty());
    CHECK(F2.format(Word{}) == "1");
    CHECK_THROWS_AS(w("c", F2), ParseError);
    CHECK_THROWS_AS(w("a^", F2), ParseError);
    CHECK_THROWS_AS(w("a^x", F2), ParseError);
    CHECK_THROWS_AS(w("(ab", F2), ParseError);
  }

  TEST_CASE("formatting round-trips up to reduction") {
    auto F3 = GroupModel::free(3);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      Word u = free_reduce(random_word(rng, F3, 9));
      CHECK(w(F3.format(u).c_str(), F3) == u);
    }
  }

  TEST_CASE("multiplication in the three built-in models") {
    auto F2 = GroupModel::free(2);
    CHECK(F2.format(F2.multiply(w("ab", F2), w("Ba", F2))) == "aa");
    auto Z2 = GroupModel::free_abelian(2);
    CHECK(Z2.format(Z2.multiply(w("ab", Z2), w("Ab", Z2))) == "bb");
    CHECK(Z2.format(Z2.normal_form(w("babA", Z2))) == "bb");
    auto C2C3 = GroupModel::free_product({2, 3});
    CHECK(C2C3.multiply(w("a", C2C3), w("a", C2C3)).empty());
    CHECK(C2C3.format(C2C3.normal_form(w("bb", C2C3))) == "B");
    CHECK(C2C3.format(C2C3.normal_form(w("A", C2C3))) == "a");
    auto C4 = GroupModel::free_product({4});
    // a^2 and a^-2 coincide; the positive representative is kept.
    CHECK(C4.format(C4.normal_form(w("AA", C4))) == "aa");
    CHECK_THROWS_AS(GroupModel::explicit_graph({}, {}).multiply({}, {}), Unsupported);
  }

  TEST_CASE("inversion") {
    auto F2 = GroupModel::free(2);
    CHECK(F2.format(invert(w("ab", F2))) == "BA");
    CHECK(invert(Word{}).empty());
    CHECK(F2.format(invert(w("a^3", F2))) == "AAA");
  }

  TEST_CASE("free reduction is idempotent") {
    auto F2 = GroupModel::free(2);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
      Word u = random_word(rng, F2, 12);
      Word r = free_reduce(u);
      CHECK(is_freely_reduced(r));
      CHECK(free_reduce(r) == r);
    }
  }

  TEST_CASE("group laws on random triples") {
    std::vector<GroupModel> models = {GroupModel::free(2), GroupModel::free_abelian(3),
                                      GroupModel::free_product({2, 3}),
                                      GroupModel::free_product({0, 4, 2})};
    std::mt19937_64 rng(2024);
    for (const auto& m : models) {
      for (int i = 0; i < 1000; ++i) {
        Word x = random_word(rng, m, rng() % 7);
        Word y = random_word(rng, m, rng() % 7);
        Word z = random_word(rng, m, rng() % 7);
        CHECK(m.multiply(m.multiply(x, y), z) == m.multiply(x, m.multiply(y, z)));
        CHECK(m.multiply(x, m.identity()) == m.normal_form(x));
        CHECK(m.multiply(x, m.inverse(x)).empty());
        CHECK(m.normal_form(m.normal_form(x)) == m.normal_form(x));
      }
    }
  }

  TEST_CASE("normal forms are geodesic on small balls") {
    // Brute-force word metric: BFS over normal forms.
    std::vector<GroupModel> models = {GroupModel::free_abelian(2), GroupModel::free_product({2, 3}),
                                      GroupModel::free_product({5, 0})};
    for (const auto& m : models) {
      std::map<Word, int> dist{{Word{}, 0}};
      std::vector<Word> frontier{Word{}};
      for (int r = 1; r <= 5; ++r) {
        std::vector<Word> next;
        for (const auto& u : frontier) {
          for (Letter s : m.step_letters()) {
            for (Letter t : {s, s.inverse()}) {
              Word v = m.normal_form(concat(u, Word{t}));
              if (dist.emplace(v, r).second) next.push_back(v);
            }
          }
        }
        frontier = next;
      }
      for (const auto& [u, d] : dist) CHECK(static_cast<int>(u.size()) == d);
    }
  }

  TEST_CASE("cyclic reduction") {
    auto F2 = GroupModel::free(2);
    auto r1 = cyclic_reduce(w("baB", F2), F2);
    CHECK(F2.format(r1.core) == "a");
    CHECK(F2.format(r1.conjugator) == "b");
    auto r2 = cyclic_reduce(w("ab", F2), F2);
    CHECK(F2.format(r2.core) == "ab");
    CHECK(r2.conjugator.empty());
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
      Word u = free_reduce(random_word(rng, F2, 10));
      auto r = cyclic_reduce(u, F2);
      Word back = F2.multiply(F2.multiply(r.conjugator, r.core), F2.inverse(r.conjugator));
      CHECK(back == u);
      if (r.core.size() >= 2) CHECK(r.core.front() != r.core.back().inverse());
    }
    auto r3 = cyclic_reduce(w("abaBA", F2), F2);
    CHECK(F2.multiply(F2.multiply(r3.conjugator, r3.core), F2.inverse(r3.conjugator)) ==
          w("abaBA", F2));
    CHECK(F2.format(r3.core) == "a");
    CHECK(F2.format(r3.conjugator) == "ab");
    CHECK_THROWS_AS(cyclic_reduce(Word{}, GroupModel::free_abelian(2)), Unsupported);
  }

  TEST_CASE("tree detection and finiteness") {
    CHECK(GroupModel::free(3).is_tree());
    CHECK(GroupModel::free_abelian(1).is_tree());
    CHECK_FALSE(GroupModel::free_abelian(2).is_tree());
    CHECK(GroupModel::free_product({2, 0, 2}).is_tree());
    CHECK_FALSE(GroupModel::free_product({2, 3}).is_tree());
    CHECK(GroupModel::free_product({2, 3}).is_infinite());
    CHECK_FALSE(GroupModel::free_product({5}).is_infinite());
  }

  TEST_CASE("group files") {
    auto m = parse_group_text("# comment\nmodel freeproduct 2 3\ngenerators s t\n");
    CHECK(m.kind() == ModelKind::FreeProductCyclic);
    CHECK(m.alphabet() == std::vector<std::string>{"s", "t"});
    CHECK(m.describe() == "freeproduct 2 3");
    CHECK(parse_group_text("model abelian 2").describe() == "abelian 2");
    CHECK_THROWS_AS(parse_group_text("model klein 2"), ParseError);
    CHECK_THROWS_AS(parse_group_text("generators a b"), ParseError);

    auto dir = std::filesystem::temp_directory_path() / "qmkit_words_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream g(dir / "square.txt");
      g << "0 1 a\n1 2 b\n3 2 a\n0 3 b\n";
      std::ofstream f(dir / "square.group");
      f << "model graph square.txt\n";
    }
    auto sq = load_group_file((dir / "square.group").string());
    CHECK(sq.kind() == ModelKind::ExplicitGraph);
    CHECK(sq.graph().num_vertices == 4);
    CHECK(sq.graph().edges.size() == 4);
    CHECK_FALSE(sq.has_group_law());
  }
}
