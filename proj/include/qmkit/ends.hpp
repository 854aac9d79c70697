#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmkit/cayley.hpp"
#include "qmkit/counting.hpp"
#include "qmkit/dynamics.hpp"
#include "qmkit/hyperbolic.hpp"

namespace qmkit {

struct SignResult {
  int sign = 0;
  // from an exact homogenized value rather than a bracket
  bool exact = false;
  Rational lower, upper;
};

// Sign of the homogenization of f at g. Uses the exact value when one
// exists, otherwise the bracket f(g^n)/n +- D/n; throws Inconclusive when
// the bracket straddles 0 without collapsing to it.
SignResult sign(QmEvaluator& ev, const QmExpr& f, const Word& g, const DefectEstimate& defect,
                int n_max = 8);

struct SlabSearchOptions {
  std::uint64_t vertex_budget = 200'000;
};

enum class SlabOutcome { Connected, Disconnected, Exhausted };

std::string to_string(SlabOutcome o);

struct SlabSearchResult {
  SlabOutcome outcome = SlabOutcome::Exhausted;
  Rational level;
  Rational tolerance;
  int radius = 0;
  Rational f_u, f_v;
  // Connected: the connecting word and the vertices u d_p it visits.
  Word connecting_word;
  std::vector<Word> path;
  std::vector<Rational> path_values;
  // Disconnected (trees only): a vertex of the unique u-v geodesic whose
  // f-value lies outside the slab; removing it separates u from v.
  Word cut_vertex;
  Rational cut_value;
  std::vector<Word> geodesic;
  // Slab BFS from u inside |x| <= radius.
  std::uint64_t explored = 0;
  bool bfs_completed = false;
};

// Looks for d with u d = v and |f(u d_p) - level| <= C for every prefix d_p,
// through vertices of word length <= radius.
SlabSearchResult connecting_word_search(QmEvaluator& ev, const QmExpr& f, const Word& u,
                                        const Word& v, const Rational& C, const Rational& level,
                                        int radius, const SlabSearchOptions& opts = {});

struct ModulusRow {
  int R = 0;
  Rational S;
  Word g, g_prime;
};

struct ModulusReport {
  std::vector<ModulusRow> rows;
  std::size_t tested = 0;
  int tested_radius = 0;
  // max displacement d(x0, s x0) of a generator s; 1 on Cayley graphs
  int F = 1;
};

// S(R) = max |f(g s) - f(g)| over g in the ball and |s| <= R.
ModulusReport bornologous_modulus(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                                  const std::vector<int>& R_list);

enum class CheckStatus { Pass, Fail, Evidence };

std::string to_string(CheckStatus s);

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::Fail;
  std::string detail;
};

struct ClassifyOptions {
  int defect_radius = 3;
  std::vector<int> divergence_n = {2, 3, 4, 5, 6};
  DivergenceOptions divergence;
  int bottleneck_radius = 4;
  Rational slab_tolerance = 2;
  std::vector<Rational> slab_levels = {10, 20};
  int slab_radius = 30;
  SlabSearchOptions slab;
  unsigned threads = 1;
};

struct SlabEvidence {
  Word u, v;
  SlabSearchResult result;
  std::string skipped;  // nonempty when the endpoints could not be placed in the slab
};

struct BushinessCertificate {
  Word g1, g2;  // after orienting both to positive sign
  int sigma = 1;
  std::vector<Check> checks;
  std::vector<SlabEvidence> slabs;
  std::vector<std::string> notes;
  bool certified = false;
  std::string verdict() const { return certified ? "bushy-certified" : "inconclusive"; }
  std::vector<std::string> failed() const;
  std::vector<std::string> evidence_only() const;
};

BushinessCertificate classify_pseudocharacter(QmEvaluator& ev, const QmExpr& f, const Word& g1,
                                              const Word& g2, const ClassifyOptions& opts = {});

}  // namespace qmkit
