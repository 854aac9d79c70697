#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmkit/rational.hpp"
#include "qmkit/words.hpp"

namespace qmkit {

// Distances here are exact word-metric distances |u^-1 v| read off normal
// forms, so nothing depends on a finite ball.

struct ElementClass {
  bool hyperbolic = false;
  Rational tau;
  // exact translation length from the cyclically reduced form
  bool exact = true;
  // (n, d(1, g^n)) for n = 1..n_max
  std::vector<std::pair<int, std::size_t>> orbit;
  // cyclically reduced conjugate used for tau
  Word core;
  std::string reason;
};

ElementClass classify_element(const GroupModel& model, const Word& g, int n_max = 6);

// Cyclically reduced conjugate in any model with a group law: free
// reduction for Free, syllable merging for free products of cyclic groups.
// Abelian models return the normal form.
Word cyclic_core(const GroupModel& model, const Word& g);

// The path g^k gamma_0, k = -n..n-1, with gamma_0 the normal-form geodesic
// from 1 to g, listed vertex by vertex in arc length.
struct AxisSegment {
  Word g;
  int n = 0;
  std::vector<Word> vertices;
  // vertices[origin] is the identity; the g-orientation is increasing index
  std::size_t origin = 0;
  std::size_t block_length = 0;
  // (K, L) with d(i, j) >= |i - j| / K - L on the segment; K = |g| / tau
  Rational K;
  Rational L;
};

AxisSegment quasi_axis_segment(const GroupModel& model, const Word& g, int n);

// Rows compare the axis vertices at arc length [-n, n] around the identity.
struct DivergenceRow {
  int n = 0;
  std::size_t forward = 0;   // sup over the g1 segment of distance to the g2 segment
  std::size_t backward = 0;  // and the other way
  std::size_t symmetric = 0;
};

enum class IndependenceVerdict { Independent, NotIndependent, Inconclusive };

std::string to_string(IndependenceVerdict v);

struct DivergenceOptions {
  Rational growth_fraction = make_rational(1, 2);
  Rational plateau_bound = 2;
};

struct DivergenceReport {
  std::vector<DivergenceRow> rows;
  IndependenceVerdict verdict = IndependenceVerdict::Inconclusive;
  DivergenceOptions options;
};

DivergenceReport axis_divergence(const GroupModel& model, const Word& g1, const Word& g2,
                                 const std::vector<int>& n_list, const DivergenceOptions& opts = {});

struct SimilarityVerdict {
  bool found = false;
  Word witness;
  // arc-length index, relative to the g2 origin, of the projection of g J(0)
  long offset = 0;
  // largest distance of g J to the g2 segment
  Rational B_used;
  int L = 0;
  int R = 0;
  Rational B;
  std::uint64_t candidates = 0;
  std::uint64_t contained = 0;
};

// Exhaustive search over |g| <= R, ordered by length then lexicographically,
// for g with g J inside the B-neighbourhood of the g2 axis and orientation
// preserved. J is the first L edges of the g1 axis from the identity.
SimilarityVerdict bf_similar(const GroupModel& model, const Word& g1, const Word& g2, int L, int R,
                             const Rational& B, unsigned threads = 1);

// All elements of word length <= R, sorted by (length, letter codes).
std::vector<Word> elements_up_to(const GroupModel& model, int R);

}  // namespace qmkit
