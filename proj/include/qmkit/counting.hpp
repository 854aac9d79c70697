#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmkit/cayley.hpp"
#include "qmkit/rational.hpp"
#include "qmkit/words.hpp"

namespace qmkit {

// The pair (w, W) behind c_{w,W} and h_w.
struct CountingSpec {
  Word w;
  Rational W = 1;
};

// Checks w nonempty and freely reduced, 0 < W < |w|. Letters of order-2
// generators are stored with positive sign, matching Cayley edge labels.
CountingSpec make_spec(const GroupModel& model, const Word& w, const Rational& W);

CountingSpec inverse_spec(const GroupModel& model, const CountingSpec& spec);

struct CountingResult {
  Rational value;
  int distance = 0;
  int slack = 0;
  // value at slack equals value at slack - 1
  bool stabilized = false;
  // every path that could beat the reported infimum lies in the searched
  // region, so the value is the true c_{w,W}
  bool exact = false;
  std::size_t region_vertices = 0;
};

// c_{w,W}(x, y) inside a ball or tube. The search region at slack s is
// {v : d(x,v) + d(v,y) <= d(x,y) + 2s}; the slack starts at
// `initial_slack` and doubles until the value stabilizes or is certified.
// Throws BoundaryHit when the next slack would leave the region.
CountingResult counting_value(const Ball& region, const CountingSpec& spec, VertexId x,
                              VertexId y, int initial_slack = 2);

// Infimum of |alpha| - W |alpha|_w over walks x -> y inside the slack-s
// search region, by Dijkstra on the graph with extra w-arcs.
Rational augmented_infimum(const Ball& region, const CountingSpec& spec, VertexId x, VertexId y,
                           int slack);

// Path oracle: d(x,y) - min over enumerated paths of length <= max_len.
Rational counting_bruteforce(const Ball& ball, const CountingSpec& spec, VertexId x, VertexId y,
                             int max_len, int oracle_budget = kDefaultOracleBudget);

// Maximal number of non-overlapping (edge-disjoint) occurrences of w in a
// label sequence.
std::size_t count_copies(const Word& labels, const Word& w);

// h_w(g) = c_w(1, g) - c_{w^-1}(1, g), evaluated inside `ball`.
Rational h_w(const Ball& ball, const CountingSpec& spec, const Word& g);

// Homogenization of h_w on a free group, read off the bi-infinite periodic
// geodesic of g: W times the difference of the per-period densities of
// non-overlapping copies of w and of w^-1.
Rational exact_homogenized_free(const GroupModel& model, const CountingSpec& spec, const Word& g);

// ---------------------------------------------------------------------------
// Quasimorphism expressions

struct QmExpr {
  enum class Kind { Counting, Homogenized, Linear, Homomorphism };
  Kind kind = Kind::Homomorphism;
  CountingSpec spec;               // Counting
  std::vector<Rational> coeffs;    // Linear
  std::vector<QmExpr> parts;       // Linear, Homogenized (one part)
  std::vector<Rational> values;    // Homomorphism, per generator

  static QmExpr counting(CountingSpec spec);
  static QmExpr homogenized(QmExpr inner);
  static QmExpr linear(std::vector<Rational> coeffs, std::vector<QmExpr> parts);
  static QmExpr homomorphism(std::vector<Rational> values);
};

// Grammar: expr := term (('+'|'-') term)*; term := [rational '*'] atom;
// atom := count(w=<word>,W=<rational>) | hom(a=<r>,...) | homog(expr) | (expr)
QmExpr parse_qm(std::string_view text, const GroupModel& model);
std::string to_string(const QmExpr& f, const GroupModel& model);

bool contains_homogenized(const QmExpr& f);

// Evaluates expressions on group elements with exact rationals. Counting
// terms are computed in tubes around the normal form of g, using
// c(x, y) = c(1, x^-1 y). The slack is raised to the length certificate;
// on trees where that would need a tube thicker than |w|, the tube grows
// from |w| until the infimum stabilizes.
class QmEvaluator {
 public:
  explicit QmEvaluator(GroupModel model, BallOptions opts = {});

  const GroupModel& model() const noexcept { return model_; }

  Rational value(const QmExpr& f, const Word& g);
  Rational coboundary(const QmExpr& f, const Word& a, const Word& b);

  // c_{w,W}(1, g) and h_w(g).
  Rational counting(const CountingSpec& spec, const Word& g);
  Rational h(const CountingSpec& spec, const Word& g);

  // Exact homogenized value when an oracle exists (homomorphisms, counting
  // terms on free groups, and linear combinations of those).
  std::optional<Rational> exact_homogenized(const QmExpr& f, const Word& g);

  std::uint64_t counting_evaluations() const noexcept { return evaluations_; }
  // Evaluations on trees settled by tube stabilization rather than the
  // length certificate.
  std::uint64_t uncertified_evaluations() const noexcept { return uncertified_; }

 private:
  const Ball& tube_for(const Word& g, int thickness);

  GroupModel model_;
  BallOptions opts_;
  std::map<std::pair<std::string, std::string>, Rational> cache_;
  std::unique_ptr<Ball> tube_;
  Word tube_core_;
  std::uint64_t evaluations_ = 0;
  std::uint64_t uncertified_ = 0;
};

struct DefectEstimate {
  Rational defect;
  bool exhaustive = true;
  std::uint64_t pairs = 0;
  std::uint64_t seed = 0;
  Word witness_a, witness_b;
};

// max |f(a) + f(b) - f(ab)| over pairs of ball elements.
DefectEstimate defect_estimate(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                               std::uint64_t pair_budget = 1'000'000, std::uint64_t seed = 1);

struct HomogenizationBracket {
  Rational estimate;
  Rational defect_bound;
  int n_used = 0;
  Rational lower, upper;
  bool defect_exhaustive = true;
};

// f(g^n)/n at the largest n <= n_max that evaluates, with radius D/n.
HomogenizationBracket homogenize(QmEvaluator& ev, const QmExpr& f, const Word& g, int n_max,
                                 const DefectEstimate& defect);

struct RankResult {
  std::vector<std::vector<Rational>> matrix;
  int rank = 0;
};

// Rows are quasimorphisms, columns elements.
RankResult eval_rank(QmEvaluator& ev, const std::vector<QmExpr>& qms,
                     const std::vector<Word>& elements);

// Fraction-free (Bareiss) elimination after clearing row denominators.
int exact_rank(const std::vector<std::vector<Rational>>& matrix);

}  // namespace qmkit
