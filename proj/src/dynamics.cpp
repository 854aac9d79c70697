#include "qmkit/dynamics.hpp"

#include <algorithm>
#include <limits>

#include "qmkit/cayley.hpp"
#include "qmkit/error.hpp"
#include "qmkit/parallel.hpp"

namespace qmkit {

namespace {

void require_group(const GroupModel& model, const char* what) {
  if (!model.has_group_law()) {
    throw Unsupported(std::string(what) + " needs a group model, not an explicit graph");
  }
}

// First syllable of a normal form: the maximal run of one generator.
Word first_syllable(const Word& nf) {
  std::size_t i = 1;
  while (i < nf.size() && nf[i].gen == nf[0].gen) ++i;
  return nf.subword(0, i);
}

std::size_t syllable_count(const Word& nf) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < nf.size(); ++i) {
    if (i == 0 || nf[i].gen != nf[i - 1].gen) ++c;
  }
  return c;
}

struct Projection {
  std::size_t distance = 0;
  std::size_t lo = 0, hi = 0;
};

Projection project(const GroupModel& model, const Word& x, const std::vector<Word>& seg) {
  Projection p;
  p.distance = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < seg.size(); ++i) {
    auto d = model.distance(x, seg[i]);
    if (d < p.distance) {
      p.distance = d;
      p.lo = p.hi = i;
    } else if (d == p.distance) {
      p.hi = i;
    }
  }
  return p;
}

std::size_t directed_hausdorff(const GroupModel& model, const std::vector<Word>& a,
                               const std::vector<Word>& b) {
  std::size_t worst = 0;
  for (const auto& x : a) worst = std::max(worst, project(model, x, b).distance);
  return worst;
}

AxisSegment build_segment(const GroupModel& model, const Word& g, int n) {
  AxisSegment seg;
  seg.g = model.normal_form(g);
  seg.n = n;
  seg.block_length = seg.g.size();
  Word base = model.normal_form(power(seg.g, -n));
  for (int k = -n; k < n; ++k) {
    Word v = base;
    for (std::size_t i = 0; i < seg.g.size(); ++i) {
      seg.vertices.push_back(v);
      v = model.multiply(v, Word{seg.g[i]});
    }
    base = v;
  }
  seg.vertices.push_back(base);
  seg.origin = static_cast<std::size_t>(n) * seg.block_length;
  return seg;
}

// Axis vertices at arc length [-n, n] around the identity.
std::vector<Word> arc_slice(const GroupModel& model, const Word& g, int n) {
  const auto len = static_cast<int>(model.normal_form(g).size());
  auto seg = build_segment(model, g, (n + len - 1) / len);
  auto mid = seg.vertices.begin() + static_cast<long>(seg.origin);
  return std::vector<Word>(mid - n, mid + n + 1);
}

}  // namespace

Word cyclic_core(const GroupModel& model, const Word& g) {
  require_group(model, "cyclic reduction");
  Word nf = model.normal_form(g);
  switch (model.kind()) {
    case ModelKind::Free:
      return nf.empty() ? nf : cyclic_reduce(nf, model).core;
    case ModelKind::FreeAbelian:
      return nf;
    default:
      break;
  }
  // Conjugating by the first syllable merges it into the last one whenever
  // both belong to the same factor; the syllable count drops each time.
  while (syllable_count(nf) >= 2 && nf.front().gen == nf.back().gen) {
    Word s = first_syllable(nf);
    nf = model.normal_form(concat(concat(model.inverse(s), nf), s));
  }
  return nf;
}

ElementClass classify_element(const GroupModel& model, const Word& g, int n_max) {
  require_group(model, "element classification");
  if (n_max < 1) throw ParseError("n_max must be at least 1");
  ElementClass out;
  Word nf = model.normal_form(g);
  Word gn;
  for (int n = 1; n <= n_max; ++n) {
    gn = model.multiply(gn, nf);
    out.orbit.emplace_back(n, gn.size());
  }
  out.core = cyclic_core(model, nf);
  if (nf.empty()) {
    out.tau = 0;
    out.reason = "identity";
    return out;
  }
  if (model.kind() == ModelKind::FreeProductCyclic && syllable_count(out.core) == 1) {
    int order = model.orders()[out.core.front().gen];
    if (order != 0) {
      out.tau = 0;
      out.reason = "conjugate into a finite cyclic factor";
      return out;
    }
  }
  out.hyperbolic = true;
  out.tau = static_cast<long>(out.core.size());
  out.reason = model.kind() == ModelKind::FreeAbelian ? "nontrivial translation"
                                                      : "cyclically reduced length";
  return out;
}

AxisSegment quasi_axis_segment(const GroupModel& model, const Word& g, int n) {
  require_group(model, "quasi-axis");
  if (n < 1) throw ParseError("axis segment needs n >= 1");
  auto cls = classify_element(model, g, 1);
  if (!cls.hyperbolic) throw Unsupported("quasi-axis of a non-hyperbolic element");
  AxisSegment seg = build_segment(model, g, n);
  seg.K = Rational(static_cast<long>(seg.block_length)) / cls.tau;
  seg.L = 0;
  for (std::size_t i = 0; i < seg.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < seg.vertices.size(); ++j) {
      Rational gap = Rational(static_cast<long>(j - i)) / seg.K -
                     static_cast<long>(model.distance(seg.vertices[i], seg.vertices[j]));
      if (gap > seg.L) seg.L = gap;
    }
  }
  return seg;
}

std::string to_string(IndependenceVerdict v) {
  switch (v) {
    case IndependenceVerdict::Independent:
      return "independent";
    case IndependenceVerdict::NotIndependent:
      return "not-independent";
    default:
      return "inconclusive";
  }
}

DivergenceReport axis_divergence(const GroupModel& model, const Word& g1, const Word& g2,
                                 const std::vector<int>& n_list, const DivergenceOptions& opts) {
  require_group(model, "axis divergence");
  if (n_list.empty()) throw ParseError("axis divergence needs at least one n");
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw ParseError("axis divergence needs n >= 1");
  for (const Word& g : {g1, g2}) {
    if (!classify_element(model, g, 1).hyperbolic) {
      throw Unsupported("axis divergence of a non-hyperbolic element " + model.format(g));
    }
  }
  DivergenceReport rep;
  rep.options = opts;
  for (int n : ns) {
    auto s1 = arc_slice(model, g1, n);
    auto s2 = arc_slice(model, g2, n);
    DivergenceRow row;
    row.n = n;
    row.forward = directed_hausdorff(model, s1, s2);
    row.backward = directed_hausdorff(model, s2, s1);
    row.symmetric = std::max(row.forward, row.backward);
    rep.rows.push_back(row);
  }
  const auto& first = rep.rows.front();
  const auto& last = rep.rows.back();
  bool plateau = std::all_of(rep.rows.begin(), rep.rows.end(), [&](const DivergenceRow& r) {
    return Rational(static_cast<long>(r.symmetric)) <= opts.plateau_bound;
  });
  Rational growth = Rational(static_cast<long>(last.symmetric)) -
                    static_cast<long>(first.symmetric);
  if (rep.rows.size() >= 2 && growth >= opts.growth_fraction * (last.n - first.n) && growth > 0) {
    rep.verdict = IndependenceVerdict::Independent;
  } else if (plateau) {
    rep.verdict = IndependenceVerdict::NotIndependent;
  }
  return rep;
}

std::vector<Word> elements_up_to(const GroupModel& model, int R) {
  require_group(model, "element enumeration");
  auto ball = build_ball(model, R);
  std::vector<Word> out;
  out.reserve(ball.size());
  for (VertexId v = 0; v < ball.size(); ++v) out.push_back(ball.element(v));
  std::sort(out.begin(), out.end(), [](const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

SimilarityVerdict bf_similar(const GroupModel& model, const Word& g1, const Word& g2, int L, int R,
                             const Rational& B, unsigned threads) {
  require_group(model, "similarity search");
  if (L < 1 || R < 0 || B < 0) throw ParseError("similarity search needs L >= 1, R >= 0, B >= 0");
  auto c1 = classify_element(model, g1, 1);
  auto c2 = classify_element(model, g2, 1);
  if (!c1.hyperbolic || !c2.hyperbolic) throw Unsupported("similarity of non-hyperbolic elements");

  SimilarityVerdict out;
  out.L = L;
  out.R = R;
  out.B = B;

  const auto len1 = static_cast<long>(model.normal_form(g1).size());
  const auto len2 = static_cast<long>(model.normal_form(g2).size());
  auto s1 = build_segment(model, g1, static_cast<int>((L + len1 - 1) / len1));
  std::vector<Word> J(s1.vertices.begin() + static_cast<long>(s1.origin),
                      s1.vertices.begin() + static_cast<long>(s1.origin) + L + 1);
  // Long enough that a g J within B of the axis cannot project onto its ends.
  Rational reach = (Rational(R + L) + B + 2 * len2) / c2.tau;
  Integer blocks;
  mpz_cdiv_q(blocks.get_mpz_t(), reach.get_num_mpz_t(), reach.get_den_mpz_t());
  auto s2 = build_segment(model, g2, static_cast<int>(blocks.get_si()) + 1);

  auto candidates = elements_up_to(model, R);
  struct Outcome {
    bool contained = false;
    bool oriented = false;
    long offset = 0;
    std::size_t worst = 0;
  };
  std::vector<Outcome> results(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    Outcome& o = results[i];
    std::vector<Projection> proj;
    for (const auto& x : J) {
      auto p = project(model, model.multiply(candidates[i], x), s2.vertices);
      if (Rational(static_cast<long>(p.distance)) > B) return;
      o.worst = std::max(o.worst, p.distance);
      proj.push_back(p);
    }
    o.contained = true;
    o.oriented = proj.front().hi < proj.back().lo;
    o.offset = static_cast<long>(proj.front().lo) - static_cast<long>(s2.origin);
  });
  out.candidates = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!results[i].contained) continue;
    ++out.contained;
    if (results[i].oriented && !out.found) {
      out.found = true;
      out.witness = candidates[i];
      out.offset = results[i].offset;
      out.B_used = static_cast<long>(results[i].worst);
    }
  }
  return out;
}

}  // namespace qmkit
