#include "qmkit/ends.hpp"

#include <algorithm>
#include <unordered_map>

#include "qmkit/error.hpp"

namespace qmkit {

SignResult sign(QmEvaluator& ev, const QmExpr& f, const Word& g, const DefectEstimate& defect,
                int n_max) {
  SignResult r;
  if (auto exact = ev.exact_homogenized(f, g)) {
    r.exact = true;
    r.lower = r.upper = *exact;
    r.sign = sign_of(*exact);
    return r;
  }
  auto b = homogenize(ev, f, g, n_max, defect);
  r.lower = b.lower;
  r.upper = b.upper;
  if (b.lower > 0) {
    r.sign = 1;
  } else if (b.upper < 0) {
    r.sign = -1;
  } else if (b.lower == 0 && b.upper == 0) {
    r.sign = 0;
  } else {
    throw Inconclusive("sign of " + to_string(f, ev.model()) + " at " + ev.model().format(g) +
                       ": bracket [" + to_string(b.lower) + ", " + to_string(b.upper) +
                       "] contains 0");
  }
  return r;
}

std::string to_string(SlabOutcome o) {
  switch (o) {
    case SlabOutcome::Connected:
      return "connected";
    case SlabOutcome::Disconnected:
      return "disconnected_certificate";
    default:
      return "exhausted";
  }
}

namespace {

struct SlabBfs {
  bool found = false;
  bool completed = false;
  std::uint64_t explored = 0;
  std::vector<Word> path;
};

SlabBfs slab_bfs(QmEvaluator& ev, const QmExpr& f, const Word& u, const Word& v,
                 const Rational& C, const Rational& level, int radius, std::uint64_t budget) {
  const GroupModel& m = ev.model();
  std::vector<Letter> moves;
  for (Letter l : m.step_letters()) {
    moves.push_back(l);
    bool involution = m.kind() == ModelKind::FreeProductCyclic && m.orders()[l.gen] == 2;
    if (!involution) moves.push_back(l.inverse());
  }
  std::sort(moves.begin(), moves.end());

  SlabBfs out;
  std::vector<Word> nodes{u};
  std::vector<std::int64_t> parent{-1};
  std::unordered_map<Word, std::size_t, WordHash> index{{u, 0}};
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head] == v) {
      out.found = true;
      for (auto i = static_cast<std::int64_t>(head); i >= 0; i = parent[i]) out.path.push_back(nodes[i]);
      std::reverse(out.path.begin(), out.path.end());
      out.explored = nodes.size();
      return out;
    }
    for (Letter l : moves) {
      Word x = m.multiply(nodes[head], Word{l});
      if (static_cast<int>(x.size()) > radius || index.count(x)) continue;
      if (abs(ev.value(f, x) - level) > C) continue;
      if (nodes.size() >= budget) {
        out.explored = nodes.size();
        return out;
      }
      index.emplace(x, nodes.size());
      nodes.push_back(x);
      parent.push_back(static_cast<std::int64_t>(head));
    }
  }
  out.completed = true;
  out.explored = nodes.size();
  return out;
}

}  // namespace

SlabSearchResult connecting_word_search(QmEvaluator& ev, const QmExpr& f, const Word& u,
                                        const Word& v, const Rational& C, const Rational& level,
                                        int radius, const SlabSearchOptions& opts) {
  const GroupModel& m = ev.model();
  if (C <= 0) throw ParseError("slab tolerance C must be positive");
  Word nu = m.normal_form(u), nv = m.normal_form(v);
  if (static_cast<int>(std::max(nu.size(), nv.size())) > radius) {
    throw ParseError("connecting word search: endpoints must lie within the radius");
  }
  SlabSearchResult r;
  r.level = level;
  r.tolerance = C;
  r.radius = radius;
  r.f_u = ev.value(f, nu);
  r.f_v = ev.value(f, nv);
  auto in_slab = [&](const Rational& x) { return abs(x - level) <= C; };
  if (!in_slab(r.f_u) || !in_slab(r.f_v)) {
    throw ParseError("connecting word search: endpoints outside the slab, f(u) = " +
                     to_string(r.f_u) + ", f(v) = " + to_string(r.f_v) + ", level " +
                     to_string(level) + " +- " + to_string(C));
  }

  auto finish_connected = [&](std::vector<Word> path) {
    r.outcome = SlabOutcome::Connected;
    r.path = std::move(path);
    for (std::size_t i = 0; i < r.path.size(); ++i) {
      Rational x = ev.value(f, r.path[i]);
      if (!in_slab(x)) throw Error("connecting path leaves the slab at prefix " + std::to_string(i));
      if (i > 0 && m.distance(r.path[i - 1], r.path[i]) != 1) throw Error("connecting path has a gap");
      r.path_values.push_back(x);
    }
    // The label sequence of the path spells d letter by letter.
    Word d;
    for (std::size_t i = 1; i < r.path.size(); ++i) d.append(m.multiply(m.inverse(r.path[i - 1]), r.path[i]));
    r.connecting_word = d;
  };

  if (m.is_tree()) {
    // The unique simple path from u to v is read off the normal form of
    // u^-1 v; every path from u to v visits all of its vertices.
    Word step = m.multiply(m.inverse(nu), nv);
    Word cur = nu;
    r.geodesic.push_back(cur);
    for (Letter l : step) {
      cur = m.multiply(cur, Word{l});
      r.geodesic.push_back(cur);
    }
    std::optional<std::size_t> cut;
    Rational worst = -1;
    for (std::size_t i = 0; i < r.geodesic.size(); ++i) {
      Rational off = abs(ev.value(f, r.geodesic[i]) - level);
      if (off > C && off > worst) {
        worst = off;
        cut = i;
      }
    }
    if (!cut) {
      finish_connected(r.geodesic);
      r.bfs_completed = false;
      return r;
    }
    r.outcome = SlabOutcome::Disconnected;
    r.cut_vertex = r.geodesic[*cut];
    r.cut_value = ev.value(f, r.cut_vertex);
    auto bfs = slab_bfs(ev, f, nu, nv, C, level, radius, opts.vertex_budget);
    if (bfs.found) throw Error("slab search found a path through a separating vertex");
    r.explored = bfs.explored;
    r.bfs_completed = bfs.completed;
    return r;
  }

  auto bfs = slab_bfs(ev, f, nu, nv, C, level, radius, opts.vertex_budget);
  r.explored = bfs.explored;
  r.bfs_completed = bfs.completed || bfs.found;
  if (bfs.found) {
    finish_connected(std::move(bfs.path));
  } else {
    r.outcome = SlabOutcome::Exhausted;
  }
  return r;
}

ModulusReport bornologous_modulus(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                                  const std::vector<int>& R_list) {
  if (!ball.has_elements()) throw Unsupported("bornologous modulus needs a group model");
  const GroupModel& m = ev.model();
  ModulusReport rep;
  rep.tested = ball.size();
  rep.tested_radius = ball.radius();
  std::vector<int> Rs = R_list;
  std::sort(Rs.begin(), Rs.end());
  Rs.erase(std::unique(Rs.begin(), Rs.end()), Rs.end());
  if (Rs.empty()) return rep;
  if (Rs.front() < 0) throw ParseError("modulus radii must be nonnegative");
  auto moves = elements_up_to(m, Rs.back());

  // best[k]: max |f(g s) - f(g)| over |s| = k
  std::vector<ModulusRow> best(Rs.back() + 1);
  for (int k = 0; k <= Rs.back(); ++k) best[k].S = 0;
  for (VertexId i = 0; i < ball.size(); ++i) {
    const Word& g = ball.element(i);
    Rational fg = ev.value(f, g);
    for (const auto& s : moves) {
      Word gs = m.multiply(g, s);
      Rational diff = abs(ev.value(f, gs) - fg);
      auto& b = best[s.size()];
      if (diff > b.S) {
        b.S = diff;
        b.g = g;
        b.g_prime = gs;
      }
    }
  }
  ModulusRow acc;
  acc.S = 0;
  std::size_t next = 0;
  for (int k = 0; k <= Rs.back(); ++k) {
    if (best[k].S > acc.S) acc = best[k];
    if (k == Rs[next]) {
      ModulusRow row = acc;
      row.R = k;
      rep.rows.push_back(row);
      ++next;
    }
  }
  return rep;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Evidence:
      return "evidence";
    default:
      return "fail";
  }
}

std::vector<std::string> BushinessCertificate::failed() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) out.push_back(c.name);
  }
  return out;
}

std::vector<std::string> BushinessCertificate::evidence_only() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Evidence) out.push_back(c.name);
  }
  return out;
}

namespace {

bool two_ended(const GroupModel& m) {
  switch (m.kind()) {
    case ModelKind::Free:
    case ModelKind::FreeAbelian:
      return m.rank() == 1;
    case ModelKind::FreeProductCyclic: {
      int infinite = 0, finite = 0;
      for (int o : m.orders()) (o == 0 ? infinite : finite)++;
      bool dihedral = infinite == 0 && finite == 2 &&
                      std::all_of(m.orders().begin(), m.orders().end(), [](int o) { return o == 2; });
      return (infinite == 1 && finite == 0) || dihedral;
    }
    default:
      return false;
  }
}

// Smallest power k >= 1 with |f(g^k) - level| minimal.
Word power_near(QmEvaluator& ev, const QmExpr& f, const Word& g, const Rational& phi,
                const Rational& level) {
  Rational guess = level / phi;
  Integer k = guess.get_num() / guess.get_den();
  long base = std::max(1L, k.get_si());
  Word best;
  Rational off = -1;
  for (long c = std::max(1L, base - 1); c <= base + 1; ++c) {
    Word x = ev.model().normal_form(power(g, c));
    Rational o = abs(ev.value(f, x) - level);
    if (off < 0 || o < off) {
      off = o;
      best = x;
    }
  }
  return best;
}

}  // namespace

BushinessCertificate classify_pseudocharacter(QmEvaluator& ev, const QmExpr& f, const Word& g1,
                                              const Word& g2, const ClassifyOptions& opts) {
  const GroupModel& m = ev.model();
  if (!m.has_group_law()) throw Unsupported("classification needs a group model");
  BushinessCertificate cert;
  Word gs[2] = {m.normal_form(g1), m.normal_form(g2)};
  const char* names[2] = {"g1", "g2"};

  bool hyperbolic[2];
  for (int i = 0; i < 2; ++i) {
    auto cls = classify_element(m, gs[i], 4);
    hyperbolic[i] = cls.hyperbolic;
    cert.checks.push_back({std::string("hyperbolic ") + names[i],
                           cls.hyperbolic ? CheckStatus::Pass : CheckStatus::Fail,
                           m.format(gs[i]) + ": tau = " + to_string(cls.tau) + " (" + cls.reason + ")"});
  }

  auto defect = defect_estimate(ev, f, build_ball(m, opts.defect_radius));
  Rational phi[2] = {0, 0};
  bool phi_exact = true;
  for (int i = 0; i < 2; ++i) {
    std::string name = std::string("phi(") + names[i] + ") > 0";
    try {
      auto s = sign(ev, f, gs[i], defect);
      if (s.sign < 0) {
        cert.notes.push_back(std::string(names[i]) + " = " + m.format(gs[i]) +
                             " has negative sign; replaced by its inverse");
        gs[i] = m.inverse(gs[i]);
        std::swap(s.lower, s.upper);
        s.lower = -s.lower;
        s.upper = -s.upper;
        s.sign = 1;
      }
      phi[i] = s.exact ? s.lower : (s.lower + s.upper) / 2;
      std::string detail = "phi(" + m.format(gs[i]) + ") " +
                           (s.exact ? "= " + to_string(s.lower)
                                    : "in [" + to_string(s.lower) + ", " + to_string(s.upper) + "]");
      if (s.sign == 0) {
        cert.checks.push_back({name, CheckStatus::Fail, detail});
      } else {
        cert.checks.push_back({name, s.exact ? CheckStatus::Pass : CheckStatus::Evidence, detail});
        phi_exact = phi_exact && s.exact;
      }
    } catch (const Inconclusive& e) {
      cert.checks.push_back({name, CheckStatus::Fail, e.what()});
    }
  }
  cert.g1 = gs[0];
  cert.g2 = gs[1];

  if (hyperbolic[0] && hyperbolic[1]) {
    auto div = axis_divergence(m, gs[0], gs[1], opts.divergence_n, opts.divergence);
    std::string detail = "symmetric Hausdorff distance";
    for (const auto& r : div.rows) {
      detail += " n=" + std::to_string(r.n) + ":" + std::to_string(r.symmetric);
    }
    detail += "; verdict " + to_string(div.verdict);
    cert.checks.push_back({"independence", div.verdict == IndependenceVerdict::Independent
                                               ? CheckStatus::Evidence
                                               : CheckStatus::Fail,
                           detail});
  } else {
    cert.checks.push_back({"independence", CheckStatus::Fail, "needs two hyperbolic elements"});
  }

  if (m.is_infinite()) {
    cert.checks.push_back({"metrically proper", CheckStatus::Pass,
                           "left action on the Cayley graph: trivial stabilizers, discrete orbits"});
  } else {
    cert.checks.push_back({"metrically proper", CheckStatus::Fail, "finite group"});
  }

  {
    auto ball = build_ball(m, opts.bottleneck_radius);
    auto rep = bottleneck_profile(ball, reliable_pairs(ball), {}, opts.threads);
    int max_sep = rep.growth.empty() ? 0 : rep.growth.back().separation;
    Rational lower = 0, upper = 0;
    for (const auto& row : rep.growth) {
      Rational& slot = 2 * row.separation <= max_sep ? lower : upper;
      if (row.delta_min > slot) slot = row.delta_min;
    }
    bool flat = rep.all_resolved && upper <= lower;
    std::string detail = "bottleneck radius " + std::to_string(opts.bottleneck_radius) + ": sup = " +
                         (rep.sup ? to_string(*rep.sup) : std::string("unresolved")) +
                         ", lower-half max " + to_string(lower) + ", upper-half max " +
                         to_string(upper);
    CheckStatus st = CheckStatus::Fail;
    if (m.is_tree()) {
      st = CheckStatus::Pass;
      detail += "; the Cayley graph is a tree";
    } else if (flat) {
      st = CheckStatus::Evidence;
    }
    cert.checks.push_back({"quasi-tree", st, detail});
  }

  if (two_ended(m)) {
    cert.notes.push_back("the group is two-ended, so |E(f)| = 2 is forced (uniform)");
  }

  if (phi[0] > 0 && phi[1] > 0) {
    for (const auto& level : opts.slab_levels) {
      SlabEvidence ev_slab;
      ev_slab.u = power_near(ev, f, gs[0], phi[0], level);
      ev_slab.v = power_near(ev, f, gs[1], phi[1], level);
      try {
        ev_slab.result = connecting_word_search(ev, f, ev_slab.u, ev_slab.v, opts.slab_tolerance,
                                                level, opts.slab_radius, opts.slab);
      } catch (const Error& e) {
        ev_slab.skipped = e.what();
      }
      cert.slabs.push_back(std::move(ev_slab));
    }
  }

  cert.certified = cert.failed().empty() && phi_exact;
  if (cert.failed().empty() && !phi_exact) {
    cert.notes.push_back("signs are only bracketed; certification needs exact homogenized values");
  }
  return cert;
}

}  // namespace qmkit
