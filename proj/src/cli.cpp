#include "qmkit/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qmkit/cayley.hpp"
#include "qmkit/counting.hpp"
#include "qmkit/dynamics.hpp"
#include "qmkit/ends.hpp"
#include "qmkit/error.hpp"
#include "qmkit/hyperbolic.hpp"
#include "qmkit/manning.hpp"
#include "qmkit/words.hpp"

namespace qmkit::cli {

namespace {

struct ParamSpec {
  const char* name;
  const char* help;
  bool required = false;
  char join = 0;  // repeatable; occurrences joined with this separator
};

struct Leaf {
  const char* group;
  const char* name;  // empty for a top-level command
  const char* help;
  int default_radius;
  std::vector<ParamSpec> params;
};

const std::vector<Leaf>& leaves() {
  static const std::vector<Leaf> table = {
      {"qm", "eval", "value of a quasimorphism expression at g", 0,
       {{"spec", "expression, e.g. count(w=ab,W=1)", true}, {"g", "group element", true}}},
      {"qm", "defect", "defect over pairs in the ball", 3,
       {{"spec", "expression", true}, {"pairs", "pair budget before sampling"}}},
      {"qm", "homogenize", "homogenization bracket f(g^n)/n +- D/n", 0,
       {{"spec", "expression", true},
        {"g", "group element", true},
        {"n", "largest power (default 8)"},
        {"defect-radius", "ball radius for the defect (default 3)"}}},
      {"qm", "rank", "evaluation matrix of homogenized specs and its exact rank", 0,
       {{"spec", "expression (repeat)", true, ';'}, {"g", "element (repeat)", true, ','}}},
      {"geom", "delta", "four-point delta of the ball", 3, {{"samples", "sample count past the exhaustive cutoff"}}},
      {"geom", "bottleneck", "bottleneck profile over pairs", 4,
       {{"pairs", "auto or u:v,u:v,..."}, {"grid", "comma separated Delta grid"}}},
      {"dyn", "classify", "hyperbolic/elliptic verdict and translation length", 0,
       {{"g", "group element", true}, {"n", "orbit length (default 6)"}}},
      {"dyn", "axis", "quasi-axis segment g^k, |k| <= n", 0,
       {{"g", "group element", true}, {"n", "half length (default 4)"}}},
      {"dyn", "diverge", "Hausdorff divergence of two quasi-axes", 0,
       {{"g1", "first element", true}, {"g2", "second element", true}, {"n", "list, default 2,3,4,5,6"}}},
      {"dyn", "similar", "bounded search for a witness of similarity", 0,
       {{"g1", "first element", true},
        {"g2", "second element", true},
        {"L", "segment length", true},
        {"R", "witness length", true},
        {"B", "offset bound", true}}},
      {"ends", "sign", "sign of the homogenization at g", 0,
       {{"f", "expression", true},
        {"g", "group element", true},
        {"n", "largest power (default 8)"},
        {"defect-radius", "ball radius for the defect (default 3)"}}},
      {"ends", "connect", "connecting word search in a slab", 30,
       {{"f", "expression", true},
        {"u", "start", true},
        {"v", "end", true},
        {"C", "slab half width", true},
        {"D", "slab level", true},
        {"vertex-budget", "BFS budget (default 200000)"}}},
      {"ends", "classify", "bushiness certificate for a pseudocharacter", 0,
       {{"f", "expression", true}, {"g1", "first element", true}, {"g2", "second element", true}}},
      {"ends", "modulus", "bornologous modulus S(R)", 3,
       {{"f", "expression", true}, {"R", "list, default 1,2,3,4"}}},
      {"manning", "scale", "admissible scale of an integer-valued f", 12, {{"f", "expression", true}}},
      {"manning", "tree", "component tree of the scaled level sets", 12, {{"f", "expression", true}}},
      {"manning", "report", "valence statistics of the component tree", 12,
       {{"f", "expression", true}, {"threshold", "bushy fraction (default 1/2)"}}},
      {"replay", "", "re-execute the config recorded in a report", 0,
       {{"report", "report JSON file", true}}},
  };
  return table;
}

const Leaf* find_leaf(const std::vector<std::string>& command) {
  for (const auto& l : leaves()) {
    std::vector<std::string> c{l.group};
    if (*l.name) c.push_back(l.name);
    if (c == command) return &l;
  }
  return nullptr;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

Json rat(const Rational& r) { return to_string(r); }

// Per-run state: the model plus typed accessors over cfg.params.
struct Context {
  const RunConfig& cfg;
  GroupModel model;
  BallOptions ball_opts;
  int radius = 0;
  Json results = Json::object();
  Json tables = Json::object();
  Json notes = Json::array();
  std::string status = "ok";
  int exit_code = kOk;

  bool has(const std::string& k) const { return cfg.params.count(k) > 0; }
  const std::string& str(const std::string& k) const {
    auto it = cfg.params.find(k);
    if (it == cfg.params.end()) throw ParseError("missing parameter --" + k);
    return it->second;
  }
  Word word(const std::string& k) const { return model.normal_form(parse_word(str(k), model)); }
  QmExpr expr(const std::string& k) const { return parse_qm(str(k), model); }
  Rational rational(const std::string& k) const { return parse_rational(str(k)); }
  long integer(const std::string& k, long fallback) const {
    if (!has(k)) return fallback;
    Rational r = rational(k);
    if (r.get_den() != 1) throw ParseError("--" + k + " must be an integer");
    return r.get_num().get_si();
  }
  std::vector<int> int_list(const std::string& k, std::vector<int> fallback) const {
    if (!has(k)) return fallback;
    std::vector<int> out;
    for (const auto& t : split(str(k), ',')) {
      Rational r = parse_rational(t);
      if (r.get_den() != 1) throw ParseError("--" + k + " entries must be integers");
      out.push_back(static_cast<int>(r.get_num().get_si()));
    }
    return out;
  }
  std::string fmt(const Word& u) const { return model.format(u); }

  void table(const std::string& name, std::vector<std::string> columns, Json rows) {
    tables[name] = Json{{"columns", columns}, {"rows", std::move(rows)}};
  }
  void inconclusive() {
    status = "inconclusive";
    exit_code = kComputation;
  }
};

Json words_json(const Context& c, const std::vector<Word>& ws) {
  Json out = Json::array();
  for (const auto& u : ws) out.push_back(c.fmt(u));
  return out;
}

void counting_provenance(Context& c, const QmEvaluator& ev) {
  c.results["counting_evaluations"] = ev.counting_evaluations();
  c.results["uncertified_evaluations"] = ev.uncertified_evaluations();
  if (ev.uncertified_evaluations() > 0) {
    c.notes.push_back("some counting values came from tube stabilization without a length certificate");
  }
}

void qm_eval(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("spec");
  Word g = c.word("g");
  c.results["spec"] = to_string(f, c.model);
  c.results["g"] = c.fmt(g);
  c.results["value"] = rat(ev.value(f, g));
  c.results["exact"] = true;
  counting_provenance(c, ev);
}

void qm_defect(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("spec");
  auto ball = build_ball(c.model, c.radius, c.ball_opts);
  auto d = defect_estimate(ev, f, ball, static_cast<std::uint64_t>(c.integer("pairs", 1'000'000)),
                           c.cfg.seed);
  c.results["spec"] = to_string(f, c.model);
  c.results["defect"] = rat(d.defect);
  c.results["exhaustive"] = d.exhaustive;
  c.results["pairs"] = d.pairs;
  c.results["witness"] = words_json(c, {d.witness_a, d.witness_b});
  if (!d.exhaustive) c.notes.push_back("defect is a sampled lower estimate");
  counting_provenance(c, ev);
}

void qm_homogenize(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("spec");
  Word g = c.word("g");
  int n = static_cast<int>(c.integer("n", 8));
  auto ball = build_ball(c.model, static_cast<int>(c.integer("defect-radius", 3)), c.ball_opts);
  auto D = defect_estimate(ev, f, ball, 1'000'000, c.cfg.seed);
  Json rows = Json::array();
  HomogenizationBracket last;
  for (int k = 1; k <= n; ++k) {
    last = homogenize(ev, f, g, k, D);
    rows.push_back({k, rat(last.estimate), rat(last.lower), rat(last.upper)});
  }
  c.results["spec"] = to_string(f, c.model);
  c.results["g"] = c.fmt(g);
  c.results["defect"] = rat(D.defect);
  c.results["defect_exhaustive"] = D.exhaustive;
  c.results["n"] = last.n_used;
  c.results["estimate"] = rat(last.estimate);
  c.results["lower"] = rat(last.lower);
  c.results["upper"] = rat(last.upper);
  if (auto ex = ev.exact_homogenized(f, g)) {
    c.results["exact_value"] = rat(*ex);
    c.notes.push_back("exact homogenized value cross-checked against the bracket");
    if (*ex < last.lower || *ex > last.upper) throw Error("exact value lies outside the bracket");
  } else {
    c.results["exact_value"] = nullptr;
  }
  c.table("bracket", {"n", "estimate", "lower", "upper"}, rows);
  counting_provenance(c, ev);
}

void qm_rank(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  std::vector<QmExpr> qms;
  Json specs = Json::array();
  for (const auto& s : split(c.str("spec"), ';')) {
    auto f = parse_qm(s, c.model);
    if (!contains_homogenized(f)) f = QmExpr::homogenized(f);
    specs.push_back(to_string(f, c.model));
    qms.push_back(std::move(f));
  }
  std::vector<Word> elems;
  for (const auto& s : split(c.str("g"), ',')) elems.push_back(c.model.normal_form(parse_word(s, c.model)));
  auto r = eval_rank(ev, qms, elems);
  Json matrix = Json::array();
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    Json row = Json::array();
    for (const auto& x : r.matrix[i]) row.push_back(rat(x));
    matrix.push_back(row);
    Json trow = Json::array({specs[i]});
    for (const auto& x : row) trow.push_back(x);
    rows.push_back(trow);
  }
  c.results["specs"] = specs;
  c.results["elements"] = words_json(c, elems);
  c.results["matrix"] = matrix;
  c.results["rank"] = r.rank;
  std::vector<std::string> cols{"spec"};
  for (const auto& e : elems) cols.push_back(c.fmt(e));
  c.table("matrix", cols, rows);
  counting_provenance(c, ev);
}

void geom_delta(Context& c) {
  auto ball = build_ball(c.model, c.radius, c.ball_opts);
  DeltaOptions o;
  o.seed = c.cfg.seed;
  o.threads = c.cfg.threads;
  if (c.has("samples")) o.samples = static_cast<std::uint64_t>(c.integer("samples", 0));
  auto d = delta_estimate(ball, o);
  c.results["vertices"] = ball.size();
  c.results["delta"] = rat(d.delta);
  c.results["sampled"] = d.sampled;
  c.results["reliable_quadruples"] = d.reliable_quadruples;
  c.results["checked"] = d.checked;
  if (d.witness) {
    Json w = Json::array();
    for (VertexId v : *d.witness) w.push_back(c.fmt(ball.element(v)));
    c.results["witness"] = w;
  }
  c.notes.push_back(d.sampled ? "quadruples sampled with the recorded seed" : "all reliable quadruples checked");
}

void geom_bottleneck(Context& c) {
  auto ball = build_ball(c.model, c.radius, c.ball_opts);
  std::vector<std::pair<VertexId, VertexId>> pairs;
  std::string spec = c.has("pairs") ? c.str("pairs") : "auto";
  if (spec == "auto") {
    pairs = reliable_pairs(ball);
  } else {
    for (const auto& p : split(spec, ',')) {
      auto parts = split(p, ':');
      if (parts.size() != 2) throw ParseError("pair '" + p + "' is not of the form u:v");
      pairs.emplace_back(ball.require(c.model.normal_form(parse_word(parts[0], c.model))),
                         ball.require(c.model.normal_form(parse_word(parts[1], c.model))));
    }
  }
  std::vector<Rational> grid;
  if (c.has("grid")) {
    for (const auto& t : split(c.str("grid"), ',')) grid.push_back(parse_rational(t));
  } else {
    grid = default_delta_grid(ball);
  }
  auto rep = bottleneck_profile(ball, pairs, grid, c.cfg.threads);
  c.results["vertices"] = ball.size();
  c.results["pairs"] = rep.pairs.size();
  c.results["grid"] = Json::array();
  for (const auto& x : rep.grid) c.results["grid"].push_back(rat(x));
  c.results["sup"] = rep.sup ? rat(*rep.sup) : Json(nullptr);
  c.results["all_resolved"] = rep.all_resolved;
  Json listed = Json::array();
  if (spec != "auto") {
    for (const auto& p : rep.pairs) {
      listed.push_back({{"x", c.fmt(ball.element(p.x))},
                        {"y", c.fmt(ball.element(p.y))},
                        {"separation", p.separation},
                        {"delta_min", p.delta_min ? rat(*p.delta_min) : Json(nullptr)}});
    }
    c.results["pair_results"] = listed;
  }
  Json rows = Json::array();
  for (const auto& g : rep.growth) rows.push_back({g.separation, rat(g.delta_min)});
  c.table("growth", {"k", "delta_min"}, rows);
  if (!rep.all_resolved) {
    c.notes.push_back("some pairs had no Delta on the grid");
    c.inconclusive();
  }
}

void dyn_classify(Context& c) {
  Word g = c.word("g");
  auto e = classify_element(c.model, g, static_cast<int>(c.integer("n", 6)));
  c.results["g"] = c.fmt(g);
  c.results["hyperbolic"] = e.hyperbolic;
  c.results["tau"] = rat(e.tau);
  c.results["exact"] = e.exact;
  c.results["core"] = c.fmt(e.core);
  c.results["reason"] = e.reason;
  Json rows = Json::array();
  for (auto [n, d] : e.orbit) rows.push_back({n, d});
  c.table("orbit", {"n", "distance"}, rows);
}

void dyn_axis(Context& c) {
  Word g = c.word("g");
  auto a = quasi_axis_segment(c.model, g, static_cast<int>(c.integer("n", 4)));
  c.results["g"] = c.fmt(g);
  c.results["n"] = a.n;
  c.results["vertices"] = words_json(c, a.vertices);
  c.results["origin"] = a.origin;
  c.results["block_length"] = a.block_length;
  c.results["K"] = rat(a.K);
  c.results["L"] = rat(a.L);
}

void dyn_diverge(Context& c) {
  Word g1 = c.word("g1"), g2 = c.word("g2");
  auto rep = axis_divergence(c.model, g1, g2, c.int_list("n", {2, 3, 4, 5, 6}));
  c.results["g1"] = c.fmt(g1);
  c.results["g2"] = c.fmt(g2);
  c.results["verdict"] = to_string(rep.verdict);
  c.results["growth_fraction"] = rat(rep.options.growth_fraction);
  c.results["plateau_bound"] = rat(rep.options.plateau_bound);
  Json rows = Json::array(), detail = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({r.n, r.symmetric});
    detail.push_back({{"n", r.n}, {"forward", r.forward}, {"backward", r.backward}, {"hausdorff", r.symmetric}});
  }
  c.results["rows"] = detail;
  c.table("divergence", {"n", "hausdorff"}, rows);
  if (rep.verdict == IndependenceVerdict::Inconclusive) c.inconclusive();
}

void dyn_similar(Context& c) {
  Word g1 = c.word("g1"), g2 = c.word("g2");
  auto v = bf_similar(c.model, g1, g2, static_cast<int>(c.integer("L", 0)),
                      static_cast<int>(c.integer("R", 0)), c.rational("B"), c.cfg.threads);
  c.results["g1"] = c.fmt(g1);
  c.results["g2"] = c.fmt(g2);
  c.results["verdict"] = v.found ? "witness" : "no_witness";
  c.results["witness"] = v.found ? Json(c.fmt(v.witness)) : Json(nullptr);
  c.results["offset"] = v.offset;
  c.results["B_used"] = v.found ? rat(v.B_used) : Json(nullptr);
  c.results["search"] = {{"L", v.L}, {"R", v.R}, {"B", rat(v.B)}, {"candidates", v.candidates},
                         {"contained", v.contained}};
  c.notes.push_back("no_witness is relative to the recorded (L, R, B) bounds");
}

DefectEstimate defect_for(Context& c, QmEvaluator& ev, const QmExpr& f) {
  auto ball = build_ball(c.model, static_cast<int>(c.integer("defect-radius", 3)), c.ball_opts);
  return defect_estimate(ev, f, ball, 1'000'000, c.cfg.seed);
}

void ends_sign(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("f");
  Word g = c.word("g");
  auto D = defect_for(c, ev, f);
  auto s = sign(ev, f, g, D, static_cast<int>(c.integer("n", 8)));
  c.results["f"] = to_string(f, c.model);
  c.results["g"] = c.fmt(g);
  c.results["sign"] = s.sign;
  c.results["exact"] = s.exact;
  c.results["lower"] = rat(s.lower);
  c.results["upper"] = rat(s.upper);
  c.results["defect"] = rat(D.defect);
  counting_provenance(c, ev);
}

Json slab_json(const Context& c, const SlabSearchResult& r) {
  Json j{{"outcome", to_string(r.outcome)},
         {"level", rat(r.level)},
         {"tolerance", rat(r.tolerance)},
         {"radius", r.radius},
         {"f_u", rat(r.f_u)},
         {"f_v", rat(r.f_v)},
         {"explored", r.explored},
         {"bfs_completed", r.bfs_completed}};
  if (r.outcome == SlabOutcome::Connected) {
    j["connecting_word"] = c.fmt(r.connecting_word);
    Json vals = Json::array();
    for (const auto& x : r.path_values) vals.push_back(rat(x));
    j["path_values"] = vals;
  }
  if (r.outcome == SlabOutcome::Disconnected) {
    j["cut_vertex"] = c.fmt(r.cut_vertex);
    j["cut_value"] = rat(r.cut_value);
    j["geodesic"] = words_json(c, r.geodesic);
  }
  return j;
}

void ends_connect(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("f");
  SlabSearchOptions o;
  o.vertex_budget = static_cast<std::uint64_t>(c.integer("vertex-budget", 200'000));
  auto r = connecting_word_search(ev, f, c.word("u"), c.word("v"), c.rational("C"), c.rational("D"),
                                  c.radius, o);
  c.results["f"] = to_string(f, c.model);
  c.results["u"] = c.fmt(c.word("u"));
  c.results["v"] = c.fmt(c.word("v"));
  c.results["search"] = slab_json(c, r);
  c.results["vertex_budget"] = o.vertex_budget;
  if (r.outcome == SlabOutcome::Exhausted) c.inconclusive();
  counting_provenance(c, ev);
}

void ends_classify(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("f");
  ClassifyOptions o;
  o.threads = c.cfg.threads;
  auto cert = classify_pseudocharacter(ev, f, c.word("g1"), c.word("g2"), o);
  c.results["f"] = to_string(f, c.model);
  c.results["g1"] = c.fmt(cert.g1);
  c.results["g2"] = c.fmt(cert.g2);
  c.results["sigma"] = cert.sigma;
  c.results["verdict"] = cert.verdict();
  Json checks = Json::array();
  for (const auto& ch : cert.checks) {
    checks.push_back({{"name", ch.name}, {"status", to_string(ch.status)}, {"detail", ch.detail}});
  }
  c.results["checks"] = checks;
  c.results["failed"] = cert.failed();
  c.results["evidence_only"] = cert.evidence_only();
  Json slabs = Json::array();
  for (const auto& s : cert.slabs) {
    Json j{{"u", c.fmt(s.u)}, {"v", c.fmt(s.v)}};
    if (s.skipped.empty()) {
      j["search"] = slab_json(c, s.result);
    } else {
      j["skipped"] = s.skipped;
    }
    slabs.push_back(j);
  }
  c.results["slabs"] = slabs;
  c.results["parameters"] = {{"defect_radius", o.defect_radius},
                             {"divergence_n", o.divergence_n},
                             {"bottleneck_radius", o.bottleneck_radius},
                             {"slab_tolerance", rat(o.slab_tolerance)},
                             {"slab_radius", o.slab_radius},
                             {"slab_vertex_budget", o.slab.vertex_budget}};
  for (const auto& n : cert.notes) c.notes.push_back(n);
  if (!cert.certified) c.inconclusive();
  counting_provenance(c, ev);
}

void ends_modulus(Context& c) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("f");
  auto ball = build_ball(c.model, c.radius, c.ball_opts);
  auto rep = bornologous_modulus(ev, f, ball, c.int_list("R", {1, 2, 3, 4}));
  Json rows = Json::array(), detail = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({r.R, rat(r.S)});
    detail.push_back({{"R", r.R}, {"S", rat(r.S)}, {"g", c.fmt(r.g)}, {"g_prime", c.fmt(r.g_prime)}});
  }
  c.results["f"] = to_string(f, c.model);
  c.results["rows"] = detail;
  c.results["tested"] = rep.tested;
  c.results["tested_radius"] = rep.tested_radius;
  c.results["F"] = rep.F;
  c.table("modulus", {"R", "S"}, rows);
  counting_provenance(c, ev);
}

Json scale_json(const ScaledChar& sc) {
  return Json{{"scale", rat(sc.scale)},
              {"max_step", rat(sc.max_step)},
              {"max_edge_change", sc.max_edge_change},
              {"scaled_edge_change", rat(sc.scale * sc.max_edge_change)},
              {"checked_vertices", sc.checked_vertices},
              {"checked_edges", sc.checked_edges}};
}

Json tree_json(const Context& c, const ComponentTree& ct, const Ball& ball) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < ct.nodes.size(); ++i) {
    const auto& n = ct.nodes[i];
    nodes.push_back({{"id", i},
                     {"band", n.band},
                     {"size", n.size},
                     {"interior", n.interior},
                     {"touches_boundary", n.touches_boundary},
                     {"depth", n.depth},
                     {"valence", ct.valence[i]},
                     {"representative", c.fmt(ball.element(n.representative))}});
  }
  Json edges = Json::array();
  for (const auto& e : ct.edges) {
    edges.push_back({{"a", e.a}, {"b", e.b}, {"track", e.track}, {"track_size", e.crossing_edges}});
  }
  return Json{{"nodes", nodes},
              {"edges", edges},
              {"tracks", ct.tracks},
              {"identity_node", ct.identity_node},
              {"radius", ct.radius},
              {"inner_radius", ct.inner_radius},
              {"two_cells", ct.two_cells}};
}

void manning_common(Context& c, bool tree, bool report) {
  QmEvaluator ev(c.model, c.ball_opts);
  auto f = c.expr("f");
  auto ball = build_ball(c.model, c.radius, c.ball_opts);
  auto sc = admissible_scale(ev, f, ball);
  c.results["f"] = to_string(f, c.model);
  c.results["vertices"] = ball.size();
  c.results["scaled"] = scale_json(sc);
  if (!tree && !report) return;
  auto ct = component_tree(sc, ball);
  if (tree) c.results["tree"] = tree_json(c, ct, ball);
  if (!c.cfg.dot.empty()) c.results["dot"] = to_dot(ct);
  if (report) {
    Rational threshold = c.has("threshold") ? c.rational("threshold") : make_rational(1, 2);
    auto st = bushiness_report(ct, threshold);
    Json hist = Json::array();
    Json rows = Json::array();
    for (auto [val, count] : st.histogram) {
      hist.push_back({{"valence", val}, {"count", count}});
      rows.push_back({val, count});
    }
    c.results["nodes"] = ct.nodes.size();
    c.results["interior"] = st.interior;
    c.results["branching"] = st.branching;
    c.results["fraction"] = rat(st.fraction);
    c.results["threshold"] = rat(threshold);
    c.results["bushy_evidence"] = st.bushy_evidence;
    c.results["identity_valence"] = ct.valence[ct.identity_node];
    c.results["interior_connected"] = st.interior_connected;
    c.results["interior_acyclic"] = st.interior_acyclic;
    c.results["histogram"] = hist;
    c.table("valence", {"valence", "count"}, rows);
  }
  if (c.model.kind() == ModelKind::FreeAbelian) c.notes.push_back("square cells used for track propagation");
}

Json error_json(const std::exception& e) {
  Json j{{"message", e.what()}};
  if (dynamic_cast<const ParseError*>(&e)) {
    j["type"] = "parse";
  } else if (auto* b = dynamic_cast<const BudgetExceeded*>(&e)) {
    j["type"] = "budget";
    j["required"] = b->required();
  } else if (dynamic_cast<const Inconclusive*>(&e)) {
    j["type"] = "inconclusive";
  } else if (dynamic_cast<const Unsupported*>(&e)) {
    j["type"] = "unsupported";
  } else if (dynamic_cast<const UnreliableDistance*>(&e)) {
    j["type"] = "unreliable-distance";
  } else if (dynamic_cast<const BoundaryHit*>(&e)) {
    j["type"] = "boundary";
  } else {
    j["type"] = "error";
  }
  return j;
}

GroupModel load_model(const RunConfig& cfg) {
  if (!cfg.group_file.empty() && !cfg.model.empty()) throw ParseError("give --group or --model, not both");
  if (!cfg.group_file.empty()) return load_group_file(cfg.group_file);
  if (!cfg.model.empty()) return parse_group_text("model " + cfg.model);
  throw ParseError("no group model: pass --group FILE or --model \"free 2\"");
}

std::string csv_field(const Json& v) {
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_null()) {
    s = "";
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void run_replay(Context& c) {
  std::ifstream in(c.str("report"));
  if (!in) throw ParseError("cannot read report '" + c.str("report") + "'");
  Json old;
  try {
    old = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("report is not JSON: ") + e.what());
  }
  if (!old.contains("config")) throw ParseError("report has no config");
  RunConfig again = config_from_json(old["config"]);
  if (find_leaf(again.command) && again.command.front() == "replay") throw ParseError("refusing to replay a replay");
  auto rep = execute(again);
  bool same = rep.doc["results"] == old["results"] && rep.doc["status"] == old["status"];
  c.results["replayed_command"] = join(again.command, ' ');
  c.results["identical"] = same;
  c.results["results"] = rep.doc["results"];
  if (!same) {
    c.status = "mismatch";
    c.exit_code = kComputation;
  }
}

const std::map<std::string, std::function<void(Context&)>>& handlers() {
  static const std::map<std::string, std::function<void(Context&)>> h = {
      {"qm eval", qm_eval},
      {"qm defect", qm_defect},
      {"qm homogenize", qm_homogenize},
      {"qm rank", qm_rank},
      {"geom delta", geom_delta},
      {"geom bottleneck", geom_bottleneck},
      {"dyn classify", dyn_classify},
      {"dyn axis", dyn_axis},
      {"dyn diverge", dyn_diverge},
      {"dyn similar", dyn_similar},
      {"ends sign", ends_sign},
      {"ends connect", ends_connect},
      {"ends classify", ends_classify},
      {"ends modulus", ends_modulus},
      {"manning scale", [](Context& c) { manning_common(c, false, false); }},
      {"manning tree", [](Context& c) { manning_common(c, true, false); }},
      {"manning report", [](Context& c) { manning_common(c, false, true); }},
  };
  return h;
}

}  // namespace

Json config_to_json(const RunConfig& cfg) {
  Json params = Json::object();
  for (const auto& [k, v] : cfg.params) params[k] = v;
  Json csv = Json::object();
  for (const auto& [k, v] : cfg.csv) csv[k] = v;
  return Json{{"command", cfg.command},
              {"group_file", cfg.group_file},
              {"model", cfg.model},
              {"radius", cfg.radius},
              {"budget", cfg.budget},
              {"seed", cfg.seed},
              {"threads", cfg.threads},
              {"params", params},
              {"out", cfg.out},
              {"csv", csv},
              {"dot", cfg.dot}};
}

RunConfig config_from_json(const Json& j) {
  RunConfig cfg;
  try {
    cfg.command = j.at("command").get<std::vector<std::string>>();
    cfg.group_file = j.value("group_file", "");
    cfg.model = j.value("model", "");
    cfg.radius = j.value("radius", -1);
    cfg.budget = j.value("budget", std::uint64_t{0});
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.threads = j.value("threads", 1u);
    cfg.dot = j.value("dot", "");
    if (j.contains("params")) {
      for (const auto& [k, v] : j["params"].items()) cfg.params[k] = v.get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

Report execute(const RunConfig& cfg) {
  Report rep;
  Json& doc = rep.doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["command"] = join(cfg.command, ' ');
  doc["config"] = config_to_json(cfg);
  doc["argv"] = cfg.argv;
  const std::string key = join(cfg.command, ' ');
  try {
    const Leaf* leaf = find_leaf(cfg.command);
    if (!leaf) throw ParseError("unknown command '" + key + "'");
    for (const auto& p : leaf->params) {
      if (p.required && !cfg.params.count(p.name)) throw ParseError(std::string("missing parameter --") + p.name);
    }
    for (const auto& [k, v] : cfg.params) {
      bool known = false;
      for (const auto& p : leaf->params) known = known || k == p.name;
      if (!known) throw ParseError("unknown parameter --" + k + " for '" + key + "'");
    }
    if (cfg.threads == 0) throw ParseError("--threads must be at least 1");
    Context c{cfg, cfg.command.front() == "replay" ? GroupModel::free(1) : load_model(cfg), {}, 0};
    c.ball_opts.vertex_budget = cfg.budget ? cfg.budget : default_vertex_budget();
    c.radius = cfg.radius >= 0 ? cfg.radius : leaf->default_radius;
    if (cfg.command.front() == "replay") {
      run_replay(c);
    } else {
      doc["config"]["model_description"] = c.model.describe();
      handlers().at(key)(c);
    }
    doc["results"] = c.results;
    doc["tables"] = c.tables;
    doc["provenance"] = {{"effective_radius", c.radius},
                         {"vertex_budget", c.ball_opts.vertex_budget},
                         {"seed", cfg.seed},
                         {"threads", cfg.threads},
                         {"notes", c.notes}};
    doc["status"] = c.status;
    rep.exit_code = c.exit_code;
  } catch (const ParseError& e) {
    doc["status"] = "error";
    doc["error"] = error_json(e);
    rep.exit_code = kUsage;
  } catch (const std::exception& e) {
    doc["status"] = dynamic_cast<const Inconclusive*>(&e) ? "inconclusive" : "error";
    doc["error"] = error_json(e);
    rep.exit_code = kComputation;
  }
  return rep;
}

std::string emit_csv(const Report& report, const std::string& table) {
  const Json& doc = report.doc;
  if (!doc.contains("tables") || !doc["tables"].contains(table)) {
    throw ParseError("no table '" + table + "' in this report");
  }
  const Json& t = doc["tables"][table];
  std::string out;
  auto line = [&](const Json& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += "\r\n";
  };
  line(t["columns"]);
  for (const auto& row : t["rows"]) line(row);
  return out;
}

void write_outputs(const Report& report, const RunConfig& cfg) {
  const std::string text = report.doc.dump(2) + "\n";
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw Error("cannot write " + cfg.out);
    f << text;
  }
  for (const auto& [name, path] : cfg.csv) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << emit_csv(report, name);
  }
  if (!cfg.dot.empty() && report.doc.contains("results") && report.doc["results"].contains("dot")) {
    std::ofstream f(cfg.dot, std::ios::binary);
    if (!f) throw Error("cannot write " + cfg.dot);
    f << report.doc["results"]["dot"].get<std::string>();
  }
}

bool parse_args(int argc, const char* const* argv, RunConfig& cfg, int& exit_code) {
  CLI::App app{"Quasimorphisms, counting functions and quasi-tree diagnostics on Cayley graphs", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::vector<std::string> csv;
  app.add_option("--group", cfg.group_file, "group file");
  app.add_option("--model", cfg.model, "inline model, e.g. \"free 2\", \"abelian 2\", \"freeproduct 2 3\"");
  app.add_option("--radius", cfg.radius, "ball radius (command default when omitted)");
  app.add_option("--budget", cfg.budget, "vertex budget (default QMKIT_VERTEX_BUDGET or 2000000)");
  app.add_option("--seed", cfg.seed, "seed for sampling")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker cap")->capture_default_str();
  app.add_option("--out", cfg.out, "report path (stdout when omitted)");
  app.add_option("--csv", csv, "write table NAME to PATH, as NAME=PATH");
  app.add_option("--dot", cfg.dot, "DOT export path (manning tree/report)");

  // storage[leaf][param] collects raw occurrences
  std::map<std::string, std::map<std::string, std::vector<std::string>>> storage;
  std::map<std::string, CLI::App*> groups;
  std::vector<std::pair<const Leaf*, CLI::App*>> subs;
  for (const auto& leaf : leaves()) {
    CLI::App* parent = nullptr;
    if (*leaf.name) {
      auto& g = groups[leaf.group];
      if (!g) {
        g = app.add_subcommand(leaf.group, std::string(leaf.group) + " commands");
        g->require_subcommand(1);
        g->fallthrough();
      }
      parent = g->add_subcommand(leaf.name, leaf.help);
    } else {
      parent = app.add_subcommand(leaf.group, leaf.help);
    }
    parent->fallthrough();
    const std::string key = std::string(leaf.group) + " " + leaf.name;
    for (const auto& p : leaf.params) {
      auto& slot = storage[key][p.name];
      auto* opt = parent->add_option(std::string("--") + p.name, slot, p.help);
      if (p.required) opt->required();
      if (!p.join) opt->expected(1);
    }
    subs.emplace_back(&leaf, parent);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    exit_code = app.exit(e);
    if (exit_code != 0) exit_code = kUsage;
    return false;
  }
  for (const auto& [leaf, sub] : subs) {
    if (!sub->parsed()) continue;
    cfg.command = {leaf->group};
    if (*leaf->name) cfg.command.push_back(leaf->name);
    const std::string key = std::string(leaf->group) + " " + leaf->name;
    for (const auto& p : leaf->params) {
      const auto& vals = storage[key][p.name];
      if (vals.empty()) continue;
      if (!p.join && vals.size() > 1) {
        std::cerr << "--" << p.name << " given more than once\n";
        exit_code = kUsage;
        return false;
      }
      cfg.params[p.name] = join(vals, p.join ? p.join : ',');
    }
  }
  for (const auto& item : csv) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      std::cerr << "--csv expects NAME=PATH, got '" << item << "'\n";
      exit_code = kUsage;
      return false;
    }
    cfg.csv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (int i = 1; i < argc; ++i) cfg.argv.push_back(argv[i]);
  return true;
}

int run(int argc, const char* const* argv) {
  RunConfig cfg;
  int code = kOk;
  if (!parse_args(argc, argv, cfg, code)) return code;
  Report rep = execute(cfg);
  try {
    for (const auto& [name, path] : cfg.csv) {
      (void)path;
      emit_csv(rep, name);
    }
  } catch (const ParseError& e) {
    if (rep.exit_code == kOk) {
      std::cerr << e.what() << "\n";
      rep.exit_code = kUsage;
    }
    RunConfig no_csv = cfg;
    no_csv.csv.clear();
    write_outputs(rep, no_csv);
    return rep.exit_code;
  }
  try {
    if (rep.exit_code != kOk && rep.doc.contains("error")) {
      RunConfig no_csv = cfg;
      no_csv.csv.clear();
      write_outputs(rep, no_csv);
      std::cerr << "qmkit: " << rep.doc["error"]["message"].get<std::string>() << "\n";
    } else {
      write_outputs(rep, cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "qmkit: " << e.what() << "\n";
    return kComputation;
  }
  return rep.exit_code;
}

}  // namespace qmkit::cli
