#include "qmkit/counting.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <cctype>
#include <queue>
#include <random>

#include "qmkit/error.hpp"

namespace qmkit {

namespace {

Letter normalize_letter(const GroupModel& model, Letter l) {
  if (model.kind() == ModelKind::FreeProductCyclic && model.orders()[l.gen] == 2) {
    return Letter{l.gen, 1};
  }
  return l;
}

Word normalize_labels(const GroupModel& model, const Word& w) {
  Word out;
  for (Letter l : w) out.push_back(normalize_letter(model, l));
  return out;
}

struct ScaledCosts {
  std::int64_t edge;  // q
  std::int64_t arc;   // |w| q - p
  std::int64_t q;
};

ScaledCosts scaled_costs(const CountingSpec& spec) {
  Integer q = spec.W.get_den();
  Integer p = spec.W.get_num();
  Integer arc = Integer(static_cast<unsigned long>(spec.w.size())) * q - p;
  if (!q.fits_slong_p() || !arc.fits_slong_p()) throw Unsupported("W has too large a denominator");
  return {q.get_si(), arc.get_si(), q.get_si()};
}

// Region mask for slack s, from BFS distances to x and y.
std::vector<char> slack_region(const std::vector<int>& dx, const std::vector<int>& dy, int d,
                               int slack) {
  std::vector<char> in(dx.size(), 0);
  for (std::size_t v = 0; v < dx.size(); ++v) {
    in[v] = dx[v] >= 0 && dy[v] >= 0 && dx[v] + dy[v] <= d + 2 * slack;
  }
  return in;
}

Rational dijkstra_infimum(const Ball& region, const CountingSpec& spec, VertexId x, VertexId y,
                          const std::vector<char>& in) {
  const auto costs = scaled_costs(spec);
  constexpr std::int64_t kInf = INT64_MAX;
  std::vector<std::int64_t> best(region.size(), kInf);
  using Item = std::pair<std::int64_t, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  best[x] = 0;
  heap.emplace(0, x);
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du != best[u]) continue;
    if (u == y) break;
    for (const auto& e : region.neighbors(u)) {
      if (!in[e.to]) continue;
      if (du + costs.edge < best[e.to]) {
        best[e.to] = du + costs.edge;
        heap.emplace(best[e.to], e.to);
      }
    }
    // The w-arc from u exists when the whole translated w-path stays in the
    // search region.
    VertexId cur = u;
    bool ok = true;
    for (Letter l : spec.w) {
      auto nx = region.step(cur, l);
      if (!nx || !in[*nx]) {
        ok = false;
        break;
      }
      cur = *nx;
    }
    if (ok && du + costs.arc < best[cur]) {
      best[cur] = du + costs.arc;
      heap.emplace(best[cur], cur);
    }
  }
  if (best[y] == kInf) throw Error("augmented search: target unreachable");
  Rational r(best[y], costs.q);
  r.canonicalize();
  return r;
}

bool slack_safe(const Ball& region, VertexId x, VertexId y, int d, int slack) {
  if (region.kind() == RegionKind::Tube) {
    if (region.model().is_tree()) return slack <= region.radius();
    return (d + 2 * slack) / 2 <= region.radius();
  }
  return region.dist0(x) + region.dist0(y) + d + 2 * slack <= 2 * region.radius() + 1;
}

// Walks that could beat `inf` have length < inf |w| / (|w| - W).
bool length_certified(const CountingSpec& spec, int d, int slack, const Rational& inf) {
  Rational len(static_cast<long>(spec.w.size()));
  return Rational(d + 2 * slack) * (len - spec.W) >= inf * len;
}

}  // namespace

CountingSpec make_spec(const GroupModel& model, const Word& w, const Rational& W) {
  if (!model.has_group_law()) throw Unsupported("counting functions need a group model");
  if (w.empty()) throw ParseError("counting word must be nonempty");
  for (Letter l : w) {
    if (l.gen >= model.rank()) throw ParseError("counting word uses an unknown generator");
  }
  CountingSpec spec{normalize_labels(model, w), W};
  spec.W.canonicalize();
  for (std::size_t i = 1; i < spec.w.size(); ++i) {
    if (normalize_letter(model, spec.w[i].inverse()) == spec.w[i - 1]) {
      throw ParseError("counting word " + model.format(w) + " is not reduced");
    }
  }
  if (spec.W <= 0 || spec.W >= static_cast<long>(spec.w.size())) {
    throw ParseError("W must satisfy 0 < W < |w|, got " + to_string(spec.W));
  }
  return spec;
}

CountingSpec inverse_spec(const GroupModel& model, const CountingSpec& spec) {
  return CountingSpec{normalize_labels(model, invert(spec.w)), spec.W};
}

Rational augmented_infimum(const Ball& region, const CountingSpec& spec, VertexId x, VertexId y,
                           int slack) {
  auto dx = bfs_distances(region, x);
  auto dy = bfs_distances(region, y);
  if (dx[y] < 0) throw Error("augmented search: target unreachable");
  return dijkstra_infimum(region, spec, x, y, slack_region(dx, dy, dx[y], slack));
}

CountingResult counting_value(const Ball& region, const CountingSpec& spec, VertexId x,
                              VertexId y, int initial_slack) {
  if (initial_slack < 1) throw ParseError("slack must be at least 1");
  if (!region.reliable(x, y)) {
    throw UnreliableDistance("d(x, y) is not reliable in this region");
  }
  auto dx = bfs_distances(region, x);
  auto dy = bfs_distances(region, y);
  const int d = dx[y];
  int s = initial_slack;
  if (!slack_safe(region, x, y, d, s)) {
    throw BoundaryHit("slack " + std::to_string(s) + " search region leaves the region (radius " +
                      std::to_string(region.radius()) + ")");
  }
  for (;;) {
    auto in_prev = slack_region(dx, dy, d, s - 1);
    auto in = slack_region(dx, dy, d, s);
    Rational before = dijkstra_infimum(region, spec, x, y, in_prev);
    Rational inf = dijkstra_infimum(region, spec, x, y, in);
    CountingResult r;
    r.distance = d;
    r.slack = s;
    r.value = Rational(d) - inf;
    r.stabilized = before == inf;
    r.exact = length_certified(spec, d, s, inf);
    r.region_vertices = static_cast<std::size_t>(std::count(in.begin(), in.end(), 1));
    if (r.stabilized || r.exact) return r;
    if (!slack_safe(region, x, y, d, 2 * s)) {
      throw BoundaryHit("counting value not stabilized at slack " + std::to_string(s) +
                        " and slack " + std::to_string(2 * s) + " leaves the region");
    }
    s *= 2;
  }
}

std::size_t count_copies(const Word& labels, const Word& w) {
  if (w.empty() || labels.size() < w.size()) return 0;
  const auto& t = labels.codes();
  const auto& p = w.codes();
  std::size_t copies = 0;
  std::size_t pos = 0;
  while (pos + p.size() <= t.size()) {
    auto hit = t.find(p, pos);
    if (hit == std::string::npos) break;
    ++copies;
    pos = hit + p.size();
  }
  return copies;
}

Rational counting_bruteforce(const Ball& ball, const CountingSpec& spec, VertexId x, VertexId y,
                             int max_len, int oracle_budget) {
  auto dx = bfs_distances(ball, x);
  if (dx[y] < 0 || dx[y] > max_len) throw Error("path oracle: no path within the length bound");
  const Word w = normalize_labels(ball.model(), spec.w);
  std::optional<Rational> best;
  for_each_path(
      ball, x, y, max_len,
      [&](const Path& p) {
        Rational cost = Rational(static_cast<long>(p.length())) -
                        spec.W * static_cast<long>(count_copies(p.labels, w));
        if (!best || cost < *best) best = cost;
      },
      oracle_budget);
  return Rational(dx[y]) - *best;
}

Rational h_w(const Ball& ball, const CountingSpec& spec, const Word& g) {
  VertexId v = ball.require(g);
  auto inv = inverse_spec(ball.model(), spec);
  return counting_value(ball, spec, 0, v).value - counting_value(ball, inv, 0, v).value;
}

namespace {

// Per-period density of greedy non-overlapping matches of `pattern` in the
// periodic word core^infinity, times |core|.
Rational periodic_rate(const Word& core, const Word& pattern) {
  const std::size_t n = core.size();
  const std::size_t m = pattern.size();
  auto match_at = [&](std::size_t t) {
    for (std::size_t i = 0; i < m; ++i) {
      if (core[(t + i) % n] != pattern[i]) return false;
    }
    return true;
  };
  // Greedy leftmost matching is optimal on every prefix, so its asymptotic
  // density is the maximal one. The scan position mod n determines the rest.
  std::vector<std::int64_t> seen_pos(n, -1), seen_copies(n, 0);
  std::int64_t pos = 0, copies = 0;
  for (;;) {
    std::size_t state = static_cast<std::size_t>(pos % static_cast<std::int64_t>(n));
    if (seen_pos[state] >= 0) {
      Rational r(static_cast<long>((copies - seen_copies[state]) * static_cast<std::int64_t>(n)),
                 static_cast<long>(pos - seen_pos[state]));
      r.canonicalize();
      return r;
    }
    seen_pos[state] = pos;
    seen_copies[state] = copies;
    std::optional<std::int64_t> hit;
    for (std::size_t k = 0; k < n; ++k) {
      if (match_at(state + k)) {
        hit = pos + static_cast<std::int64_t>(k);
        break;
      }
    }
    if (!hit) return Rational(0);
    pos = *hit + static_cast<std::int64_t>(m);
    ++copies;
  }
}

}  // namespace

Rational exact_homogenized_free(const GroupModel& model, const CountingSpec& spec, const Word& g) {
  if (model.kind() != ModelKind::Free) {
    throw Unsupported("exact homogenization is only available on free groups");
  }
  Word nf = model.normal_form(g);
  if (nf.empty()) return Rational(0);
  Word core = cyclic_reduce(nf, model).core;
  return spec.W * (periodic_rate(core, spec.w) - periodic_rate(core, invert(spec.w)));
}

// ---------------------------------------------------------------------------

QmExpr QmExpr::counting(CountingSpec spec) {
  QmExpr e;
  e.kind = Kind::Counting;
  e.spec = std::move(spec);
  return e;
}

QmExpr QmExpr::homogenized(QmExpr inner) {
  QmExpr e;
  e.kind = Kind::Homogenized;
  e.parts.push_back(std::move(inner));
  return e;
}

QmExpr QmExpr::linear(std::vector<Rational> coeffs, std::vector<QmExpr> parts) {
  if (coeffs.empty() || coeffs.size() != parts.size()) {
    throw ParseError("linear combination needs matching nonempty coefficients and parts");
  }
  QmExpr e;
  e.kind = Kind::Linear;
  e.coeffs = std::move(coeffs);
  e.parts = std::move(parts);
  return e;
}

QmExpr QmExpr::homomorphism(std::vector<Rational> values) {
  QmExpr e;
  e.kind = Kind::Homomorphism;
  e.values = std::move(values);
  return e;
}

bool contains_homogenized(const QmExpr& f) {
  if (f.kind == QmExpr::Kind::Homogenized) return true;
  for (const auto& p : f.parts) {
    if (contains_homogenized(p)) return true;
  }
  return false;
}

namespace {

class QmParser {
 public:
  QmParser(std::string_view text, const GroupModel& model) : s_(text), model_(model) {}

  QmExpr parse() {
    QmExpr e = expr();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("quasimorphism expression '" + std::string(s_) + "': " + msg);
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  QmExpr expr() {
    std::vector<Rational> coeffs;
    std::vector<QmExpr> parts;
    Rational sign = 1;
    skip();
    if (eat('-')) sign = -1;
    for (;;) {
      auto [c, atom] = term();
      coeffs.push_back(sign * c);
      parts.push_back(std::move(atom));
      skip();
      if (eat('+')) {
        sign = 1;
      } else if (eat('-')) {
        sign = -1;
      } else {
        break;
      }
    }
    if (parts.size() == 1 && coeffs[0] == 1) return std::move(parts[0]);
    return QmExpr::linear(std::move(coeffs), std::move(parts));
  }

  std::pair<Rational, QmExpr> term() {
    skip();
    Rational c = 1;
    if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
      std::size_t start = i_;
      while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) ||
                                s_[i_] == '/' || s_[i_] == '.')) {
        ++i_;
      }
      c = parse_rational(s_.substr(start, i_ - start));
      expect('*');
    }
    return {c, atom()};
  }

  QmExpr atom() {
    skip();
    if (eat('(')) {
      QmExpr e = expr();
      expect(')');
      return e;
    }
    std::size_t start = i_;
    while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string name(s_.substr(start, i_ - start));
    if (name.empty()) fail("expected count(...), hom(...), homog(...) or '('");
    expect('(');
    if (name == "homog") {
      QmExpr inner = expr();
      expect(')');
      return QmExpr::homogenized(std::move(inner));
    }
    auto args = arguments();
    if (name == "count") return counting_atom(args);
    if (name == "hom") return hom_atom(args);
    fail("unknown function '" + name + "'");
  }

  // key=value pairs up to the closing parenthesis; values may contain
  // balanced parentheses.
  std::vector<std::pair<std::string, std::string>> arguments() {
    std::vector<std::pair<std::string, std::string>> out;
    skip();
    if (eat(')')) return out;
    for (;;) {
      skip();
      std::size_t start = i_;
      while (i_ < s_.size() && s_[i_] != '=' && s_[i_] != ',' && s_[i_] != ')') ++i_;
      std::string key(s_.substr(start, i_ - start));
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
      expect('=');
      skip();
      start = i_;
      int depth = 0;
      while (i_ < s_.size()) {
        char ch = s_[i_];
        if (ch == '(') ++depth;
        if (ch == ')') {
          if (depth == 0) break;
          --depth;
        }
        if (ch == ',' && depth == 0) break;
        ++i_;
      }
      std::string value(s_.substr(start, i_ - start));
      while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) {
        value.pop_back();
      }
      if (key.empty() || value.empty()) fail("empty argument");
      out.emplace_back(key, value);
      if (eat(',')) continue;
      expect(')');
      return out;
    }
  }

  QmExpr counting_atom(const std::vector<std::pair<std::string, std::string>>& args) {
    std::optional<Word> w;
    Rational W = 1;
    for (const auto& [k, v] : args) {
      if (k == "w") {
        w = parse_word(v, model_);
      } else if (k == "W") {
        W = parse_rational(v);
      } else {
        fail("count() takes w= and W=, not '" + k + "'");
      }
    }
    if (!w) fail("count() needs w=");
    return QmExpr::counting(make_spec(model_, *w, W));
  }

  QmExpr hom_atom(const std::vector<std::pair<std::string, std::string>>& args) {
    const auto& names = model_.alphabet();
    std::vector<std::optional<Rational>> vals(names.size());
    for (const auto& [k, v] : args) {
      auto it = std::find(names.begin(), names.end(), k);
      if (it == names.end()) fail("hom(): unknown generator '" + k + "'");
      auto idx = static_cast<std::size_t>(it - names.begin());
      if (vals[idx]) fail("hom(): generator '" + k + "' given twice");
      vals[idx] = parse_rational(v);
    }
    std::vector<Rational> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!vals[i]) fail("hom(): missing value for generator '" + names[i] + "'");
      if (model_.kind() == ModelKind::FreeProductCyclic && model_.orders()[i] != 0 &&
          *vals[i] != 0) {
        fail("hom(): generator '" + names[i] + "' has finite order, so its value must be 0");
      }
      out.push_back(*vals[i]);
    }
    return QmExpr::homomorphism(std::move(out));
  }

  std::string_view s_;
  const GroupModel& model_;
  std::size_t i_ = 0;
};

}  // namespace

QmExpr parse_qm(std::string_view text, const GroupModel& model) {
  if (!model.has_group_law()) throw Unsupported("quasimorphisms need a group model");
  return QmParser(text, model).parse();
}

std::string to_string(const QmExpr& f, const GroupModel& model) {
  switch (f.kind) {
    case QmExpr::Kind::Counting:
      return "count(w=" + model.format(f.spec.w) + ",W=" + to_string(f.spec.W) + ")";
    case QmExpr::Kind::Homogenized:
      return "homog(" + to_string(f.parts[0], model) + ")";
    case QmExpr::Kind::Homomorphism: {
      std::string s = "hom(";
      for (std::size_t i = 0; i < f.values.size(); ++i) {
        if (i) s += ",";
        s += model.alphabet()[i] + "=" + to_string(f.values[i]);
      }
      return s + ")";
    }
    case QmExpr::Kind::Linear: {
      std::string s;
      for (std::size_t i = 0; i < f.parts.size(); ++i) {
        Rational c = f.coeffs[i];
        if (i == 0) {
          if (c < 0) s += "-";
        } else {
          s += c < 0 ? " - " : " + ";
        }
        Rational a = abs(c);
        if (a != 1) s += to_string(a) + "*";
        bool wrap = f.parts[i].kind == QmExpr::Kind::Linear;
        s += wrap ? "(" + to_string(f.parts[i], model) + ")" : to_string(f.parts[i], model);
      }
      return s;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

QmEvaluator::QmEvaluator(GroupModel model, BallOptions opts)
    : model_(std::move(model)), opts_(opts) {
  if (!model_.has_group_law()) throw Unsupported("quasimorphisms need a group model");
}

const Ball& QmEvaluator::tube_for(const Word& g, int thickness) {
  if (!tube_ || tube_core_ != g || tube_->radius() < thickness) {
    tube_ = std::make_unique<Ball>(Ball::build_tube(model_, g, thickness, opts_));
    tube_core_ = g;
  }
  return *tube_;
}

Rational QmEvaluator::counting(const CountingSpec& spec, const Word& g) {
  Word nf = model_.normal_form(g);
  const int d = static_cast<int>(nf.size());
  if (d == 0) return Rational(0);
  auto key = std::make_pair(spec.w.codes() + "|" + to_string(spec.W), nf.codes());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++evaluations_;

  const bool tree = model_.is_tree();
  auto thickness = [&](int s) { return tree ? s : (d + 2 * s) / 2; };
  const auto y = static_cast<VertexId>(d);
  const int big_slack = d + 4 * static_cast<int>(spec.w.size()) + 8;

  // The infimum at slack 0 bounds the length of any better walk; one more
  // search at the slack covering that length is then exact.
  Rational inf0 = augmented_infimum(tube_for(nf, thickness(0)), spec, 0, y, 0);
  Rational len(static_cast<long>(spec.w.size()));
  Rational reach = inf0 * len / (len - spec.W);
  Rational extra = (reach - d) / 2;
  Integer need_z;
  mpz_cdiv_q(need_z.get_mpz_t(), extra.get_num_mpz_t(), extra.get_den_mpz_t());
  const int need = std::max(0L, need_z.get_si());
  const int m = static_cast<int>(spec.w.size());
  Rational inf;
  if (need == 0) {
    inf = inf0;
  } else if (!tree || need <= m) {
    inf = augmented_infimum(tube_for(nf, thickness(need)), spec, 0, y, need);
  } else {
    // Certified thickness would be too large. Grow the tube from |w| until
    // the infimum stops moving.
    int T = m;
    inf = augmented_infimum(tube_for(nf, T), spec, 0, y, big_slack);
    for (;;) {
      Rational next = augmented_infimum(tube_for(nf, T + 2), spec, 0, y, big_slack);
      if (next == inf) break;
      inf = next;
      T += 2;
    }
    ++uncertified_;
  }
  Rational value = Rational(d) - inf;
  cache_.emplace(std::move(key), value);
  return value;
}

Rational QmEvaluator::h(const CountingSpec& spec, const Word& g) {
  return counting(spec, g) - counting(inverse_spec(model_, spec), g);
}

Rational QmEvaluator::value(const QmExpr& f, const Word& g) {
  switch (f.kind) {
    case QmExpr::Kind::Counting:
      return h(f.spec, g);
    case QmExpr::Kind::Homomorphism: {
      if (f.values.size() != static_cast<std::size_t>(model_.rank())) {
        throw ParseError("homomorphism must give a value for every generator");
      }
      Rational sum = 0;
      for (Letter l : model_.normal_form(g)) {
        if (l.sign > 0) {
          sum += f.values[l.gen];
        } else {
          sum -= f.values[l.gen];
        }
      }
      return sum;
    }
    case QmExpr::Kind::Linear: {
      Rational sum = 0;
      for (std::size_t i = 0; i < f.parts.size(); ++i) sum += f.coeffs[i] * value(f.parts[i], g);
      return sum;
    }
    case QmExpr::Kind::Homogenized: {
      auto v = exact_homogenized(f.parts[0], g);
      if (!v) {
        throw Inconclusive("no exact homogenization for " + to_string(f, model_) +
                           " on this model; use a homogenization bracket");
      }
      return *v;
    }
  }
  throw Error("unknown expression kind");
}

Rational QmEvaluator::coboundary(const QmExpr& f, const Word& a, const Word& b) {
  return value(f, a) + value(f, b) - value(f, model_.multiply(a, b));
}

std::optional<Rational> QmEvaluator::exact_homogenized(const QmExpr& f, const Word& g) {
  switch (f.kind) {
    case QmExpr::Kind::Homomorphism:
      return value(f, g);
    case QmExpr::Kind::Counting:
      if (model_.kind() != ModelKind::Free) return std::nullopt;
      return exact_homogenized_free(model_, f.spec, g);
    case QmExpr::Kind::Homogenized:
      return exact_homogenized(f.parts[0], g);
    case QmExpr::Kind::Linear: {
      Rational sum = 0;
      for (std::size_t i = 0; i < f.parts.size(); ++i) {
        auto v = exact_homogenized(f.parts[i], g);
        if (!v) return std::nullopt;
        sum += f.coeffs[i] * *v;
      }
      return sum;
    }
  }
  return std::nullopt;
}

DefectEstimate defect_estimate(QmEvaluator& ev, const QmExpr& f, const Ball& ball,
                               std::uint64_t pair_budget, std::uint64_t seed) {
  if (!ball.has_elements()) throw Unsupported("defect estimate needs a group model");
  DefectEstimate out;
  out.defect = 0;
  out.seed = seed;
  const std::uint64_t n = ball.size();
  auto consider = [&](VertexId i, VertexId j) {
    const Word& a = ball.element(i);
    const Word& b = ball.element(j);
    Rational v = abs(ev.coboundary(f, a, b));
    ++out.pairs;
    if (v > out.defect) {
      out.defect = v;
      out.witness_a = a;
      out.witness_b = b;
    }
  };
  if (n * n <= pair_budget) {
    for (VertexId i = 0; i < n; ++i) {
      for (VertexId j = 0; j < n; ++j) consider(i, j);
    }
    return out;
  }
  out.exhaustive = false;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
  for (std::uint64_t k = 0; k < pair_budget; ++k) {
    VertexId i = pick(rng);
    VertexId j = pick(rng);
    consider(i, j);
  }
  return out;
}

HomogenizationBracket homogenize(QmEvaluator& ev, const QmExpr& f, const Word& g, int n_max,
                                 const DefectEstimate& defect) {
  if (n_max < 1) throw ParseError("n_max must be at least 1");
  HomogenizationBracket b;
  b.defect_exhaustive = defect.exhaustive;
  const GroupModel& model = ev.model();
  if (model.normal_form(g).empty()) {
    b.estimate = 0;
    b.defect_bound = 0;
    b.n_used = n_max;
    b.lower = b.upper = 0;
    return b;
  }
  for (int n = n_max; n >= 1; --n) {
    try {
      Rational v = ev.value(f, power(g, n));
      b.n_used = n;
      b.estimate = v / n;
      b.defect_bound = defect.defect;
      b.lower = b.estimate - defect.defect / n;
      b.upper = b.estimate + defect.defect / n;
      return b;
    } catch (const BudgetExceeded&) {
      if (n == 1) throw;
    }
  }
  throw Error("homogenization: no power of g could be evaluated");
}

RankResult eval_rank(QmEvaluator& ev, const std::vector<QmExpr>& qms,
                     const std::vector<Word>& elements) {
  RankResult r;
  for (const auto& f : qms) {
    std::vector<Rational> row;
    for (const auto& g : elements) {
      if (contains_homogenized(f)) {
        auto v = ev.exact_homogenized(f, g);
        if (!v) {
          throw Inconclusive("entry " + to_string(f, ev.model()) + " at " + ev.model().format(g) +
                             " only has a bracket of nonzero width");
        }
        row.push_back(*v);
      } else {
        row.push_back(ev.value(f, g));
      }
    }
    r.matrix.push_back(std::move(row));
  }
  r.rank = exact_rank(r.matrix);
  return r;
}

int exact_rank(const std::vector<std::vector<Rational>>& matrix) {
  if (matrix.empty() || matrix[0].empty()) return 0;
  const std::size_t rows = matrix.size();
  const std::size_t cols = matrix[0].size();
  std::vector<std::vector<Integer>> m(rows, std::vector<Integer>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    Integer l = 1;
    for (const auto& x : matrix[i]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    for (std::size_t j = 0; j < cols; ++j) {
      Rational scaled = matrix[i][j] * l;
      m[i][j] = scaled.get_num();
    }
  }
  Integer prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        Integer t = m[i][j] * m[r][c] - m[i][c] * m[r][j];
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        m[i][j] = t;
      }
      m[i][c] = 0;
    }
    prev = m[r][c];
    ++r;
  }
  return static_cast<int>(r);
}

}  // namespace qmkit
