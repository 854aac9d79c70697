#include "qmkit/words.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "qmkit/error.hpp"

namespace qmkit {

Word concat(const Word& u, const Word& v) {
  Word w = u;
  w.append(v);
  return w;
}

Word invert(const Word& u) {
  Word w;
  for (std::size_t i = u.size(); i-- > 0;) w.push_back(u[i].inverse());
  return w;
}

Word free_reduce(const Word& u) {
  Word w;
  for (Letter l : u) {
    if (!w.empty() && w.back() == l.inverse()) {
      w.pop_back();
    } else {
      w.push_back(l);
    }
  }
  return w;
}

bool is_freely_reduced(const Word& u) {
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] == u[i - 1].inverse()) return false;
  }
  return true;
}

Word power(const Word& u, long n) {
  Word base = n < 0 ? invert(u) : u;
  Word w;
  for (long i = 0; i < (n < 0 ? -n : n); ++i) w.append(base);
  return w;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> default_names(int rank) {
  if (rank < 0 || static_cast<std::size_t>(rank) > 26) {
    throw ParseError("rank must lie in [0, 26] for default generator names");
  }
  std::vector<std::string> names;
  for (int i = 0; i < rank; ++i) names.emplace_back(1, static_cast<char>('a' + i));
  return names;
}

void validate_names(const std::vector<std::string>& names) {
  if (names.size() > kMaxGenerators) throw ParseError("too many generators");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& n = names[i];
    if (n.size() != 1 || !std::islower(static_cast<unsigned char>(n[0]))) {
      throw ParseError("generator names must be single lowercase letters, got '" + n + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (names[j] == n) throw ParseError("duplicate generator name '" + n + "'");
    }
  }
}

long canonical_exponent(long e, int order) {
  if (order == 0) return e;
  long r = ((e % order) + order) % order;
  if (2 * r > order) r -= order;
  return r;
}

struct Syllable {
  std::uint8_t gen;
  long exp;
};

void push_syllable(std::vector<Syllable>& stack, std::uint8_t gen, long exp,
                   const std::vector<int>& orders) {
  if (!stack.empty() && stack.back().gen == gen) {
    long e = canonical_exponent(stack.back().exp + exp, orders[gen]);
    if (e == 0) {
      stack.pop_back();
    } else {
      stack.back().exp = e;
    }
    return;
  }
  long e = canonical_exponent(exp, orders[gen]);
  if (e != 0) stack.push_back({gen, e});
}

Word render_syllables(const std::vector<Syllable>& stack) {
  Word w;
  for (const auto& s : stack) {
    Letter l{s.gen, static_cast<std::int8_t>(s.exp > 0 ? 1 : -1)};
    for (long i = 0; i < (s.exp > 0 ? s.exp : -s.exp); ++i) w.push_back(l);
  }
  return w;
}

}  // namespace

GroupModel GroupModel::free(int rank, std::vector<std::string> names) {
  if (rank < 0) throw ParseError("rank must be non-negative");
  GroupModel m;
  m.kind_ = ModelKind::Free;
  m.names_ = names.empty() ? default_names(rank) : std::move(names);
  if (static_cast<int>(m.names_.size()) != rank) throw ParseError("generator count does not match rank");
  validate_names(m.names_);
  m.orders_.assign(m.names_.size(), 0);
  return m;
}

GroupModel GroupModel::free_abelian(int rank, std::vector<std::string> names) {
  if (rank < 0) throw ParseError("rank must be non-negative");
  GroupModel m;
  m.kind_ = ModelKind::FreeAbelian;
  m.names_ = names.empty() ? default_names(rank) : std::move(names);
  if (static_cast<int>(m.names_.size()) != rank) throw ParseError("generator count does not match rank");
  validate_names(m.names_);
  m.orders_.assign(m.names_.size(), 0);
  return m;
}

GroupModel GroupModel::free_product(std::vector<int> orders, std::vector<std::string> names) {
  for (int o : orders) {
    if (o != 0 && o < 2) throw ParseError("cyclic factor orders must be 0 (infinite) or >= 2");
  }
  GroupModel m;
  m.kind_ = ModelKind::FreeProductCyclic;
  m.names_ = names.empty() ? default_names(static_cast<int>(orders.size())) : std::move(names);
  if (m.names_.size() != orders.size()) throw ParseError("generator count does not match factor count");
  validate_names(m.names_);
  m.orders_ = std::move(orders);
  return m;
}

GroupModel GroupModel::explicit_graph(ExplicitGraph graph, std::vector<std::string> names) {
  validate_names(names);
  for (const auto& e : graph.edges) {
    if (e.u >= graph.num_vertices || e.v >= graph.num_vertices) {
      throw ParseError("graph edge endpoint out of range");
    }
    if (e.label.gen >= names.size()) throw ParseError("graph edge label outside alphabet");
  }
  GroupModel m;
  m.kind_ = ModelKind::ExplicitGraph;
  m.names_ = std::move(names);
  m.graph_ = std::move(graph);
  return m;
}

bool GroupModel::is_tree() const noexcept {
  switch (kind_) {
    case ModelKind::Free:
      return true;
    case ModelKind::FreeAbelian:
      return rank() <= 1;
    case ModelKind::FreeProductCyclic:
      return std::all_of(orders_.begin(), orders_.end(), [](int o) { return o == 0 || o == 2; });
    case ModelKind::ExplicitGraph:
      return false;
  }
  return false;
}

bool GroupModel::is_infinite() const noexcept {
  switch (kind_) {
    case ModelKind::Free:
    case ModelKind::FreeAbelian:
      return rank() >= 1;
    case ModelKind::FreeProductCyclic: {
      if (std::any_of(orders_.begin(), orders_.end(), [](int o) { return o == 0; })) return true;
      return orders_.size() >= 2;
    }
    case ModelKind::ExplicitGraph:
      return false;
  }
  return false;
}

std::vector<Letter> GroupModel::step_letters() const {
  std::vector<Letter> letters;
  for (int g = 0; g < rank(); ++g) {
    auto gen = static_cast<std::uint8_t>(g);
    letters.push_back(Letter{gen, 1});
    if (kind_ == ModelKind::FreeProductCyclic && orders_[g] == 2) continue;
    letters.push_back(Letter{gen, -1});
  }
  return letters;
}

void GroupModel::require_group_law(const char* op) const {
  if (!has_group_law()) {
    throw Unsupported(std::string(op) + ": explicit graph models carry no group law");
  }
}

void GroupModel::check_word(const Word& u) const {
  for (Letter l : u) {
    if (l.gen >= names_.size()) throw ParseError("letter outside the model's alphabet");
  }
}

Word GroupModel::normal_form(const Word& u) const {
  require_group_law("normal_form");
  check_word(u);
  switch (kind_) {
    case ModelKind::Free:
      return free_reduce(u);
    case ModelKind::FreeAbelian: {
      std::vector<long> exps(names_.size(), 0);
      for (Letter l : u) exps[l.gen] += l.sign;
      std::vector<Syllable> s;
      for (std::size_t g = 0; g < exps.size(); ++g) {
        if (exps[g] != 0) s.push_back({static_cast<std::uint8_t>(g), exps[g]});
      }
      return render_syllables(s);
    }
    case ModelKind::FreeProductCyclic: {
      std::vector<Syllable> stack;
      for (Letter l : u) push_syllable(stack, l.gen, l.sign, orders_);
      return render_syllables(stack);
    }
    case ModelKind::ExplicitGraph:
      break;
  }
  return u;
}

Word GroupModel::multiply(const Word& u, const Word& v) const {
  require_group_law("multiply");
  return normal_form(concat(u, v));
}

std::size_t GroupModel::distance(const Word& u, const Word& v) const {
  return normal_form(concat(invert(u), v)).size();
}

std::string GroupModel::letter_name(Letter l) const {
  if (l.gen >= names_.size()) return "?";
  std::string n = names_[l.gen];
  if (l.sign < 0) {
    for (auto& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return n;
}

std::string GroupModel::format(const Word& u) const {
  if (u.empty()) return "1";
  std::string out;
  for (Letter l : u) out += letter_name(l);
  return out;
}

std::string GroupModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::Free:
      os << "free " << rank();
      break;
    case ModelKind::FreeAbelian:
      os << "abelian " << rank();
      break;
    case ModelKind::FreeProductCyclic:
      os << "freeproduct";
      for (int o : orders_) os << ' ' << o;
      break;
    case ModelKind::ExplicitGraph:
      os << "graph " << (graph_path_.empty() ? "<inline>" : graph_path_);
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Word parser

namespace {

class WordParser {
 public:
  WordParser(std::string_view text, const GroupModel& model) : text_(text), model_(model) {}

  Word parse() {
    Word w = sequence();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return w;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("word '" + std::string(text_) + "': " + msg + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Word sequence() {
    Word w;
    while (true) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] == ')') return w;
      w.append(item());
    }
  }

  Word item() {
    Word base = atom();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      skip_ws();
      bool negative = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        negative = text_[pos_] == '-';
        ++pos_;
      }
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("malformed power syntax");
      if (pos_ - start > 6) fail("exponent too large");
      long n = std::stol(std::string(text_.substr(start, pos_ - start)));
      return power(base, negative ? -n : n);
    }
    return base;
  }

  Word atom() {
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Word inner = sequence();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return inner;
    }
    if (c == '1') {
      ++pos_;
      return Word{};
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    bool inverse = std::isupper(static_cast<unsigned char>(c));
    std::string name(1, static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    const auto& names = model_.alphabet();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) fail("unknown generator '" + std::string(1, c) + "'");
    ++pos_;
    Word w;
    w.push_back(Letter{static_cast<std::uint8_t>(it - names.begin()),
                       static_cast<std::int8_t>(inverse ? -1 : 1)});
    return w;
  }

  std::string_view text_;
  const GroupModel& model_;
  std::size_t pos_ = 0;
};

}  // namespace

Word parse_word(std::string_view text, const GroupModel& model) {
  return free_reduce(WordParser(text, model).parse());
}

Word multiply(const Word& u, const Word& v, const GroupModel& model) {
  return model.multiply(u, v);
}

CyclicReduction cyclic_reduce(const Word& u, const GroupModel& model) {
  if (model.kind() != ModelKind::Free) throw Unsupported("cyclic_reduce: Free models only");
  Word w = free_reduce(u);
  std::size_t lo = 0;
  std::size_t hi = w.size();
  while (hi - lo >= 2 && w[lo] == w[hi - 1].inverse()) {
    ++lo;
    --hi;
  }
  return CyclicReduction{w.subword(lo, hi - lo), w.subword(0, lo)};
}

// ---------------------------------------------------------------------------
// Files

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("malformed " + what + " '" + s + "'");
  }
}

}  // namespace

ExplicitGraph load_graph_file(const std::string& path, std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  ExplicitGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = tokens_of(line);
    if (t.empty()) continue;
    if (t.size() != 3) throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'u v label'");
    int u = parse_int(t[0], "vertex id");
    int v = parse_int(t[1], "vertex id");
    if (u < 0 || v < 0) throw ParseError(path + ":" + std::to_string(lineno) + ": negative vertex id");
    const std::string& lab = t[2];
    if (lab.size() != 1 || !std::isalpha(static_cast<unsigned char>(lab[0]))) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": label must be a single letter");
    }
    std::string name(1, static_cast<char>(std::tolower(static_cast<unsigned char>(lab[0]))));
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      names.push_back(name);
      it = names.end() - 1;
    }
    bool inverse = std::isupper(static_cast<unsigned char>(lab[0]));
    g.edges.push_back(GraphEdge{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v),
                                Letter{static_cast<std::uint8_t>(it - names.begin()),
                                       static_cast<std::int8_t>(inverse ? -1 : 1)}});
    g.num_vertices = std::max<std::uint32_t>(g.num_vertices, static_cast<std::uint32_t>(std::max(u, v) + 1));
  }
  if (g.num_vertices == 0) g.num_vertices = 1;
  return g;
}

GroupModel parse_group_text(std::string_view text, const std::string& base_dir) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> model_decl;
  std::vector<std::string> gens;
  bool have_gens = false;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto t = tokens_of(line);
    if (t.empty()) continue;
    if (t[0] == "model") {
      if (!model_decl.empty()) throw ParseError("group file declares more than one model");
      model_decl.assign(t.begin() + 1, t.end());
      if (model_decl.empty()) throw ParseError("empty model declaration");
    } else if (t[0] == "generators") {
      gens.assign(t.begin() + 1, t.end());
      have_gens = true;
    } else {
      throw ParseError("unknown group file directive '" + t[0] + "'");
    }
  }
  if (model_decl.empty()) throw ParseError("group file has no model declaration");
  const std::string& kind = model_decl[0];
  auto args = std::vector<std::string>(model_decl.begin() + 1, model_decl.end());
  if (kind == "free" || kind == "abelian") {
    if (args.size() != 1) throw ParseError("'model " + kind + "' takes one rank argument");
    int rank = parse_int(args[0], "rank");
    return kind == "free" ? GroupModel::free(rank, have_gens ? gens : std::vector<std::string>{})
                          : GroupModel::free_abelian(rank, have_gens ? gens : std::vector<std::string>{});
  }
  if (kind == "freeproduct") {
    if (args.empty()) throw ParseError("'model freeproduct' needs at least one order");
    std::vector<int> orders;
    for (const auto& a : args) orders.push_back(parse_int(a, "order"));
    return GroupModel::free_product(orders, have_gens ? gens : std::vector<std::string>{});
  }
  if (kind == "graph") {
    if (args.size() != 1) throw ParseError("'model graph' takes one path argument");
    std::filesystem::path p(args[0]);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::vector<std::string> names = have_gens ? gens : std::vector<std::string>{};
    auto graph = load_graph_file(p.string(), names);
    auto m = GroupModel::explicit_graph(std::move(graph), std::move(names));
    m.set_graph_path(args[0]);
    return m;
  }
  throw ParseError("unknown model kind '" + kind + "'");
}

GroupModel load_group_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open group file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = std::filesystem::path(path).parent_path().string();
  return parse_group_text(ss.str(), dir.empty() ? "." : dir);
}

}  // namespace qmkit
