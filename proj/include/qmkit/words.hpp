#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmkit {

// One letter of S ∪ S^-1. Letters are ordered a < A < b < B < ...; that order
// drives every deterministic tie-break in the library.
struct Letter {
  std::uint8_t gen = 0;
  std::int8_t sign = 1;

  constexpr Letter inverse() const noexcept {
    return Letter{gen, static_cast<std::int8_t>(-sign)};
  }
  constexpr std::uint8_t code() const noexcept {
    return static_cast<std::uint8_t>(gen * 2 + (sign < 0 ? 1 : 0));
  }
  static constexpr Letter from_code(std::uint8_t c) noexcept {
    return Letter{static_cast<std::uint8_t>(c / 2),
                  static_cast<std::int8_t>(c % 2 ? -1 : 1)};
  }

  friend constexpr bool operator==(Letter a, Letter b) noexcept {
    return a.code() == b.code();
  }
  friend constexpr std::strong_ordering operator<=>(Letter a, Letter b) noexcept {
    return a.code() <=> b.code();
  }
};

inline constexpr std::size_t kMaxGenerators = 120;

// A finite letter sequence. Storage is one byte per letter, so short words
// live entirely in the small-string buffer.
class Word {
 public:
  class const_iterator {
   public:
    using iterator_category = std::random_access_iterator_tag;
    using value_type = Letter;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = Letter;

    const_iterator() = default;
    explicit const_iterator(std::string::const_iterator it) : it_(it) {}
    Letter operator*() const { return Letter::from_code(static_cast<std::uint8_t>(*it_)); }
    Letter operator[](difference_type n) const { return *(*this + n); }
    const_iterator& operator++() { ++it_; return *this; }
    const_iterator operator++(int) { auto t = *this; ++it_; return t; }
    const_iterator& operator--() { --it_; return *this; }
    const_iterator operator--(int) { auto t = *this; --it_; return t; }
    const_iterator& operator+=(difference_type n) { it_ += n; return *this; }
    const_iterator& operator-=(difference_type n) { it_ -= n; return *this; }
    friend const_iterator operator+(const_iterator a, difference_type n) { return a += n; }
    friend const_iterator operator+(difference_type n, const_iterator a) { return a += n; }
    friend const_iterator operator-(const_iterator a, difference_type n) { return a -= n; }
    friend difference_type operator-(const_iterator a, const_iterator b) { return a.it_ - b.it_; }
    friend bool operator==(const const_iterator&, const const_iterator&) = default;
    friend auto operator<=>(const const_iterator&, const const_iterator&) = default;

   private:
    std::string::const_iterator it_{};
  };

  Word() = default;
  Word(std::initializer_list<Letter> letters) {
    for (Letter l : letters) push_back(l);
  }

  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  Letter operator[](std::size_t i) const {
    return Letter::from_code(static_cast<std::uint8_t>(codes_[i]));
  }
  Letter front() const { return (*this)[0]; }
  Letter back() const { return (*this)[size() - 1]; }
  void push_back(Letter l) { codes_.push_back(static_cast<char>(l.code())); }
  void pop_back() { codes_.pop_back(); }
  void append(const Word& other) { codes_ += other.codes_; }
  void clear() noexcept { codes_.clear(); }
  Word subword(std::size_t pos, std::size_t len = std::string::npos) const {
    Word w;
    w.codes_ = codes_.substr(pos, len);
    return w;
  }

  const_iterator begin() const { return const_iterator(codes_.begin()); }
  const_iterator end() const { return const_iterator(codes_.end()); }

  // Raw byte encoding (one Letter::code() per byte).
  const std::string& codes() const noexcept { return codes_; }

  friend bool operator==(const Word&, const Word&) = default;
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
    return a.codes_.compare(b.codes_) <=> 0;
  }

 private:
  std::string codes_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept {
    return std::hash<std::string>{}(w.codes());
  }
};

Word concat(const Word& u, const Word& v);

// Reversed sequence with flipped signs. Model-free.
Word invert(const Word& u);

// Cancels adjacent x x^-1 pairs.
Word free_reduce(const Word& u);

bool is_freely_reduced(const Word& u);

Word power(const Word& u, long n);

// ---------------------------------------------------------------------------
// Models

enum class ModelKind { Free, FreeAbelian, FreeProductCyclic, ExplicitGraph };

struct GraphEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  Letter label;  // traversing u -> v reads `label`, v -> u reads its inverse
};

struct ExplicitGraph {
  std::uint32_t num_vertices = 0;
  std::vector<GraphEdge> edges;
};

class GroupModel {
 public:
  static GroupModel free(int rank, std::vector<std::string> names = {});
  static GroupModel free_abelian(int rank, std::vector<std::string> names = {});
  // Order 0 means an infinite cyclic factor; otherwise the order is >= 2.
  static GroupModel free_product(std::vector<int> orders, std::vector<std::string> names = {});
  static GroupModel explicit_graph(ExplicitGraph graph, std::vector<std::string> names);

  ModelKind kind() const noexcept { return kind_; }
  int rank() const noexcept { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& alphabet() const noexcept { return names_; }
  const std::vector<int>& orders() const noexcept { return orders_; }
  const ExplicitGraph& graph() const { return graph_; }

  bool has_group_law() const noexcept { return kind_ != ModelKind::ExplicitGraph; }
  // Cayley graph is a tree: Free, Z, free products of Z and Z/2.
  bool is_tree() const noexcept;
  // Group is infinite (the left action on the Cayley graph is then proper
  // with trivial stabilizers and discrete orbits).
  bool is_infinite() const noexcept;

  // Letters that label Cayley-graph edges leaving a vertex, in letter order.
  // An order-2 generator contributes only its positive letter.
  std::vector<Letter> step_letters() const;

  Word normal_form(const Word& u) const;
  Word multiply(const Word& u, const Word& v) const;
  Word inverse(const Word& u) const { return normal_form(invert(u)); }
  Word identity() const { return Word{}; }
  // Word-metric length |u|. Normal forms of the built-in models are
  // geodesic words, so this is the length of the normal form.
  std::size_t length(const Word& u) const { return normal_form(u).size(); }
  // Left-invariant word metric d(u, v) = |u^-1 v|.
  std::size_t distance(const Word& u, const Word& v) const;

  std::string letter_name(Letter l) const;
  std::string format(const Word& u) const;
  // Declaration line as written in a group file, e.g. "free 2".
  std::string describe() const;

  friend bool operator==(const GroupModel& a, const GroupModel& b) {
    return a.kind_ == b.kind_ && a.names_ == b.names_ && a.orders_ == b.orders_;
  }

 private:
  void require_group_law(const char* op) const;
  void check_word(const Word& u) const;

  ModelKind kind_ = ModelKind::Free;
  std::vector<std::string> names_;
  std::vector<int> orders_;  // FreeProductCyclic (and Free as all-zero)
  ExplicitGraph graph_;
  std::string graph_path_;

 public:
  void set_graph_path(std::string path) { graph_path_ = std::move(path); }
};

// Parses text with lowercase generators, uppercase inverses and `x^n` /
// `(…)^n` powers; "1" or "" is the identity. Returns the freely reduced word.
Word parse_word(std::string_view text, const GroupModel& model);

Word multiply(const Word& u, const Word& v, const GroupModel& model);

struct CyclicReduction {
  Word core;
  Word conjugator;  // u = conjugator * core * conjugator^-1
};

// Free models only.
CyclicReduction cyclic_reduce(const Word& u, const GroupModel& model);

// Group-file loader: `model free 2`, `model abelian 2`, `model freeproduct 2 3`,
// `model graph <path>`, optional `generators a b`. '#' starts a comment.
GroupModel load_group_file(const std::string& path);
GroupModel parse_group_text(std::string_view text, const std::string& base_dir = ".");

// Adjacency-list reader: one `u v label` line per edge, 0-based ids.
ExplicitGraph load_graph_file(const std::string& path, std::vector<std::string>& names);

}  // namespace qmkit
