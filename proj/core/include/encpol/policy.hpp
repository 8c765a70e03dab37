#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "encpol/token.hpp"

namespace encpol {

/// Threshold-gate condition tree. A gate with c children and threshold k
/// is satisfied when at least k children are satisfied (k=1 is OR, k=c is
/// AND); a leaf carries a single value tested directly. The same shape is
/// reused with encrypted leaf payloads, so the structure is generic in the
/// leaf type.
template <typename LeafT>
struct CondNode {
  unsigned threshold = 0;            // gates only; 1 <= threshold <= children
  std::vector<CondNode> children;    // empty for leaves
  std::optional<LeafT> leaf;         // engaged iff this node is a leaf

  bool is_leaf() const { return leaf.has_value(); }

  static CondNode make_leaf(LeafT value) {
    CondNode n;
    n.leaf = std::move(value);
    return n;
  }

  static CondNode make_gate(unsigned k, std::vector<CondNode> kids) {
    if (kids.empty()) throw std::invalid_argument("gate with no children");
    if (k < 1 || k > kids.size())
      throw std::invalid_argument("gate threshold out of range");
    CondNode n;
    n.threshold = k;
    n.children = std::move(kids);
    return n;
  }

  std::size_t leaf_count() const {
    if (is_leaf()) return 1;
    std::size_t n = 0;
    for (const auto& c : children) n += c.leaf_count();
    return n;
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
  }

  bool operator==(const CondNode&) const = default;
};

using ConditionTree = CondNode<Token>;

/// Rebuilds the tree with every leaf payload transformed; gate structure is
/// copied untouched.
template <typename LeafT, typename Fn>
auto map_leaves(const CondNode<LeafT>& node, Fn&& fn)
    -> CondNode<decltype(fn(*node.leaf))> {
  using OutLeaf = decltype(fn(*node.leaf));
  CondNode<OutLeaf> out;
  if (node.is_leaf()) {
    out.leaf = fn(*node.leaf);
    return out;
  }
  out.threshold = node.threshold;
  out.children.reserve(node.children.size());
  for (const auto& c : node.children) out.children.push_back(map_leaves(c, fn));
  return out;
}

/// True iff the two trees have identical gate structure (node counts,
/// arities and thresholds), ignoring leaf payloads.
template <typename A, typename B>
bool same_shape(const CondNode<A>& lhs, const CondNode<B>& rhs) {
  if (lhs.is_leaf() != rhs.is_leaf()) return false;
  if (lhs.is_leaf()) return true;
  if (lhs.threshold != rhs.threshold) return false;
  if (lhs.children.size() != rhs.children.size()) return false;
  for (std::size_t i = 0; i < lhs.children.size(); ++i) {
    if (!same_shape(lhs.children[i], rhs.children[i])) return false;
  }
  return true;
}

enum class CmpOp { Less, Greater, LessEq, GreaterEq, Equal };

std::string_view to_string(CmpOp op);

/// name = value over string attributes.
struct StringEq {
  std::string name;
  std::string value;

  bool operator==(const StringEq&) const = default;
};

/// name op constant over an unsigned value in a fixed bit width.
struct NumericCmp {
  std::string name;
  CmpOp op = CmpOp::Equal;
  std::uint64_t constant = 0;  // < 2^bits
  unsigned bits = 1;           // 1..64

  bool operator==(const NumericCmp&) const = default;
};

using Comparison = std::variant<StringEq, NumericCmp>;

/// Boolean combination of comparisons under AND / OR / k-of-n.
struct ConditionExpr {
  enum class Kind { Compare, And, Or, KOf };

  Kind kind = Kind::Compare;
  Comparison comparison{};              // Kind::Compare only
  unsigned k = 0;                       // Kind::KOf only
  std::vector<ConditionExpr> children;  // non-Compare kinds

  static ConditionExpr compare(Comparison c);
  static ConditionExpr conjunction(std::vector<ConditionExpr> kids);
  static ConditionExpr disjunction(std::vector<ConditionExpr> kids);
  static ConditionExpr k_of(unsigned k, std::vector<ConditionExpr> kids);

  bool operator==(const ConditionExpr&) const = default;
};

/// Contextual attributes: string valued, or numeric with a declared width.
class AttributeAssignment {
 public:
  struct Numeric {
    std::uint64_t value = 0;
    unsigned bits = 1;

    bool operator==(const Numeric&) const = default;
  };
  using Value = std::variant<std::string, Numeric>;

  void set_string(std::string_view name, std::string_view value);
  /// Throws std::invalid_argument when value >= 2^bits or bits not in 1..64.
  void set_numeric(std::string_view name, std::uint64_t value, unsigned bits);

  const std::map<std::string, Value>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  bool operator==(const AttributeAssignment&) const = default;

 private:
  std::map<std::string, Value> entries_;
};

/// "name=value" for strings; numerics expand to one single-bit wildcard
/// pattern token per position, most significant bit first.
TokenSet expand_attributes(const AttributeAssignment& attrs);

/// The pattern token fixing bit `position` (0 = most significant) of an
/// s-bit value to `bit`, all other positions wildcarded.
Token bit_token(std::string_view name, unsigned bits, unsigned position, bool bit);

/// Compiles a numeric comparison to a threshold-gate subtree over bit
/// pattern tokens, satisfied by the expansion of (name, v, bits) exactly
/// when `v op constant` holds. Throws when constant >= 2^bits.
ConditionTree compile_numeric(std::string_view name, CmpOp op,
                              std::uint64_t constant, unsigned bits);

/// Compiles a full condition expression: AND -> k=c gate, OR -> k=1 gate,
/// k-of-n -> threshold gate, comparisons -> leaves or numeric subtrees.
ConditionTree compile_condition(const ConditionExpr& expr);

/// Plaintext evaluation: a leaf is satisfied iff its token is present, a
/// gate iff at least `threshold` children are satisfied. Reference
/// semantics for the encrypted evaluator.
bool evaluate(const ConditionTree& tree, const TokenSet& present);

}  // namespace encpol
