#include "encpol/policy.hpp"

#include <atomic>
#include <stdexcept>

namespace encpol {

namespace {

std::uint64_t width_limit(unsigned bits) {
  if (bits < 1 || bits > 64)
    throw std::invalid_argument("bit width must be in 1..64");
  return bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

bool bit_of(std::uint64_t value, unsigned bits, unsigned position) {
  // position 0 is the most significant of the `bits`-wide window.
  return (value >> (bits - 1 - position)) & 1;
}

Token never_token() {
  static std::atomic<std::uint64_t> counter{0};
  // '<' and '>' cannot appear in parsed names or values, so these tokens
  // collide with no attribute expansion.
  return Token::normalize("<never:" + std::to_string(counter.fetch_add(1)) + ">");
}

ConditionTree always_tree(std::string_view name, unsigned bits) {
  std::vector<ConditionTree> kids;
  kids.push_back(ConditionTree::make_leaf(bit_token(name, bits, 0, false)));
  kids.push_back(ConditionTree::make_leaf(bit_token(name, bits, 0, true)));
  return ConditionTree::make_gate(1, std::move(kids));
}

// One disjunct per position i where K's bit differs from `target` in the
// right direction: all earlier bits pinned to K's bits, bit i pinned to
// `target`. A single-leaf disjunct collapses to the leaf itself.
ConditionTree strict_compare_tree(std::string_view name, std::uint64_t constant,
                                  unsigned bits, bool target) {
  std::vector<ConditionTree> arms;
  for (unsigned i = 0; i < bits; ++i) {
    if (bit_of(constant, bits, i) == target) continue;
    std::vector<ConditionTree> leaves;
    for (unsigned j = 0; j < i; ++j)
      leaves.push_back(
          ConditionTree::make_leaf(bit_token(name, bits, j, bit_of(constant, bits, j))));
    leaves.push_back(ConditionTree::make_leaf(bit_token(name, bits, i, target)));
    const auto arity = static_cast<unsigned>(leaves.size());
    arms.push_back(arity == 1 ? std::move(leaves.front())
                              : ConditionTree::make_gate(arity, std::move(leaves)));
  }
  if (arms.empty()) return ConditionTree::make_leaf(never_token());
  if (arms.size() == 1) return std::move(arms.front());
  return ConditionTree::make_gate(1, std::move(arms));
}

}  // namespace

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Less: return "<";
    case CmpOp::Greater: return ">";
    case CmpOp::LessEq: return "<=";
    case CmpOp::GreaterEq: return ">=";
    case CmpOp::Equal: return "=";
  }
  throw std::logic_error("unreachable");
}

ConditionExpr ConditionExpr::compare(Comparison c) {
  ConditionExpr e;
  e.kind = Kind::Compare;
  e.comparison = std::move(c);
  return e;
}

ConditionExpr ConditionExpr::conjunction(std::vector<ConditionExpr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty conjunction");
  ConditionExpr e;
  e.kind = Kind::And;
  e.children = std::move(kids);
  return e;
}

ConditionExpr ConditionExpr::disjunction(std::vector<ConditionExpr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty disjunction");
  ConditionExpr e;
  e.kind = Kind::Or;
  e.children = std::move(kids);
  return e;
}

ConditionExpr ConditionExpr::k_of(unsigned k, std::vector<ConditionExpr> kids) {
  if (kids.empty()) throw std::invalid_argument("empty threshold expression");
  if (k < 1 || k > kids.size())
    throw std::invalid_argument("threshold out of range");
  ConditionExpr e;
  e.kind = Kind::KOf;
  e.k = k;
  e.children = std::move(kids);
  return e;
}

void AttributeAssignment::set_string(std::string_view name, std::string_view value) {
  Token n = Token::normalize(name);
  Token v = Token::normalize(value);
  entries_[n.text()] = v.text();
}

void AttributeAssignment::set_numeric(std::string_view name, std::uint64_t value,
                                      unsigned bits) {
  if (value > width_limit(bits))
    throw std::invalid_argument("value " + std::to_string(value) +
                                " does not fit in " + std::to_string(bits) + " bits");
  Token n = Token::normalize(name);
  entries_[n.text()] = Numeric{value, bits};
}

Token bit_token(std::string_view name, unsigned bits, unsigned position, bool bit) {
  std::string pattern(bits, '*');
  pattern[position] = bit ? '1' : '0';
  return Token::normalize(std::string(name) + ":" + pattern);
}

TokenSet expand_attributes(const AttributeAssignment& attrs) {
  TokenSet out;
  for (const auto& [name, value] : attrs.entries()) {
    if (const auto* text = std::get_if<std::string>(&value)) {
      out.insert(Token::normalize(name + "=" + *text));
    } else {
      const auto& num = std::get<AttributeAssignment::Numeric>(value);
      for (unsigned i = 0; i < num.bits; ++i)
        out.insert(bit_token(name, num.bits, i, bit_of(num.value, num.bits, i)));
    }
  }
  return out;
}

ConditionTree compile_numeric(std::string_view name, CmpOp op,
                              std::uint64_t constant, unsigned bits) {
  const std::uint64_t max = width_limit(bits);
  if (constant > max)
    throw std::invalid_argument("comparison constant does not fit in " +
                                std::to_string(bits) + " bits");
  switch (op) {
    case CmpOp::Greater:
      return strict_compare_tree(name, constant, bits, true);
    case CmpOp::Less:
      return strict_compare_tree(name, constant, bits, false);
    case CmpOp::GreaterEq:
      if (constant == 0) return always_tree(name, bits);
      return strict_compare_tree(name, constant - 1, bits, true);
    case CmpOp::LessEq:
      if (constant == max) return always_tree(name, bits);
      return strict_compare_tree(name, constant + 1, bits, false);
    case CmpOp::Equal: {
      std::vector<ConditionTree> leaves;
      for (unsigned i = 0; i < bits; ++i)
        leaves.push_back(
            ConditionTree::make_leaf(bit_token(name, bits, i, bit_of(constant, bits, i))));
      if (leaves.size() == 1) return std::move(leaves.front());
      const auto arity = static_cast<unsigned>(leaves.size());
      return ConditionTree::make_gate(arity, std::move(leaves));
    }
  }
  throw std::logic_error("unreachable");
}

ConditionTree compile_condition(const ConditionExpr& expr) {
  switch (expr.kind) {
    case ConditionExpr::Kind::Compare:
      if (const auto* eq = std::get_if<StringEq>(&expr.comparison))
        return ConditionTree::make_leaf(Token::normalize(eq->name + "=" + eq->value));
      else {
        const auto& cmp = std::get<NumericCmp>(expr.comparison);
        return compile_numeric(cmp.name, cmp.op, cmp.constant, cmp.bits);
      }
    case ConditionExpr::Kind::And:
    case ConditionExpr::Kind::Or:
    case ConditionExpr::Kind::KOf: {
      std::vector<ConditionTree> kids;
      kids.reserve(expr.children.size());
      for (const auto& c : expr.children) kids.push_back(compile_condition(c));
      unsigned k = expr.kind == ConditionExpr::Kind::And
                       ? static_cast<unsigned>(kids.size())
                       : (expr.kind == ConditionExpr::Kind::Or ? 1 : expr.k);
      return ConditionTree::make_gate(k, std::move(kids));
    }
  }
  throw std::logic_error("unreachable");
}

bool evaluate(const ConditionTree& tree, const TokenSet& present) {
  if (tree.is_leaf()) return present.contains(*tree.leaf);
  unsigned satisfied = 0;
  for (const auto& child : tree.children) {
    if (evaluate(child, present)) ++satisfied;
    if (satisfied >= tree.threshold) return true;
  }
  return false;
}

}  // namespace encpol
