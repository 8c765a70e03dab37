#include <gtest/gtest.h>

#include <random>

#include "encpol/policy.hpp"
#include "test_util.hpp"

using namespace encpol;

namespace {

bool predicate(std::uint64_t v, CmpOp op, std::uint64_t k) {
  switch (op) {
    case CmpOp::Less: return v < k;
    case CmpOp::Greater: return v > k;
    case CmpOp::LessEq: return v <= k;
    case CmpOp::GreaterEq: return v >= k;
    case CmpOp::Equal: return v == k;
  }
  return false;
}

TokenSet expansion(std::string_view name, std::uint64_t v, unsigned bits) {
  AttributeAssignment attrs;
  attrs.set_numeric(name, v, bits);
  return expand_attributes(attrs);
}

void check_gate_invariants(const ConditionTree& node) {
  if (node.is_leaf()) {
    EXPECT_TRUE(node.children.empty());
    return;
  }
  EXPECT_GE(node.threshold, 1u);
  EXPECT_LE(node.threshold, node.children.size());
  for (const auto& child : node.children) check_gate_invariants(child);
}

}  // namespace

TEST(Token, NormalizationRules) {
  EXPECT_EQ(Token::normalize("Location=HR-WARD").text(), "Location=HR-WARD");
  EXPECT_EQ(Token::normalize("AT : 0****").text(), "AT:0****");
  EXPECT_EQ(Token::normalize("  a b\tc \n").text(), "abc");
  EXPECT_THROW(Token::normalize("   "), std::invalid_argument);
  EXPECT_THROW(Token::normalize(""), std::invalid_argument);
}

TEST(Attributes, ExpansionMatchesWordedExample) {
  AttributeAssignment attrs;
  attrs.set_string("Location", "HR-WARD");
  attrs.set_numeric("AT", 10, 5);

  TokenSet expected;
  for (const char* t : {"Location=HR-WARD", "AT:0****", "AT:*1***", "AT:**0**",
                        "AT:***1*", "AT:****0"})
    expected.insert(Token::normalize(t));
  EXPECT_EQ(expand_attributes(attrs), expected);
}

TEST(Attributes, SingleBitAndBoundsChecks) {
  TokenSet single = expansion("x", 0, 1);
  EXPECT_EQ(single.size(), 1u);
  EXPECT_TRUE(single.contains(Token::normalize("x:0")));

  AttributeAssignment attrs;
  EXPECT_THROW(attrs.set_numeric("AT", 32, 5), std::invalid_argument);
  EXPECT_THROW(attrs.set_numeric("AT", 1, 0), std::invalid_argument);
  EXPECT_THROW(attrs.set_numeric("AT", 1, 65), std::invalid_argument);
  EXPECT_NO_THROW(attrs.set_numeric("AT", 31, 5));
}

TEST(Attributes, ExpansionArityAndShape) {
  for (unsigned bits = 1; bits <= 8; ++bits) {
    for (std::uint64_t v : {std::uint64_t{0}, (std::uint64_t{1} << bits) - 1,
                            std::uint64_t{1} % (std::uint64_t{1} << bits)}) {
      TokenSet tokens = expansion("n", v, bits);
      EXPECT_EQ(tokens.size(), bits);  // one token per bit position
      for (const Token& t : tokens) {
        std::string_view text = t.text();
        auto colon = text.find(':');
        ASSERT_NE(colon, std::string_view::npos);
        std::string_view pattern = text.substr(colon + 1);
        EXPECT_EQ(pattern.size(), bits);
        EXPECT_EQ(pattern.size() - std::count(pattern.begin(), pattern.end(), '*'), 1u);
      }
    }
  }
}

TEST(CompileNumeric, WordedRangeExamples) {
  ConditionTree above9 = compile_numeric("AT", CmpOp::Greater, 9, 5);
  ConditionTree below17 = compile_numeric("AT", CmpOp::Less, 17, 5);
  EXPECT_TRUE(evaluate(above9, expansion("AT", 10, 5)));
  EXPECT_FALSE(evaluate(above9, expansion("AT", 9, 5)));
  EXPECT_TRUE(evaluate(below17, expansion("AT", 10, 5)));
  EXPECT_FALSE(evaluate(below17, expansion("AT", 17, 5)));

  // Brute force both subtrees over the full 5-bit domain.
  for (std::uint64_t v = 0; v < 32; ++v) {
    EXPECT_EQ(evaluate(above9, expansion("AT", v, 5)), v > 9) << v;
    EXPECT_EQ(evaluate(below17, expansion("AT", v, 5)), v < 17) << v;
  }
}

TEST(CompileNumeric, EqualityShape) {
  ConditionTree tree = compile_numeric("x", CmpOp::Equal, 5, 3);  // 101
  ASSERT_FALSE(tree.is_leaf());
  EXPECT_EQ(tree.threshold, 3u);
  ASSERT_EQ(tree.children.size(), 3u);
  EXPECT_EQ(tree.children[0].leaf->text(), "x:1**");
  EXPECT_EQ(tree.children[1].leaf->text(), "x:*0*");
  EXPECT_EQ(tree.children[2].leaf->text(), "x:**1");
}

TEST(CompileNumeric, BoundaryConstants) {
  // Always-true forms: a 1-of-2 gate over the two MSB leaves.
  for (const ConditionTree& tree :
       {compile_numeric("n", CmpOp::GreaterEq, 0, 4),
        compile_numeric("n", CmpOp::LessEq, 15, 4)}) {
    ASSERT_FALSE(tree.is_leaf());
    EXPECT_EQ(tree.threshold, 1u);
    ASSERT_EQ(tree.children.size(), 2u);
    EXPECT_EQ(tree.children[0].leaf->text(), "n:0***");
    EXPECT_EQ(tree.children[1].leaf->text(), "n:1***");
    for (std::uint64_t v = 0; v < 16; ++v)
      EXPECT_TRUE(evaluate(tree, expansion("n", v, 4)));
  }

  // Unsatisfiable forms: a single reserved leaf that matches nothing.
  for (const ConditionTree& tree : {compile_numeric("n", CmpOp::Greater, 15, 4),
                                    compile_numeric("n", CmpOp::Less, 0, 4)}) {
    ASSERT_TRUE(tree.is_leaf());
    for (std::uint64_t v = 0; v < 16; ++v)
      EXPECT_FALSE(evaluate(tree, expansion("n", v, 4)));
  }

  // Fresh reserved leaves never collide with each other either.
  ConditionTree a = compile_numeric("n", CmpOp::Greater, 15, 4);
  ConditionTree b = compile_numeric("n", CmpOp::Greater, 15, 4);
  EXPECT_NE(a.leaf->text(), b.leaf->text());

  EXPECT_THROW(compile_numeric("n", CmpOp::Greater, 16, 4), std::invalid_argument);
}

TEST(CompileNumeric, ExhaustiveAgainstDirectPredicate) {
  const CmpOp ops[] = {CmpOp::Less, CmpOp::Greater, CmpOp::LessEq, CmpOp::GreaterEq,
                       CmpOp::Equal};
  for (unsigned bits = 1; bits <= 4; ++bits) {
    const std::uint64_t max = (std::uint64_t{1} << bits) - 1;
    for (CmpOp op : ops) {
      for (std::uint64_t k = 0; k <= max; ++k) {
        ConditionTree tree = compile_numeric("n", op, k, bits);
        check_gate_invariants(tree);
        for (std::uint64_t v = 0; v <= max; ++v) {
          EXPECT_EQ(evaluate(tree, expansion("n", v, bits)), predicate(v, op, k))
              << "op=" << to_string(op) << " k=" << k << " v=" << v
              << " bits=" << bits;
        }
      }
    }
  }
}

TEST(CompileCondition, WardPolicyShape) {
  std::vector<ConditionExpr> kids;
  kids.push_back(ConditionExpr::compare(StringEq{"Location", "HR-WARD"}));
  kids.push_back(ConditionExpr::compare(NumericCmp{"AT", CmpOp::Greater, 9, 5}));
  kids.push_back(ConditionExpr::compare(NumericCmp{"AT", CmpOp::Less, 17, 5}));
  ConditionTree tree = compile_condition(ConditionExpr::conjunction(std::move(kids)));

  ASSERT_FALSE(tree.is_leaf());
  EXPECT_EQ(tree.threshold, 3u);
  ASSERT_EQ(tree.children.size(), 3u);
  ASSERT_TRUE(tree.children[0].is_leaf());
  EXPECT_EQ(tree.children[0].leaf->text(), "Location=HR-WARD");
  EXPECT_FALSE(tree.children[1].is_leaf());
  EXPECT_FALSE(tree.children[2].is_leaf());
  check_gate_invariants(tree);
}

TEST(CompileCondition, SingleComparisonAndThreshold) {
  ConditionTree leaf =
      compile_condition(ConditionExpr::compare(StringEq{"role", "doctor"}));
  ASSERT_TRUE(leaf.is_leaf());
  EXPECT_EQ(leaf.leaf->text(), "role=doctor");

  std::vector<ConditionExpr> kids;
  for (const char* v : {"a", "b", "c"})
    kids.push_back(ConditionExpr::compare(StringEq{v, "1"}));
  ConditionTree two_of_three =
      compile_condition(ConditionExpr::k_of(2, std::move(kids)));
  ASSERT_FALSE(two_of_three.is_leaf());
  EXPECT_EQ(two_of_three.threshold, 2u);
  EXPECT_EQ(two_of_three.children.size(), 3u);

  EXPECT_THROW(ConditionExpr::k_of(4, std::vector<ConditionExpr>(
                                          3, ConditionExpr::compare(StringEq{"a", "1"}))),
               std::invalid_argument);
  EXPECT_THROW(ConditionExpr::k_of(0, std::vector<ConditionExpr>(
                                          3, ConditionExpr::compare(StringEq{"a", "1"}))),
               std::invalid_argument);
}

TEST(Evaluate, WardScenario) {
  std::vector<ConditionExpr> kids;
  kids.push_back(ConditionExpr::compare(StringEq{"Location", "HR-WARD"}));
  kids.push_back(ConditionExpr::compare(NumericCmp{"AT", CmpOp::Greater, 9, 5}));
  kids.push_back(ConditionExpr::compare(NumericCmp{"AT", CmpOp::Less, 17, 5}));
  ConditionTree tree = compile_condition(ConditionExpr::conjunction(std::move(kids)));

  AttributeAssignment ok;
  ok.set_string("Location", "HR-WARD");
  ok.set_numeric("AT", 10, 5);
  EXPECT_TRUE(evaluate(tree, expand_attributes(ok)));

  AttributeAssignment early;
  early.set_string("Location", "HR-WARD");
  early.set_numeric("AT", 8, 5);
  EXPECT_FALSE(evaluate(tree, expand_attributes(early)));

  AttributeAssignment elsewhere;
  elsewhere.set_string("Location", "ICU");
  elsewhere.set_numeric("AT", 10, 5);
  EXPECT_FALSE(evaluate(tree, expand_attributes(elsewhere)));
}

TEST(Evaluate, TrivialGates) {
  ConditionTree one_of_one = ConditionTree::make_gate(
      1, {ConditionTree::make_leaf(Token::normalize("present"))});
  TokenSet with{Token::normalize("present")};
  EXPECT_TRUE(evaluate(one_of_one, with));
  EXPECT_FALSE(evaluate(one_of_one, TokenSet{}));
}

TEST(Evaluate, MonotoneInTokenSet) {
  testutil::PolicyGen gen(77, 6, 4);
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    ConditionTree tree = compile_condition(gen.policy().condition);
    TokenSet tokens = expand_attributes(gen.attributes());
    bool before = evaluate(tree, tokens);
    TokenSet more = tokens;
    more.insert(Token::normalize("extra" + std::to_string(rng() % 10)));
    // Adding a random leaf token from the tree must never flip true->false.
    const ConditionTree* node = &tree;
    while (!node->is_leaf()) node = &node->children[rng() % node->children.size()];
    more.insert(*node->leaf);
    EXPECT_TRUE(!before || evaluate(tree, more));
  }
}

TEST(Trees, MapLeavesAndShape) {
  ConditionTree tree = compile_numeric("AT", CmpOp::Greater, 9, 5);
  auto lengths = map_leaves(tree, [](const Token& t) { return t.text().size(); });
  EXPECT_TRUE(same_shape(tree, lengths));
  EXPECT_EQ(tree.leaf_count(), lengths.leaf_count());
  EXPECT_EQ(tree.node_count(), lengths.node_count());

  ConditionTree other = compile_numeric("AT", CmpOp::Greater, 10, 5);
  ConditionTree narrower = compile_numeric("AT", CmpOp::Greater, 9, 4);
  EXPECT_FALSE(same_shape(tree, narrower));
  // Same constant pattern of zero bits gives the same shape even for a
  // different constant; a leaf never matches a gate.
  EXPECT_FALSE(same_shape(tree, ConditionTree::make_leaf(Token::normalize("x"))));
  (void)other;
}

TEST(Trees, GateConstruction) {
  EXPECT_THROW(ConditionTree::make_gate(1, {}), std::invalid_argument);
  EXPECT_THROW(ConditionTree::make_gate(
                   0, {ConditionTree::make_leaf(Token::normalize("a"))}),
               std::invalid_argument);
  EXPECT_THROW(ConditionTree::make_gate(
                   2, {ConditionTree::make_leaf(Token::normalize("a"))}),
               std::invalid_argument);
}
