#include <doctest.h>

#include <string>
#include <vector>

#include "predplan/expr.hpp"

using namespace predplan;

namespace {

// Example-1 shape: A AND (B OR (C AND D)).
PredicateTree example1() {
  PredicateTree tree = compile(
      "a < 0.5 AND (b < 0.5 OR (c < 0.5 AND d < 0.5))");
  tree.atom(1).selectivity = 0.820;
  tree.atom(2).selectivity = 0.313;
  tree.atom(3).selectivity = 0.469;
  tree.atom(4).selectivity = 0.984;
  return tree;
}

}  // namespace

TEST_SUITE("expr") {
  TEST_CASE("grammar maps AND above OR with parentheses") {
    const ParseNodePtr raw = parse("a < 5 AND (b > 3 OR c = 2)");
    REQUIRE(raw->kind == ParseNode::Kind::And);
    REQUIRE(raw->children.size() == 2);
    CHECK(raw->children[0]->kind == ParseNode::Kind::Leaf);
    REQUIRE(raw->children[1]->kind == ParseNode::Kind::Or);
    CHECK(raw->children[1]->children.size() == 2);
  }

  TEST_CASE("NOT parses as a unary node") {
    const ParseNodePtr raw = parse("NOT (a < 5)");
    REQUIRE(raw->kind == ParseNode::Kind::Not);
    REQUIRE(raw->children.size() == 1);
    CHECK(raw->children[0]->kind == ParseNode::Kind::Leaf);
  }

  TEST_CASE("empty input is a syntax error") {
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("   "), ParseError);
  }

  TEST_CASE("malformed input reports a position") {
    try {
      parse("a < ");
      FAIL("expected ParseError");
    } catch (const ParseError& error) {
      CHECK(error.position >= 3);
    }
    CHECK_THROWS_AS(parse("a < 5 AND (b > 3"), ParseError);
    CHECK_THROWS_AS(parse("a ?? 5"), ParseError);
    CHECK_THROWS_AS(parse("a < 5 b > 3"), ParseError);
  }

  TEST_CASE("negation rewrites to comparator flips") {
    CHECK(compile("NOT (a < 5)").text() == "a >= 5");
    CHECK(compile("NOT (a = 5)").text() == "a != 5");
    CHECK(compile("NOT (a < 5 AND b > 3)").text() == "a >= 5 OR b <= 3");
    CHECK(compile("NOT (a < 5 OR b > 3)").text() == "a >= 5 AND b <= 3");
    CHECK(compile("NOT NOT (a < 5)").text() == "a < 5");
  }

  TEST_CASE("comparator negation is an involution") {
    for (Cmp cmp : {Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge, Cmp::Eq, Cmp::Ne}) {
      CHECK(negate_cmp(negate_cmp(cmp)) == cmp);
      CHECK(negate_cmp(cmp) != cmp);
    }
  }

  TEST_CASE("same-kind nesting collapses to one level") {
    const PredicateTree tree = compile("a < 5 AND (b > 3 AND c = 2)");
    CHECK(tree.root().kind == NodeKind::And);
    CHECK(tree.root().children.size() == 3);
    CHECK(tree.depth() == 1);  // root holds only leaves
    CHECK(tree.text() == "a < 5 AND b > 3 AND c = 2");
  }

  TEST_CASE("duplicate atoms are rejected by name") {
    try {
      compile("a < 5 AND a < 5");
      FAIL("expected NormalizeError");
    } catch (const NormalizeError& error) {
      CHECK(std::string(error.what()).find("a < 5") != std::string::npos);
    }
    CHECK_THROWS_AS(compile("a < 5 OR (b > 1 AND a < 5)"), NormalizeError);
    // Same column with a different constant is a different atom.
    CHECK_NOTHROW(compile("a < 5 AND a < 7"));
  }

  TEST_CASE("depth counts internal levels") {
    CHECK(compile("a < 5").depth() == 1);
    CHECK(compile("a < 5 AND (b > 3 OR c = 2)").depth() == 2);
    CHECK(example1().depth() == 3);
  }

  TEST_CASE("normalization is idempotent over the text form") {
    for (const char* text : {
             "a < 5",
             "a < 5 AND (b > 3 OR c = 2)",
             "NOT (a < 5 OR (b > 3 AND c = 2))",
             "a < 0.5 AND (b < 0.5 OR (c < 0.5 AND d < 0.5))",
             "x != 'done' OR (y >= -2.5 AND z <= 10)",
         }) {
      const std::string once = compile(text).text();
      CHECK(compile(once).text() == once);
    }
  }

  TEST_CASE("atom ids run left to right and ranges are contiguous") {
    const PredicateTree tree = example1();
    REQUIRE(tree.atom_count() == 4);
    CHECK(tree.atom(1).column == "a");
    CHECK(tree.atom(2).column == "b");
    CHECK(tree.atom(3).column == "c");
    CHECK(tree.atom(4).column == "d");
    CHECK(tree.root().atom_lo == 1);
    CHECK(tree.root().atom_hi == 4);

    const std::vector<int>& lineage_d = tree.lineage(4);
    REQUIRE(lineage_d.size() == 4);
    CHECK(lineage_d[0] == 0);
    const auto& or_node = tree.node(lineage_d[1]);
    CHECK(or_node.kind == NodeKind::Or);
    CHECK(or_node.atom_lo == 2);
    CHECK(or_node.atom_hi == 4);
    const auto& inner = tree.node(lineage_d[2]);
    CHECK(inner.kind == NodeKind::And);
    CHECK(inner.atom_lo == 3);
    CHECK(inner.atom_hi == 4);
    CHECK(tree.node(lineage_d[3]).atom == 4);

    for (int id = 1; id <= 4; ++id) {
      CHECK(tree.lineage(id).front() == 0);
      CHECK(tree.node(tree.leaf_index(id)).atom == id);
    }
  }

  TEST_CASE("levels start at 1 and grow along lineages") {
    const PredicateTree tree = example1();
    CHECK(tree.root().level == 1);
    for (int id = 1; id <= tree.atom_count(); ++id) {
      const auto& lineage = tree.lineage(id);
      for (std::size_t i = 0; i < lineage.size(); ++i) {
        CHECK(tree.node(lineage[i]).level == static_cast<int>(i) + 1);
      }
    }
  }

  TEST_CASE("literals keep their type") {
    const PredicateTree tree = compile("a < 5 AND b = 'five' AND c >= -2.5");
    CHECK(std::get<double>(tree.atom(1).value) == 5.0);
    CHECK(std::get<std::string>(tree.atom(2).value) == "five");
    CHECK(std::get<double>(tree.atom(3).value) == -2.5);
    CHECK(tree.text() == "a < 5 AND b = 'five' AND c >= -2.5");
  }

  TEST_CASE("keywords are case-insensitive") {
    CHECK(compile("a < 5 and not (b > 3 or c = 2)").text() ==
          compile("a < 5 AND NOT (b > 3 OR c = 2)").text());
  }
}
