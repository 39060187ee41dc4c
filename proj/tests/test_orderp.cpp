#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "predplan/expr.hpp"
#include "predplan/generator.hpp"
#include "predplan/orderp.hpp"

using namespace predplan;
using doctest::Approx;

namespace {

// A AND (B OR (C AND D)) with the worked selectivities; atoms 1..4 = A..D.
PredicateTree example1() {
  PredicateTree tree = compile(
      "a < 0.5 AND (b < 0.5 OR (c < 0.5 AND d < 0.5))");
  tree.atom(1).selectivity = 0.820;
  tree.atom(2).selectivity = 0.313;
  tree.atom(3).selectivity = 0.469;
  tree.atom(4).selectivity = 0.984;
  return tree;
}

PredicateTree two_atom(const char* op, double g1, double g2) {
  PredicateTree tree = compile(std::string("a < 1 ") + op + " b < 1");
  tree.atom(1).selectivity = g1;
  tree.atom(2).selectivity = g2;
  return tree;
}

}  // namespace

TEST_SUITE("orderp") {
  TEST_CASE("selectivity combination") {
    CHECK(combine_and(0.469, 0.984) == Approx(0.4615).epsilon(0.001));
    CHECK(combine_or(0.313, 0.4615) == Approx(0.6300).epsilon(0.001));
    CHECK(combine_or(0.37, 0.0) == Approx(0.37));
    CHECK(combine_and(0.37, 1.0) == Approx(0.37));
    CHECK(combine_or(1.0, 0.123) == Approx(1.0));
  }

  TEST_CASE("worked example orders C, D, B, A") {
    const std::vector<int> expected = {3, 4, 2, 1};
    CHECK(order_p(example1()) == expected);
  }

  TEST_CASE("single atom orders trivially") {
    PredicateTree tree = compile("a < 1");
    CHECK(order_p(tree) == std::vector<int>{1});
    CHECK(estimated_cost(tree, {1}) == Approx(1.0));
  }

  TEST_CASE("lower and-weight goes first") {
    CHECK(order_p(two_atom("AND", 0.1, 0.9)) == std::vector<int>{1, 2});
    CHECK(order_p(two_atom("AND", 0.9, 0.1)) == std::vector<int>{2, 1});
    // For OR the cheap pass goes first: low weight c/gamma.
    CHECK(order_p(two_atom("OR", 0.9, 0.1)) == std::vector<int>{1, 2});
  }

  TEST_CASE("weight ties break toward the lower atom id") {
    CHECK(order_p(two_atom("AND", 0.5, 0.5)) == std::vector<int>{1, 2});
    CHECK(order_p(two_atom("OR", 0.5, 0.5)) == std::vector<int>{1, 2});
  }

  TEST_CASE("estimated cost of the worked orderings") {
    const PredicateTree tree = example1();
    CHECK(estimated_cost(tree, {3, 4, 2, 1}) == Approx(2.638).epsilon(0.0005));
    CHECK(estimated_cost(tree, {2, 3, 1, 4}) == Approx(2.586).epsilon(0.0005));
  }

  TEST_CASE("order_node reports chain cost and combined selectivity") {
    const PredicateTree tree = example1();
    const NodeSummary summary = order_node(tree);
    CHECK(summary.cost == Approx(2.638).epsilon(0.0005));
    CHECK(summary.selectivity == Approx(0.820 * 0.630005).epsilon(0.001));
    CHECK(summary.ordering == std::vector<int>{3, 4, 2, 1});
  }

  TEST_CASE("order_p emits a permutation on random trees") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      GenConfig config;
      config.depth = 2 + static_cast<int>(seed % 3);
      config.children_range = {2, 4};
      config.n_max = 12;
      config.rng_seed = seed;
      config.cost_mode = seed % 2 ? GenConfig::CostMode::Varying
                                  : GenConfig::CostMode::Uniform;
      const PredicateTree tree = gen_instance(config, 64).tree;
      std::vector<int> ordering = order_p(tree);
      CHECK(static_cast<int>(ordering.size()) == tree.atom_count());
      std::sort(ordering.begin(), ordering.end());
      for (int i = 0; i < tree.atom_count(); ++i) {
        CHECK(ordering[static_cast<std::size_t>(i)] == i + 1);
      }
    }
  }

  TEST_CASE("ordering the worked example beats its reverse") {
    const PredicateTree tree = example1();
    const double best = estimated_cost(tree, order_p(tree));
    CHECK(best <= estimated_cost(tree, {1, 2, 4, 3}) + 1e-9);
    CHECK(best <= estimated_cost(tree, {4, 3, 2, 1}) + 1e-9);
  }

  TEST_CASE("subtree selectivity multiplies and unions") {
    const PredicateTree tree = example1();
    CHECK(subtree_selectivity(tree, 0) ==
          Approx(0.820 * 0.630005).epsilon(0.001));
    const int or_node = tree.lineage(4)[1];
    CHECK(subtree_selectivity(tree, or_node) == Approx(0.630005).epsilon(0.001));
  }

  TEST_CASE("conjunction baseline runs in increasing selectivity") {
    PredicateTree tree = two_atom("AND", 0.7, 0.2);
    const std::vector<ScopedStep> steps = no_or_opt(tree);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == ScopedStep{2, -1});
    CHECK(steps[1] == ScopedStep{1, -1});
  }

  TEST_CASE("disjuncts get their own scopes") {
    PredicateTree tree = two_atom("OR", 0.5, 0.5);
    const std::vector<ScopedStep> steps = no_or_opt(tree);
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].atom == 1);
    CHECK(steps[1].atom == 2);
    CHECK(steps[0].scope != steps[1].scope);
    CHECK(steps[0].scope >= 0);
    CHECK(steps[1].scope >= 0);
  }

  TEST_CASE("a single atom is its own baseline") {
    PredicateTree tree = compile("a < 1");
    const std::vector<ScopedStep> steps = no_or_opt(tree);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0] == ScopedStep{1, -1});
  }

  TEST_CASE("mixed tree scopes mark the enclosing disjunct") {
    const PredicateTree tree = example1();
    const std::vector<ScopedStep> steps = no_or_opt(tree);
    REQUIRE(steps.size() == 4);
    int scope_a = -2;
    int scope_b = -2;
    int scope_c = -2;
    int scope_d = -2;
    for (const ScopedStep& step : steps) {
      if (step.atom == 1) scope_a = step.scope;
      if (step.atom == 2) scope_b = step.scope;
      if (step.atom == 3) scope_c = step.scope;
      if (step.atom == 4) scope_d = step.scope;
    }
    CHECK(scope_a == -1);
    CHECK(scope_b >= 0);
    CHECK(scope_c >= 0);
    CHECK(scope_c == scope_d);
    CHECK(scope_b != scope_c);
  }

  TEST_CASE("and children sort by subtree selectivity") {
    const PredicateTree tree = example1();
    // Root children: leaf A (0.820) and the OR subtree (0.630).
    const std::vector<int> order = no_or_opt_child_order(tree, 0);
    REQUIRE(order.size() == 2);
    CHECK(tree.node(order[0]).kind == NodeKind::Or);
    CHECK(tree.node(order[1]).kind == NodeKind::Leaf);
  }

  TEST_CASE("atoms without usable selectivity are rejected") {
    PredicateTree tree = compile("a < 1 AND b < 1");
    tree.atom(1).selectivity = -0.25;
    CHECK_THROWS(order_p(tree));
  }
}
