#pragma once

#include <vector>

#include "predplan/costmodel.hpp"
#include "predplan/expr.hpp"

namespace predplan {

// Combined selectivity, expected cost, and atom order for one subtree.
struct NodeSummary {
  double selectivity = 1.0;
  double cost = 0.0;
  std::vector<int> ordering;
};

double combine_and(double g1, double g2);
double combine_or(double g1, double g2);

// Weight-ordered summary of the subtree rooted at node_index: AND children
// sort by cost/(1-selectivity), OR children by cost/selectivity, both
// ascending with ties broken by lowest atom id.
NodeSummary order_node(const PredicateTree& tree, int node_index = 0);

std::vector<int> order_p(const PredicateTree& tree);

// Expected cost of evaluating the atoms in the given order with minimal
// input sets under the independence model (Simplified cost, zero overhead,
// per-atom cost factors).
double estimated_cost(const PredicateTree& tree,
                      const std::vector<int>& ordering);

// Combined selectivity of a subtree under independence.
double subtree_selectivity(const PredicateTree& tree, int node_index);

// Children of node_index in NoOrOpt evaluation order: ascending combined
// selectivity for AND nodes, source order for OR nodes.
std::vector<int> no_or_opt_child_order(const PredicateTree& tree,
                                       int node_index);

// NoOrOpt treats each disjunct as an independent expression: the scope
// marker is the node index of the nearest enclosing child-of-OR subtree,
// or -1 for atoms outside any disjunction.
struct ScopedStep {
  int atom = 0;
  int scope = -1;

  bool operator==(const ScopedStep&) const = default;
};

std::vector<ScopedStep> no_or_opt(const PredicateTree& tree);

}  // namespace predplan
