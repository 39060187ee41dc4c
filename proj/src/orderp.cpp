#include "predplan/orderp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "predplan/evaluator.hpp"
#include "predplan/planner.hpp"

namespace predplan {

double combine_and(double g1, double g2) { return g1 * g2; }

double combine_or(double g1, double g2) { return g1 + g2 - g1 * g2; }

namespace {

double checked_selectivity(const Atom& atom) {
  const double g = atom.selectivity;
  if (std::isnan(g) || g < 0.0 || g > 1.0) {
    throw std::invalid_argument("atom '" + atom.text() +
                                "' has no usable selectivity");
  }
  return g;
}

}  // namespace

NodeSummary order_node(const PredicateTree& tree, int node_index) {
  const auto& node = tree.node(node_index);
  if (node.kind == NodeKind::Leaf) {
    const Atom& atom = tree.atom(node.atom);
    return NodeSummary{checked_selectivity(atom), atom.cost_factor,
                       {node.atom}};
  }

  struct Ranked {
    NodeSummary summary;
    double weight;
    int atom_lo;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(node.children.size());
  for (int child : node.children) {
    Ranked entry{order_node(tree, child), 0.0, tree.node(child).atom_lo};
    entry.weight = node.kind == NodeKind::And
                       ? and_weight(entry.summary.cost,
                                    entry.summary.selectivity)
                       : or_weight(entry.summary.cost,
                                   entry.summary.selectivity);
    ranked.push_back(std::move(entry));
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return a.atom_lo < b.atom_lo;
  });

  NodeSummary out;
  if (node.kind == NodeKind::And) {
    double pass = 1.0;  // fraction still alive entering each child
    double total = 0.0;
    for (const Ranked& entry : ranked) {
      total += pass * entry.summary.cost;
      pass = combine_and(pass, entry.summary.selectivity);
    }
    out.selectivity = pass;
    out.cost = total;
  } else {
    OrChainState state;  // fraction already short-circuited
    double total = 0.0;
    double sel = 0.0;
    for (const Ranked& entry : ranked) {
      total += (1.0 - state.y) * entry.summary.cost;
      state.advance(entry.summary.selectivity);
      sel = combine_or(sel, entry.summary.selectivity);
    }
    out.selectivity = sel;
    out.cost = total;
  }
  for (const Ranked& entry : ranked) {
    out.ordering.insert(out.ordering.end(), entry.summary.ordering.begin(),
                        entry.summary.ordering.end());
  }
  return out;
}

std::vector<int> order_p(const PredicateTree& tree) {
  return order_node(tree).ordering;
}

double estimated_cost(const PredicateTree& tree,
                      const std::vector<int>& ordering) {
  FractionEvaluator evaluator(tree);
  CostModel model;  // Simplified, zero overhead
  Session<FractionEvaluator> session(tree, evaluator, model);
  return execute_ordering(session, ordering, "estimate").total_cost;
}

double subtree_selectivity(const PredicateTree& tree, int node_index) {
  const auto& node = tree.node(node_index);
  if (node.kind == NodeKind::Leaf) {
    return checked_selectivity(tree.atom(node.atom));
  }
  double sel = node.kind == NodeKind::And ? 1.0 : 0.0;
  for (int child : node.children) {
    const double g = subtree_selectivity(tree, child);
    sel = node.kind == NodeKind::And ? combine_and(sel, g)
                                     : combine_or(sel, g);
  }
  return sel;
}

std::vector<int> no_or_opt_child_order(const PredicateTree& tree,
                                       int node_index) {
  const auto& node = tree.node(node_index);
  std::vector<int> order = node.children;
  if (node.kind != NodeKind::And) return order;
  std::vector<double> sel(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sel[i] = subtree_selectivity(tree, order[i]);
  }
  std::vector<std::size_t> index(order.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  std::sort(index.begin(), index.end(), [&](std::size_t a, std::size_t b) {
    if (sel[a] != sel[b]) return sel[a] < sel[b];
    return tree.node(order[a]).atom_lo < tree.node(order[b]).atom_lo;
  });
  std::vector<int> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : index) sorted.push_back(order[i]);
  return sorted;
}

std::vector<ScopedStep> no_or_opt(const PredicateTree& tree) {
  std::vector<ScopedStep> steps;
  auto walk = [&](auto&& self, int node_index, int scope) -> void {
    const auto& node = tree.node(node_index);
    if (node.kind == NodeKind::Leaf) {
      steps.push_back(ScopedStep{node.atom, scope});
      return;
    }
    for (int child : no_or_opt_child_order(tree, node_index)) {
      const int child_scope =
          node.kind == NodeKind::Or ? child : scope;
      self(self, child, child_scope);
    }
  };
  walk(walk, 0, -1);
  return steps;
}

}  // namespace predplan
