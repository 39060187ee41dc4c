#include "predplan/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "predplan/costmodel.hpp"

namespace predplan {

namespace {

bool eval_row(const PredicateTree& tree, int node_index, const Table& table,
              std::size_t row) {
  const auto& node = tree.node(node_index);
  switch (node.kind) {
    case NodeKind::Leaf:
      return eval_atom_on_row(table, tree.atom(node.atom), row);
    case NodeKind::And:
      for (int child : node.children) {
        if (!eval_row(tree, child, table, row)) return false;
      }
      return true;
    case NodeKind::Or:
      for (int child : node.children) {
        if (eval_row(tree, child, table, row)) return true;
      }
      return false;
  }
  return false;
}

}  // namespace

bool verify_result(const PredicateTree& tree, const Table& table,
                   const Bitmap& result) {
  if (result.size() != table.row_count) return false;
  for (std::size_t row = 0; row < table.row_count; ++row) {
    if (eval_row(tree, 0, table, row) != result.test(row)) return false;
  }
  return true;
}

OracleReport brute_prefix(
    NodeKind kind, const std::vector<std::pair<double, double>>& atoms) {
  if (kind == NodeKind::Leaf) {
    throw std::invalid_argument("chain kind must be AND or OR");
  }
  const int n = static_cast<int>(atoms.size());
  if (n < 1 || n > 7) {
    throw std::invalid_argument("prefix enumeration limited to 1..7 atoms");
  }

  std::vector<double> weight(n);
  for (int i = 0; i < n; ++i) {
    weight[i] = kind == NodeKind::And
                    ? and_weight(atoms[i].first, atoms[i].second)
                    : or_weight(atoms[i].first, atoms[i].second);
  }

  const std::size_t masks = std::size_t{1} << n;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> min_any(masks, kInf);
  std::vector<double> min_low_weight_first(masks, kInf);
  std::vector<double> min_weight_in(masks, kInf);
  for (std::size_t m = 1; m < masks; ++m) {
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1) min_weight_in[m] = std::min(min_weight_in[m], weight[i]);
    }
  }

  OracleReport report;
  report.candidate_count = detail::factorial(n);
  report.best_cost = kInf;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<double, double>> chain(n);
  do {
    for (int i = 0; i < n; ++i) chain[i] = atoms[perm[i]];
    const double cost = kind == NodeKind::And ? and_chain_cost(chain)
                                              : or_chain_cost(chain);
    if (cost < report.best_cost) {
      report.best_cost = cost;
      report.best_ordering.assign(perm.begin(), perm.end());
      for (int& id : report.best_ordering) ++id;
    }
    std::size_t mask = 0;
    for (int k = 0; k < n; ++k) {
      mask |= std::size_t{1} << perm[k];
      min_any[mask] = std::min(min_any[mask], cost);
      if (weight[perm[0]] <= min_weight_in[mask] + 1e-12) {
        min_low_weight_first[mask] =
            std::min(min_low_weight_first[mask], cost);
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  report.matched = true;
  for (std::size_t m = 1; m < masks; ++m) {
    if (min_any[m] == kInf) continue;
    if (!(min_low_weight_first[m] <= min_any[m] + 1e-9)) {
      report.matched = false;
      break;
    }
  }
  return report;
}

}  // namespace predplan
