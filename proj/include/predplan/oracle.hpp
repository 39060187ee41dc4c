#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "predplan/engine.hpp"
#include "predplan/planner.hpp"

namespace predplan {

struct OracleReport {
  std::vector<int> best_ordering;
  double best_cost = 0.0;
  std::uint64_t candidate_count = 0;  // n! for a full ordering search
  bool matched = true;  // tested plan reached best_cost within tolerance
};

namespace detail {

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

}  // namespace detail

// Minimum BestD-driven plan cost over every atom ordering, found by
// depth-first search with cost pruning. An optional seed ordering primes
// the incumbent; matched reports whether the seed's cost is within
// tolerance of the optimum. Guarded to n <= 8.
template <typename E>
OracleReport exhaustive_optimal(const PredicateTree& tree, const E& evaluator,
                                const CostModel& model,
                                const std::vector<int>& seed_ordering = {},
                                double tolerance = 1e-9) {
  const int n = tree.atom_count();
  if (n > 8) {
    throw std::invalid_argument("exhaustive ordering search limited to 8 atoms");
  }

  OracleReport report;
  report.candidate_count = detail::factorial(n);

  double incumbent = std::numeric_limits<double>::infinity();
  double seed_cost = std::numeric_limits<double>::infinity();
  std::vector<int> best;
  if (!seed_ordering.empty()) {
    Session<E> session(tree, evaluator, model);
    seed_cost = execute_ordering(session, seed_ordering, "oracle").total_cost;
    incumbent = seed_cost;
    best = seed_ordering;
  }

  Session<E> session(tree, evaluator, model);
  std::vector<int> prefix;
  prefix.reserve(n);
  auto dfs = [&](auto&& self, double so_far) -> void {
    if (so_far >= incumbent) return;  // step costs only grow the total
    if (static_cast<int>(prefix.size()) == n) {
      incumbent = so_far;
      best = prefix;
      return;
    }
    for (int atom = 1; atom <= n; ++atom) {
      if (session.applied(atom)) continue;
      auto trial = session.begin_trial(atom);
      session.apply_next(atom);
      prefix.push_back(atom);
      self(self, so_far + session.steps().back().cost);
      prefix.pop_back();
      session.end_trial(std::move(trial));
    }
  };
  dfs(dfs, 0.0);

  report.best_cost = incumbent;
  report.best_ordering = std::move(best);
  report.matched =
      seed_ordering.empty() || seed_cost <= report.best_cost + tolerance;
  return report;
}

// True iff result holds exactly the records satisfying the tree, by direct
// per-record evaluation.
bool verify_result(const PredicateTree& tree, const Table& table,
                   const Bitmap& result);

// Enumerates every permutation of a pure AND or OR chain, returning the
// cheapest, and checks the prefix-ordering property: for every subset held
// in the leading positions, some minimal arrangement starts with that
// subset's lowest-weight member. Guarded to n <= 7.
OracleReport brute_prefix(NodeKind kind,
                          const std::vector<std::pair<double, double>>& atoms);

}  // namespace predplan
