#pragma once

#include <utility>
#include <vector>

#include "predplan/expr.hpp"

namespace predplan {

// Per-step cost accounting. Counts are record counts for executed plans and
// fractions of the ground set for estimated plans; both satisfy count <= total.
struct CostModel {
  enum class Variant { Basic, Simplified, Hdd };

  Variant variant = Variant::Simplified;
  double epsilon = 1.0;       // set-op/atom cost ratio, Basic only
  double kappa = 0.0;         // per-atom overhead
  double kappa_prime = 0.0;   // per-set-op overhead, Basic only
  double theta = 0.9;         // full-scan threshold, Hdd only
  double total_records = 0;   // |R|, Hdd only
};

double step_cost(const CostModel& model, const Atom& atom, double count,
                 double total);

// Cost of one set operation over operands totalling `count` records.
// Zero for Simplified and Hdd.
double setop_cost(const CostModel& model, double count);

// Cumulative probability that some earlier disjunct already passed.
struct OrChainState {
  double y = 0.0;

  void advance(double selectivity) { y += selectivity * (1.0 - y); }
};

// c1 + g1*(c2 + g2*(...)), scaled by the starting fraction.
double and_chain_cost(const std::vector<std::pair<double, double>>& chain,
                      double start = 1.0);

// sum of ci*(1 - Yi) with Y1 = 0 and Y advancing by each selectivity.
double or_chain_cost(const std::vector<std::pair<double, double>>& chain);

// cost/(1 - selectivity); +infinity when selectivity reaches 1 so degenerate
// atoms sort last.
double and_weight(double cost, double selectivity);

// cost/selectivity; +infinity when selectivity reaches 0.
double or_weight(double cost, double selectivity);

}  // namespace predplan
