#include "predplan/costmodel.hpp"

#include <limits>

namespace predplan {

double step_cost(const CostModel& model, const Atom& atom, double count,
                 double total) {
  switch (model.variant) {
    case CostModel::Variant::Basic:
      return count + model.kappa;
    case CostModel::Variant::Simplified:
      return atom.cost_factor * count + model.kappa;
    case CostModel::Variant::Hdd: {
      if (total > 0 && count / total >= model.theta) {
        return total + model.kappa;
      }
      return count + model.kappa;
    }
  }
  return 0.0;
}

double setop_cost(const CostModel& model, double count) {
  if (model.variant != CostModel::Variant::Basic) return 0.0;
  return model.epsilon * (count + model.kappa_prime);
}

double and_chain_cost(const std::vector<std::pair<double, double>>& chain,
                      double start) {
  double cost = 0.0;
  double fraction = start;
  for (const auto& [atom_cost, selectivity] : chain) {
    cost += fraction * atom_cost;
    fraction *= selectivity;
  }
  return cost;
}

double or_chain_cost(const std::vector<std::pair<double, double>>& chain) {
  double cost = 0.0;
  OrChainState state;
  for (const auto& [atom_cost, selectivity] : chain) {
    cost += atom_cost * (1.0 - state.y);
    state.advance(selectivity);
  }
  return cost;
}

double and_weight(double cost, double selectivity) {
  if (selectivity >= 1.0) return std::numeric_limits<double>::infinity();
  return cost / (1.0 - selectivity);
}

double or_weight(double cost, double selectivity) {
  if (selectivity <= 0.0) return std::numeric_limits<double>::infinity();
  return cost / selectivity;
}

}  // namespace predplan
