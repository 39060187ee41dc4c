#include "predplan/planner.hpp"

#include <json.hpp>

namespace predplan {

int RecipePool::intern(char op, int a, int b, int step) {
  const auto key = std::make_tuple(op, a, b, step);
  const auto it = interned_.find(key);
  if (it != interned_.end()) return it->second;
  const int ref = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{op, a, b, step});
  interned_.emplace(key, ref);
  return ref;
}

std::string RecipePool::text(int ref) const {
  if (ref < 0 || ref >= static_cast<int>(nodes_.size())) {
    throw PlanError("recipe reference out of range");
  }
  const Node& node = nodes_[ref];
  switch (node.op) {
    case 'A':
      return "all";
    case 's':
      return "s" + std::to_string(node.step);
    case 'r':
      return "r" + std::to_string(node.step);
    default:
      return "(" + text(node.a) + std::string(1, node.op) + text(node.b) +
             ")";
  }
}

std::vector<int> lookahead_ordering(const PredicateTree& tree,
                                    const CostModel& model) {
  FractionEvaluator estimates(tree);
  Session<FractionEvaluator> session(tree, estimates, model);
  std::vector<int> ordering;
  ordering.reserve(tree.atom_count());
  for (int i = 0; i < tree.atom_count(); ++i) {
    const int atom = session.one_lookahead();
    session.apply_next(atom);
    ordering.push_back(atom);
  }
  return ordering;
}

std::string plan_to_json(const Plan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const PlanStep& step : plan.steps) {
    steps.push_back({
        {"atom", step.atom},
        {"recipe", plan.recipes ? plan.recipes->text(step.recipe) : ""},
        {"est_fraction", step.est_fraction},
        {"cost", step.cost},
    });
  }
  const nlohmann::json doc = {
      {"strategy", plan.strategy},
      {"steps", steps},
      {"total_cost", plan.total_cost},
  };
  return doc.dump(2);
}

}  // namespace predplan
