#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "predplan/costmodel.hpp"
#include "predplan/evaluator.hpp"
#include "predplan/expr.hpp"
#include "predplan/orderp.hpp"
#include "predplan/vertexsem.hpp"

namespace predplan {

struct PlanError : std::runtime_error {
  explicit PlanError(const std::string& message)
      : std::runtime_error(message) {}
};

// Set-algebra expressions over step inputs (s<k>), step results (r<k>), and
// the ground set, hash-consed so shared subexpressions are stored once.
// A plan replayed from its recipes reconstructs every input without
// re-planning.
class RecipePool {
 public:
  int all() { return intern('A', -1, -1, 0); }
  int step_input(int step) { return intern('s', -1, -1, step); }
  int step_result(int step) { return intern('r', -1, -1, step); }
  int intersect(int a, int b) { return intern('&', a, b, 0); }
  int unite(int a, int b) { return intern('|', a, b, 0); }
  int subtract(int a, int b) { return intern('\\', a, b, 0); }

  std::string text(int ref) const;

  // Rebuilds the set a recipe denotes. inputs/results hold the sets of
  // steps 1..k already replayed; referencing a later step is an error.
  template <typename S>
  S replay(int ref, const std::vector<S>& inputs,
           const std::vector<S>& results, const S& ground) const {
    std::vector<std::optional<S>> memo(nodes_.size());
    auto rec = [&](auto&& self, int r) -> const S& {
      if (r < 0 || r >= static_cast<int>(nodes_.size())) {
        throw PlanError("recipe reference out of range");
      }
      if (!memo[r]) {
        const Node& node = nodes_[r];
        switch (node.op) {
          case 'A':
            memo[r] = ground;
            break;
          case 's':
            if (node.step < 1 ||
                node.step > static_cast<int>(inputs.size())) {
              throw PlanError("recipe refers to step input " +
                              std::to_string(node.step) +
                              " before it exists");
            }
            memo[r] = inputs[node.step - 1];
            break;
          case 'r':
            if (node.step < 1 ||
                node.step > static_cast<int>(results.size())) {
              throw PlanError("recipe refers to step result " +
                              std::to_string(node.step) +
                              " before it exists");
            }
            memo[r] = results[node.step - 1];
            break;
          case '&':
            memo[r] = set_and(self(self, node.a), self(self, node.b));
            break;
          case '|':
            memo[r] = set_or(self(self, node.a), self(self, node.b));
            break;
          case '\\':
            memo[r] = set_diff(self(self, node.a), self(self, node.b));
            break;
          default:
            throw PlanError("corrupt recipe node");
        }
      }
      return *memo[r];
    };
    return rec(rec, ref);
  }

 private:
  struct Node {
    char op;
    int a;
    int b;
    int step;
  };

  int intern(char op, int a, int b, int step);

  std::vector<Node> nodes_;
  std::map<std::tuple<char, int, int, int>, int> interned_;
};

struct PlanStep {
  int atom = 0;
  double est_fraction = 0.0;  // input measure / ground measure
  double cost = 0.0;
  int recipe = -1;  // input-set recipe in the plan's pool
};

struct Plan {
  std::string strategy;  // shallowfish | deepfish | noforopt | oracle
  std::vector<PlanStep> steps;
  double total_cost = 0.0;
  int result_recipe = -1;
  std::shared_ptr<RecipePool> recipes;
};

// One planning run: owns the knowledge maps and the step log. Generic over
// the evaluator backend; the evaluator and tree must outlive the session.
template <typename E>
class Session {
 public:
  using Set = typename E::Set;

  struct Entry {
    Set set;
    int recipe = -1;
  };

  Session(const PredicateTree& tree, const E& evaluator,
          const CostModel& model)
      : tree_(&tree),
        eval_(&evaluator),
        model_(model),
        pool_(std::make_shared<RecipePool>()),
        ground_(evaluator.ground()),
        xi_(tree.node_count()),
        dplus_(tree.node_count()),
        dminus_(tree.node_count()),
        applied_(tree.atom_count() + 1, 0) {
    total_ = eval_->measure(ground_);
    status_ = compute_status(*tree_, applied_);
  }

  const PredicateTree& tree() const { return *tree_; }
  const CostModel& model() const { return model_; }
  const std::shared_ptr<RecipePool>& pool() const { return pool_; }
  const Set& ground() const { return ground_; }
  double ground_measure() const { return total_; }
  double measure(const Set& set) const { return eval_->measure(set); }

  const std::vector<PlanStep>& steps() const { return steps_; }
  const std::vector<NodeStatus>& status() const { return status_; }
  bool applied(int atom_id) const { return applied_[atom_id] != 0; }
  int applied_count() const { return static_cast<int>(steps_.size()); }

  const std::optional<Entry>& xi_entry(int node_index) const {
    return xi_[node_index];
  }
  const std::optional<Entry>& dplus_entry(int node_index) const {
    return dplus_[node_index];
  }
  const std::optional<Entry>& dminus_entry(int node_index) const {
    return dminus_[node_index];
  }

  // Minimal input set for the atom using knowledge from lineage levels
  // 1..level; level 0 is the ground set, |lineage|-1 full knowledge.
  Entry best_d(int atom_id, int level) const {
    const auto& lineage = tree_->lineage(atom_id);
    if (level < 0 || level >= static_cast<int>(lineage.size())) {
      throw PlanError("best_d level " + std::to_string(level) +
                      " out of range for atom " + std::to_string(atom_id));
    }
    return best_rec(lineage, level);
  }

  // Applies the atom over its minimal input, records the step, and updates
  // the knowledge maps along the atom's lineage.
  void apply_next(int atom_id) {
    if (atom_id < 1 || atom_id > tree_->atom_count()) {
      throw PlanError("atom id " + std::to_string(atom_id) + " out of range");
    }
    if (applied_[atom_id]) {
      throw PlanError("atom " + std::to_string(atom_id) + " applied twice");
    }
    const auto& lineage = tree_->lineage(atom_id);
    const int levels = static_cast<int>(lineage.size());

    Entry input = best_rec(lineage, levels - 1);
    // Clip values for ancestor refreshes are defined against the state
    // before this application.
    std::vector<Entry> clips;
    clips.reserve(levels - 1);
    for (int l = 1; l <= levels - 1; ++l) {
      clips.push_back(best_rec(lineage, l - 1));
    }

    const int step_id = static_cast<int>(steps_.size()) + 1;
    Set result = eval_->apply(atom_id, input.set);
    const double in_measure = eval_->measure(input.set);
    steps_.push_back(PlanStep{
        atom_id,
        total_ > 0 ? in_measure / total_ : 0.0,
        step_cost(model_, tree_->atom(atom_id), in_measure, total_),
        input.recipe,
    });

    const int leaf = lineage.back();
    const int result_ref = pool_->step_result(step_id);
    store_xi(leaf, Entry{result, result_ref});
    dplus_[leaf] = Entry{result, result_ref};
    dminus_[leaf] = Entry{set_diff(input.set, result),
                          pool_->subtract(pool_->step_input(step_id),
                                          result_ref)};

    applied_[atom_id] = 1;
    status_ = compute_status(*tree_, applied_);

    for (int l = levels - 1; l >= 1; --l) {
      update_node(lineage[l - 1], clips[l - 1]);
    }
  }

  // Sum of minimal-input application costs over unapplied atoms in the
  // subtree rooted at node_index.
  double remain_cost(int node_index = 0) const {
    const auto& scope = tree_->node(node_index);
    double total = 0.0;
    for (int atom = scope.atom_lo; atom <= scope.atom_hi; ++atom) {
      if (applied_[atom]) continue;
      const int levels = static_cast<int>(tree_->lineage(atom).size());
      const Entry input = best_d(atom, levels - 1);
      total += step_cost(model_, tree_->atom(atom),
                         eval_->measure(input.set), total_);
    }
    return total;
  }

  // Candidate with the best ratio of remaining-cost reduction to
  // application cost; falls back to the cheapest application when no
  // candidate has a positive ratio.
  int one_lookahead() {
    const double original = remain_cost();
    int best_atom = 0;
    double best_ratio = 0.0;
    int cheapest_atom = 0;
    double cheapest_cost = std::numeric_limits<double>::infinity();
    for (int atom = 1; atom <= tree_->atom_count(); ++atom) {
      if (applied_[atom]) continue;
      auto undo = begin_trial(atom);
      apply_next(atom);
      const double application_cost = steps_.back().cost;
      const double after = remain_cost();
      end_trial(std::move(undo));
      const double benefit = original - after;
      double ratio;
      if (application_cost <= 0.0) {
        ratio = benefit > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      } else {
        ratio = benefit / application_cost;
      }
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_atom = atom;
      }
      if (application_cost < cheapest_cost) {
        cheapest_cost = application_cost;
        cheapest_atom = atom;
      }
    }
    return best_atom != 0 ? best_atom : cheapest_atom;
  }

  // Trial state shared by lookahead and ordering search: captures exactly
  // what apply_next(atom_id) mutates.
  struct Trial {
    int atom_id = 0;
    std::size_t step_count = 0;
    std::vector<std::optional<Entry>> xi, dplus, dminus;  // lineage order
    std::vector<NodeStatus> status;
  };

  Trial begin_trial(int atom_id) const {
    Trial trial;
    trial.atom_id = atom_id;
    trial.step_count = steps_.size();
    trial.status = status_;
    const auto& lineage = tree_->lineage(atom_id);
    trial.xi.reserve(lineage.size());
    trial.dplus.reserve(lineage.size());
    trial.dminus.reserve(lineage.size());
    for (int node : lineage) {
      trial.xi.push_back(xi_[node]);
      trial.dplus.push_back(dplus_[node]);
      trial.dminus.push_back(dminus_[node]);
    }
    return trial;
  }

  void end_trial(Trial&& trial) {
    steps_.resize(trial.step_count);
    applied_[trial.atom_id] = 0;
    status_ = std::move(trial.status);
    const auto& lineage = tree_->lineage(trial.atom_id);
    for (std::size_t i = 0; i < lineage.size(); ++i) {
      xi_[lineage[i]] = std::move(trial.xi[i]);
      dplus_[lineage[i]] = std::move(trial.dplus[i]);
      dminus_[lineage[i]] = std::move(trial.dminus[i]);
    }
  }

  Plan finalize(std::string strategy) const {
    Plan plan;
    plan.strategy = std::move(strategy);
    plan.steps = steps_;
    for (const PlanStep& step : steps_) plan.total_cost += step.cost;
    plan.recipes = pool_;
    if (xi_[0]) plan.result_recipe = xi_[0]->recipe;
    return plan;
  }

  const Set& result() const {
    if (!xi_[0]) throw PlanError("plan incomplete: root result not set");
    return xi_[0]->set;
  }

 private:
  const Entry& require(const std::vector<std::optional<Entry>>& map,
                       int node_index, const char* what) const {
    const auto& entry = map[node_index];
    if (!entry) {
      throw PlanError(std::string("inconsistent state: ") + what +
                      " for node " + std::to_string(node_index));
    }
    return *entry;
  }

  void store_xi(int node_index, Entry entry) {
    if (xi_[node_index]) {
      throw PlanError("result set written twice for node " +
                      std::to_string(node_index));
    }
    xi_[node_index] = std::move(entry);
  }

  Entry best_rec(const std::vector<int>& lineage, int level) const {
    if (level == 0) return Entry{ground_, pool_->all()};
    const int node_index = lineage[level - 1];
    const int path_child = lineage[level];
    const auto& node = tree_->node(node_index);
    Entry acc = best_rec(lineage, level - 1);
    if (node.kind == NodeKind::And) {
      for (int child : node.children) {
        const auto& st = status_[child];
        if (st.complete) {
          const Entry& entry =
              require(xi_, child, "complete node lacks its result set");
          acc.set &= entry.set;
          acc.recipe = pool_->intersect(acc.recipe, entry.recipe);
        } else if (st.neg && child != path_child) {
          const Entry& entry = require(
              dminus_, child, "determinable node lacks its bypass set");
          acc.set.subtract(entry.set);
          acc.recipe = pool_->subtract(acc.recipe, entry.recipe);
        }
      }
      return acc;
    }
    // OR ancestor: records already known to pass a sibling are skipped.
    std::optional<Entry> known;
    auto merge = [&](const Entry& entry) {
      if (!known) {
        known = entry;
      } else {
        known->set |= entry.set;
        known->recipe = pool_->unite(known->recipe, entry.recipe);
      }
    };
    for (int child : node.children) {
      const auto& st = status_[child];
      if (st.complete) {
        merge(require(xi_, child, "complete node lacks its result set"));
      } else if (st.pos && child != path_child) {
        merge(require(dplus_, child,
                      "determinable node lacks its guarantee set"));
      }
    }
    if (known) {
      acc.set.subtract(known->set);
      acc.recipe = pool_->subtract(acc.recipe, known->recipe);
    }
    return acc;
  }

  void update_node(int node_index, const Entry& clip) {
    const auto& node = tree_->node(node_index);
    const auto& st = status_[node_index];
    const bool is_and = node.kind == NodeKind::And;

    if (st.complete) {
      if (xi_[node_index]) return;  // result sets are immutable
      std::optional<Entry> base;
      for (int child : node.children) {
        const Entry& entry =
            require(xi_, child, "complete child lacks its result set");
        if (!base) {
          base = entry;
        } else if (is_and) {
          base->set &= entry.set;
          base->recipe = pool_->intersect(base->recipe, entry.recipe);
        } else {
          base->set |= entry.set;
          base->recipe = pool_->unite(base->recipe, entry.recipe);
        }
      }
      Entry xi_entry{set_and(base->set, clip.set),
                     pool_->intersect(base->recipe, clip.recipe)};
      dplus_[node_index] = xi_entry;
      dminus_[node_index] = Entry{set_diff(clip.set, xi_entry.set),
                                  pool_->subtract(clip.recipe,
                                                  xi_entry.recipe)};
      store_xi(node_index, std::move(xi_entry));
      return;
    }

    if (st.pos) {
      std::optional<Entry> fold;
      for (int child : node.children) {
        if (!is_and && !status_[child].pos) continue;
        const Entry& entry = require(
            dplus_, child, "determinable child lacks its guarantee set");
        if (!fold) {
          fold = entry;
        } else if (is_and) {
          fold->set &= entry.set;
          fold->recipe = pool_->intersect(fold->recipe, entry.recipe);
        } else {
          fold->set |= entry.set;
          fold->recipe = pool_->unite(fold->recipe, entry.recipe);
        }
      }
      dplus_[node_index] = Entry{set_and(fold->set, clip.set),
                                 pool_->intersect(fold->recipe, clip.recipe)};
    }
    if (st.neg) {
      std::optional<Entry> fold;
      for (int child : node.children) {
        if (is_and && !status_[child].neg) continue;
        const Entry& entry = require(
            dminus_, child, "determinable child lacks its bypass set");
        if (!fold) {
          fold = entry;
        } else if (is_and) {
          fold->set |= entry.set;
          fold->recipe = pool_->unite(fold->recipe, entry.recipe);
        } else {
          fold->set &= entry.set;
          fold->recipe = pool_->intersect(fold->recipe, entry.recipe);
        }
      }
      dminus_[node_index] = Entry{set_and(fold->set, clip.set),
                                  pool_->intersect(fold->recipe, clip.recipe)};
    }
  }

  const PredicateTree* tree_;
  const E* eval_;
  CostModel model_;
  std::shared_ptr<RecipePool> pool_;
  Set ground_;
  double total_ = 0.0;
  std::vector<std::optional<Entry>> xi_, dplus_, dminus_;
  std::vector<std::uint8_t> applied_;
  std::vector<NodeStatus> status_;
  std::vector<PlanStep> steps_;
};

// Applies the ordering, which must be a permutation of all atom ids, to a
// fresh session.
template <typename E>
Plan execute_ordering(Session<E>& session, const std::vector<int>& ordering,
                      std::string strategy) {
  if (session.applied_count() != 0) {
    throw PlanError("execute_ordering requires a fresh session");
  }
  const int n = session.tree().atom_count();
  if (static_cast<int>(ordering.size()) != n) {
    throw PlanError("ordering is not a permutation: wrong length");
  }
  std::vector<std::uint8_t> seen(n + 1, 0);
  for (int atom : ordering) {
    if (atom < 1 || atom > n || seen[atom]) {
      throw PlanError("ordering is not a permutation of the atom ids");
    }
    seen[atom] = 1;
  }
  for (int atom : ordering) session.apply_next(atom);
  return session.finalize(std::move(strategy));
}

template <typename E>
Plan shallow_fish(const PredicateTree& tree, const E& evaluator,
                  const CostModel& model) {
  Session<E> session(tree, evaluator, model);
  return execute_ordering(session, order_p(tree), "shallowfish");
}

// Single-traversal execution of the order_p ordering: AND threads the
// shrinking set through its children, OR passes each child the records no
// earlier sibling has already accepted. Produces the same steps as
// shallow_fish.
template <typename E>
Plan shallowfish_opt(const PredicateTree& tree, const E& evaluator,
                     const CostModel& model) {
  const std::vector<int> ordering = order_p(tree);
  std::vector<int> position(tree.atom_count() + 1, 0);
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    position[ordering[i]] = static_cast<int>(i);
  }

  using Set = typename E::Set;
  struct Labeled {
    Set set;
    int recipe;
  };

  Plan plan;
  plan.strategy = "shallowfish";
  plan.recipes = std::make_shared<RecipePool>();
  RecipePool& pool = *plan.recipes;
  const Set ground = evaluator.ground();
  const double total = evaluator.measure(ground);

  auto first_position = [&](auto&& self, int node_index) -> int {
    const auto& node = tree.node(node_index);
    if (node.kind == NodeKind::Leaf) return position[node.atom];
    int lowest = std::numeric_limits<int>::max();
    for (int child : node.children) {
      lowest = std::min(lowest, self(self, child));
    }
    return lowest;
  };

  auto process = [&](auto&& self, int node_index,
                     const Labeled& input) -> Labeled {
    const auto& node = tree.node(node_index);
    if (node.kind == NodeKind::Leaf) {
      const int step_id = static_cast<int>(plan.steps.size()) + 1;
      Set result = evaluator.apply(node.atom, input.set);
      const double in_measure = evaluator.measure(input.set);
      plan.steps.push_back(PlanStep{
          node.atom,
          total > 0 ? in_measure / total : 0.0,
          step_cost(model, tree.atom(node.atom), in_measure, total),
          input.recipe,
      });
      return Labeled{std::move(result), pool.step_result(step_id)};
    }
    std::vector<int> order = node.children;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return first_position(first_position, a) <
             first_position(first_position, b);
    });
    if (node.kind == NodeKind::And) {
      Labeled current = input;
      for (int child : order) {
        current = self(self, child, current);
      }
      return current;
    }
    std::optional<Labeled> accepted;
    for (int child : order) {
      Labeled child_input =
          accepted ? Labeled{set_diff(input.set, accepted->set),
                             pool.subtract(input.recipe, accepted->recipe)}
                   : input;
      Labeled result = self(self, child, child_input);
      if (!accepted) {
        accepted = std::move(result);
      } else {
        accepted->set |= result.set;
        accepted->recipe = pool.unite(accepted->recipe, result.recipe);
      }
    }
    return *accepted;
  };

  Labeled result = process(process, 0, Labeled{ground, pool.all()});
  for (const PlanStep& step : plan.steps) plan.total_cost += step.cost;
  plan.result_recipe = result.recipe;
  return plan;
}

// Re-derives every step input and result from the plan's recipes and
// returns the final result set. Only the recorded recipes drive the work,
// so a replayed plan touches exactly the sets the original run produced.
template <typename E>
typename E::Set replay_result(const Plan& plan, const E& evaluator) {
  using Set = typename E::Set;
  if (!plan.recipes || plan.result_recipe < 0) {
    throw PlanError("plan has no result recipe");
  }
  std::vector<Set> inputs;
  std::vector<Set> results;
  const Set ground = evaluator.ground();
  for (const PlanStep& step : plan.steps) {
    Set input = plan.recipes->replay(step.recipe, inputs, results, ground);
    results.push_back(evaluator.apply(step.atom, input));
    inputs.push_back(std::move(input));
  }
  return plan.recipes->replay(plan.result_recipe, inputs, results, ground);
}

// Greedy lookahead ordering under the independence model.
std::vector<int> lookahead_ordering(const PredicateTree& tree,
                                    const CostModel& model);

// Builds both the lookahead and the shallowfish plan under the fraction
// evaluator, then executes the cheaper ordering once on the given backend.
// Ties go to shallowfish.
template <typename E>
Plan deep_fish(const PredicateTree& tree, const E& evaluator,
               const CostModel& model) {
  FractionEvaluator estimates(tree);

  const std::vector<int> look = lookahead_ordering(tree, model);
  Session<FractionEvaluator> look_session(tree, estimates, model);
  const double look_cost =
      execute_ordering(look_session, look, "deepfish").total_cost;

  const std::vector<int> shallow = order_p(tree);
  Session<FractionEvaluator> shallow_session(tree, estimates, model);
  const double shallow_cost =
      execute_ordering(shallow_session, shallow, "shallowfish").total_cost;

  const std::vector<int>& winner = look_cost < shallow_cost ? look : shallow;
  Session<E> session(tree, evaluator, model);
  return execute_ordering(session, winner, "deepfish");
}

// NoOrOpt baseline: AND children run in increasing-selectivity order over
// the shrinking set; every OR child is evaluated over its parent's full
// input with no bypass between siblings.
template <typename E>
Plan execute_no_or_opt(const PredicateTree& tree, const E& evaluator,
                       const CostModel& model) {
  using Set = typename E::Set;
  struct Labeled {
    Set set;
    int recipe;
  };

  Plan plan;
  plan.strategy = "noforopt";
  plan.recipes = std::make_shared<RecipePool>();
  RecipePool& pool = *plan.recipes;
  const Set ground = evaluator.ground();
  const double total = evaluator.measure(ground);

  auto walk = [&](auto&& self, int node_index,
                  const Labeled& input) -> Labeled {
    const auto& node = tree.node(node_index);
    if (node.kind == NodeKind::Leaf) {
      const int step_id = static_cast<int>(plan.steps.size()) + 1;
      Set result = evaluator.apply(node.atom, input.set);
      const double in_measure = evaluator.measure(input.set);
      plan.steps.push_back(PlanStep{
          node.atom,
          total > 0 ? in_measure / total : 0.0,
          step_cost(model, tree.atom(node.atom), in_measure, total),
          input.recipe,
      });
      return Labeled{std::move(result), pool.step_result(step_id)};
    }
    if (node.kind == NodeKind::And) {
      Labeled current = input;
      for (int child : no_or_opt_child_order(tree, node_index)) {
        current = self(self, child, current);
      }
      return current;
    }
    std::optional<Labeled> merged;
    for (int child : node.children) {
      Labeled result = self(self, child, input);
      if (!merged) {
        merged = std::move(result);
      } else {
        merged->set |= result.set;
        merged->recipe = pool.unite(merged->recipe, result.recipe);
      }
    }
    return *merged;
  };

  Labeled result = walk(walk, 0, Labeled{ground, pool.all()});
  for (const PlanStep& step : plan.steps) plan.total_cost += step.cost;
  plan.result_recipe = result.recipe;
  return plan;
}

std::string plan_to_json(const Plan& plan);

}  // namespace predplan
