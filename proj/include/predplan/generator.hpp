#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "predplan/engine.hpp"
#include "predplan/expr.hpp"

namespace predplan {

struct GenConfig {
  enum class CostMode { Uniform, Varying };

  int depth = 2;  // requested deepest internal level, in {2, 3, 4}
  std::pair<int, int> children_range{2, 5};
  double leaf_probability = 0.5;
  int n_max = 16;
  std::vector<double> selectivity_choices = {0.1, 0.2, 0.3, 0.4, 0.5,
                                             0.6, 0.7, 0.8, 0.9};
  CostMode cost_mode = CostMode::Uniform;
  std::uint64_t rng_seed = 0;
};

struct Instance {
  PredicateTree tree;
  Table table;
  // When the atoms' outcome grid fits the row budget, rows replicate a full
  // factorial block so every joint outcome frequency is exactly the product
  // of the marginals; row_count is then a multiple of pattern_count.
  bool exact_joint = false;
  std::uint64_t pattern_count = 0;
};

// Deterministic under rng_seed. The produced tree has depth equal to the
// requested depth and between 2 and n_max atoms; each atom's true
// selectivity matches its assigned value exactly in factorial mode and
// within sampling error otherwise.
Instance gen_instance(const GenConfig& config, std::size_t rows);

}  // namespace predplan
