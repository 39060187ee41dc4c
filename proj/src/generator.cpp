#include "predplan/generator.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace predplan {
namespace {

struct Shape {
  bool leaf = false;
  std::vector<Shape> children;
};

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Child 0 stays internal until the requested depth is reached, so the
// produced depth always equals config.depth. Other children turn leaf
// with leaf_probability, and always at the depth cap.
Shape build_shape(std::mt19937_64& rng, const GenConfig& config, int level) {
  Shape node;
  const int n_children =
      uniform_int(rng, config.children_range.first, config.children_range.second);
  node.children.resize(static_cast<std::size_t>(n_children));
  for (int j = 0; j < n_children; ++j) {
    const bool can_go_deeper = level + 1 <= config.depth;
    bool internal;
    if (j == 0 && level < config.depth) {
      internal = true;
    } else if (!can_go_deeper) {
      internal = false;
    } else {
      internal = uniform01(rng) >= config.leaf_probability;
    }
    if (internal) {
      node.children[static_cast<std::size_t>(j)] =
          build_shape(rng, config, level + 1);
    } else {
      node.children[static_cast<std::size_t>(j)].leaf = true;
    }
  }
  return node;
}

int count_leaves(const Shape& node) {
  if (node.leaf) return 1;
  int total = 0;
  for (const Shape& child : node.children) total += count_leaves(child);
  return total;
}

ParseNodePtr shape_to_parse(const Shape& node, ParseNode::Kind kind,
                            const std::vector<double>& gammas, int& next_leaf) {
  auto parsed = std::make_unique<ParseNode>();
  if (node.leaf) {
    parsed->kind = ParseNode::Kind::Leaf;
    parsed->column = "c" + std::to_string(next_leaf + 1);
    parsed->cmp = Cmp::Lt;
    parsed->value = gammas[static_cast<std::size_t>(next_leaf)];
    ++next_leaf;
    return parsed;
  }
  parsed->kind = kind;
  const ParseNode::Kind child_kind = kind == ParseNode::Kind::And
                                         ? ParseNode::Kind::Or
                                         : ParseNode::Kind::And;
  for (const Shape& child : node.children) {
    parsed->children.push_back(
        shape_to_parse(child, child_kind, gammas, next_leaf));
  }
  return parsed;
}

// Factorial block size per atom: the smallest m with gamma * m integral
// over the 0.1 grid. Selectivities off the grid get no exact block.
std::uint64_t outcome_base(double gamma) {
  const double scaled = gamma * 10.0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-9) return 0;
  const int tenths = static_cast<int>(rounded);
  if (tenths == 5) return 2;
  if (tenths % 2 == 0) return 5;
  return 10;
}

}  // namespace

Instance gen_instance(const GenConfig& config, std::size_t rows) {
  if (config.depth < 2 || config.depth > 4) {
    throw std::invalid_argument("gen_instance: depth must be 2, 3, or 4");
  }
  if (config.children_range.first < 2 || config.children_range.second > 5 ||
      config.children_range.first > config.children_range.second) {
    throw std::invalid_argument(
        "gen_instance: children_range must lie within [2, 5]");
  }
  if (!(config.leaf_probability >= 0.0 && config.leaf_probability <= 1.0)) {
    throw std::invalid_argument(
        "gen_instance: leaf_probability must lie in [0, 1]");
  }
  if (config.selectivity_choices.empty()) {
    throw std::invalid_argument("gen_instance: selectivity_choices is empty");
  }
  for (double gamma : config.selectivity_choices) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
      throw std::invalid_argument(
          "gen_instance: selectivities must lie in (0, 1)");
    }
  }
  if (config.n_max < 2) {
    throw std::invalid_argument("gen_instance: n_max must be at least 2");
  }
  if (rows == 0) {
    throw std::invalid_argument("gen_instance: rows must be positive");
  }

  std::mt19937_64 rng(config.rng_seed);

  Shape shape;
  int n_atoms = 0;
  bool found = false;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    shape = build_shape(rng, config, 1);
    n_atoms = count_leaves(shape);
    if (n_atoms <= config.n_max) {
      found = true;
      break;
    }
  }
  if (!found) {
    throw std::invalid_argument(
        "gen_instance: n_max too small for the requested shape profile");
  }

  std::vector<double> gammas(static_cast<std::size_t>(n_atoms));
  std::vector<double> factors(static_cast<std::size_t>(n_atoms), 1.0);
  for (int i = 0; i < n_atoms; ++i) {
    const int pick =
        uniform_int(rng, 0, static_cast<int>(config.selectivity_choices.size()) - 1);
    gammas[static_cast<std::size_t>(i)] =
        config.selectivity_choices[static_cast<std::size_t>(pick)];
    if (config.cost_mode == GenConfig::CostMode::Varying) {
      factors[static_cast<std::size_t>(i)] =
          static_cast<double>(uniform_int(rng, 1, 10));
    }
  }

  const ParseNode::Kind root_kind =
      rng() % 2 == 0 ? ParseNode::Kind::And : ParseNode::Kind::Or;
  int next_leaf = 0;
  const ParseNodePtr parsed = shape_to_parse(shape, root_kind, gammas, next_leaf);

  Instance out;
  out.tree = normalize(*parsed);
  for (int id = 1; id <= n_atoms; ++id) {
    out.tree.atom(id).selectivity = gammas[static_cast<std::size_t>(id - 1)];
    out.tree.atom(id).cost_factor = factors[static_cast<std::size_t>(id - 1)];
  }

  // One full factorial block enumerates every joint outcome; replicating
  // whole blocks makes each joint frequency exactly the product of the
  // marginals. Blocks that exceed the row budget fall back to iid rows.
  std::vector<std::uint64_t> bases(static_cast<std::size_t>(n_atoms));
  std::uint64_t pattern_count = 1;
  bool exact = true;
  for (int i = 0; i < n_atoms && exact; ++i) {
    const std::uint64_t base = outcome_base(gammas[static_cast<std::size_t>(i)]);
    if (base == 0 || pattern_count > rows / base) {
      exact = false;
      break;
    }
    bases[static_cast<std::size_t>(i)] = base;
    pattern_count *= base;
  }

  std::size_t n_rows = rows;
  if (exact) {
    n_rows = static_cast<std::size_t>(pattern_count) * (rows / pattern_count);
    out.exact_joint = true;
    out.pattern_count = pattern_count;
  }

  out.table.names.reserve(static_cast<std::size_t>(n_atoms));
  out.table.columns.reserve(static_cast<std::size_t>(n_atoms));
  for (int i = 0; i < n_atoms; ++i) {
    out.table.names.push_back("c" + std::to_string(i + 1));
    out.table.columns.emplace_back(RealColumn(n_rows));
  }
  out.table.row_count = n_rows;

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::uint64_t pattern = exact ? r % pattern_count : 0;
    for (int i = 0; i < n_atoms; ++i) {
      const double gamma = gammas[static_cast<std::size_t>(i)];
      double value;
      if (exact) {
        const std::uint64_t base = bases[static_cast<std::size_t>(i)];
        const std::uint64_t digit = pattern % base;
        pattern /= base;
        const auto target = static_cast<std::uint64_t>(
            std::llround(gamma * static_cast<double>(base)));
        const bool pass = digit < target;
        value = pass ? gamma * uniform01(rng)
                     : gamma + (1.0 - gamma) * uniform01(rng);
      } else {
        value = uniform01(rng);
      }
      std::get<RealColumn>(out.table.columns[static_cast<std::size_t>(i)])[r] =
          value;
    }
  }

  return out;
}

}  // namespace predplan
