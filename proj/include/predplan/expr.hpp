#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace predplan {

enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };

std::string_view cmp_symbol(Cmp cmp);

// Complement under logical negation: !(a < 5) == (a >= 5).
Cmp negate_cmp(Cmp cmp);

using Literal = std::variant<double, std::string>;

std::string literal_to_string(const Literal& value);

struct Atom {
  int id = 0;  // 1-based, assigned left to right over normalized leaves
  std::string column;
  Cmp cmp = Cmp::Lt;
  Literal value;
  double selectivity = 0.5;  // fraction of input rows the atom keeps
  double cost_factor = 1.0;  // per-row work multiplier F

  std::string text() const;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t position);
  std::size_t position;  // byte offset into the parsed text
};

struct NormalizeError : std::runtime_error {
  explicit NormalizeError(const std::string& message);
};

// Raw parse tree. NOT nodes survive only until normalization.
struct ParseNode {
  enum class Kind { And, Or, Not, Leaf };
  Kind kind = Kind::Leaf;
  std::vector<std::unique_ptr<ParseNode>> children;
  std::string column;
  Cmp cmp = Cmp::Lt;
  Literal value;
};

using ParseNodePtr = std::unique_ptr<ParseNode>;

ParseNodePtr parse(std::string_view text);

enum class NodeKind { And, Or, Leaf };

// Normalized predicate tree: no NOT, strict AND/OR alternation, internal
// nodes have >= 2 children, child order preserved from the source text.
class PredicateTree {
 public:
  struct Node {
    NodeKind kind = NodeKind::Leaf;
    int atom = 0;       // leaf only
    int parent = -1;    // node index, -1 at the root
    int level = 0;      // root = 1
    int atom_lo = 0;    // atom ids under this node form the contiguous
    int atom_hi = 0;    // inclusive range [atom_lo, atom_hi]
    std::vector<int> children;  // node indices
  };

  const Node& root() const { return nodes_[0]; }
  const Node& node(int index) const { return nodes_[index]; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int id) const { return atoms_[id - 1]; }
  Atom& atom(int id) { return atoms_[id - 1]; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // Path of node indices from the root down to the atom's leaf, inclusive.
  const std::vector<int>& lineage(int atom_id) const {
    return lineage_[atom_id - 1];
  }
  int leaf_index(int atom_id) const { return lineage(atom_id).back(); }

  // Deepest internal level; 1 for a tree that is a single leaf.
  int depth() const { return depth_; }

  std::string text() const;

  friend PredicateTree normalize(const ParseNode& root);

 private:
  std::vector<Node> nodes_;  // nodes_[0] is the root
  std::vector<Atom> atoms_;
  std::vector<std::vector<int>> lineage_;
  int depth_ = 1;
};

PredicateTree normalize(const ParseNode& root);

// parse + normalize in one step.
PredicateTree compile(std::string_view text);

}  // namespace predplan
