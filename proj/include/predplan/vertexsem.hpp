#pragma once

#include <cstdint>
#include <vector>

#include "predplan/expr.hpp"

namespace predplan {

// Subset of {0,1}^n stored as a 2^n-bit mask. Vertex v is the n-bit integer
// whose bit i-1 holds the outcome of atom i.
class VertexSet {
 public:
  VertexSet() = default;

  static VertexSet all(int n);
  static VertexSet none(int n);

  int n() const { return n_; }
  std::uint64_t size() const { return std::uint64_t{1} << n_; }
  std::uint64_t count() const;
  bool empty() const;

  bool test(std::uint32_t v) const {
    return (words_[v >> 6] >> (v & 63)) & 1;
  }
  void set(std::uint32_t v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
  void reset(std::uint32_t v) {
    words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
  }

  VertexSet& operator&=(const VertexSet& other);
  VertexSet& operator|=(const VertexSet& other);
  VertexSet& subtract(const VertexSet& other);

  // Drop vertices whose bit for atom_id is 0.
  VertexSet& keep_atom(int atom_id);

  bool operator==(const VertexSet& other) const = default;
  bool is_subset_of(const VertexSet& other) const;
  bool intersects(const VertexSet& other) const;

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

VertexSet operator&(VertexSet a, const VertexSet& b);
VertexSet operator|(VertexSet a, const VertexSet& b);
VertexSet difference(VertexSet a, const VertexSet& b);

// All 2^n vertices. n outside [1, 20] is an error.
VertexSet all_vertices(int n);

bool eval_vertex(const PredicateTree& tree, int node_index, std::uint32_t v);

// Vertices of `set` that satisfy the subtree rooted at node_index.
VertexSet xi(const PredicateTree& tree, int node_index, const VertexSet& set);

// Vertices of `set` whose bit for atom_id is 1.
VertexSet apply_atom(int atom_id, const VertexSet& set);

// Evaluation status of every node given the set of already-applied atoms.
// A complete node is both positively and negatively determinable.
struct NodeStatus {
  bool complete = false;
  bool pos = false;
  bool neg = false;
};

// applied is indexed by atom id (size atom_count + 1).
std::vector<NodeStatus> compute_status(const PredicateTree& tree,
                                       const std::vector<std::uint8_t>& applied);

bool is_complete(const PredicateTree& tree, int node_index,
                 const std::vector<int>& applied_ids);
bool is_pos_determinable(const PredicateTree& tree, int node_index,
                         const std::vector<int>& applied_ids);
bool is_neg_determinable(const PredicateTree& tree, int node_index,
                         const std::vector<int>& applied_ids);

}  // namespace predplan
