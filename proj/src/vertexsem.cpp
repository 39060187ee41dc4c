#include "predplan/vertexsem.hpp"

#include <bit>
#include <stdexcept>

namespace predplan {

namespace {

constexpr int kMaxAtoms = 20;

std::size_t word_count(int n) {
  return n >= 6 ? (std::size_t{1} << (n - 6)) : 1;
}

// Bits of one storage word where atom bit `bit` is 1. For bit < 6 the
// pattern repeats inside every word; otherwise whole words alternate.
std::uint64_t atom_mask_word(int bit, std::size_t word_index) {
  static constexpr std::uint64_t kInWord[6] = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
  };
  if (bit < 6) return kInWord[bit];
  return ((word_index >> (bit - 6)) & 1) ? ~std::uint64_t{0} : 0;
}

// Mask off the unused high bits of the single word used when n < 6.
std::uint64_t tail_mask(int n) {
  if (n >= 6) return ~std::uint64_t{0};
  return (std::uint64_t{1} << (std::uint64_t{1} << n)) - 1;
}

}  // namespace

VertexSet VertexSet::all(int n) {
  VertexSet set = none(n);
  for (auto& word : set.words_) word = ~std::uint64_t{0};
  set.words_.back() &= tail_mask(n);
  return set;
}

VertexSet VertexSet::none(int n) {
  if (n < 1 || n > kMaxAtoms) {
    throw std::invalid_argument("vertex dimension must be in [1, 20]");
  }
  VertexSet set;
  set.n_ = n;
  set.words_.assign(word_count(n), 0);
  return set;
}

std::uint64_t VertexSet::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t word : words_) total += std::popcount(word);
  return total;
}

bool VertexSet::empty() const {
  for (std::uint64_t word : words_) {
    if (word != 0) return false;
  }
  return true;
}

VertexSet& VertexSet::operator&=(const VertexSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

VertexSet& VertexSet::operator|=(const VertexSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

VertexSet& VertexSet::subtract(const VertexSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

bool VertexSet::is_subset_of(const VertexSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

bool VertexSet::intersects(const VertexSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & other.words_[i]) return true;
  }
  return false;
}

VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
VertexSet difference(VertexSet a, const VertexSet& b) { return a.subtract(b); }

VertexSet all_vertices(int n) { return VertexSet::all(n); }

bool eval_vertex(const PredicateTree& tree, int node_index, std::uint32_t v) {
  const auto& node = tree.node(node_index);
  switch (node.kind) {
    case NodeKind::Leaf:
      return (v >> (node.atom - 1)) & 1;
    case NodeKind::And:
      for (int child : node.children) {
        if (!eval_vertex(tree, child, v)) return false;
      }
      return true;
    case NodeKind::Or:
      for (int child : node.children) {
        if (eval_vertex(tree, child, v)) return true;
      }
      return false;
  }
  return false;
}

VertexSet xi(const PredicateTree& tree, int node_index, const VertexSet& set) {
  const auto& node = tree.node(node_index);
  if (node.kind == NodeKind::Leaf) return apply_atom(node.atom, set);
  VertexSet result = xi(tree, node.children[0], set);
  for (std::size_t i = 1; i < node.children.size(); ++i) {
    if (node.kind == NodeKind::And) {
      result &= xi(tree, node.children[i], set);
    } else {
      result |= xi(tree, node.children[i], set);
    }
  }
  return result;
}

VertexSet& VertexSet::keep_atom(int atom_id) {
  const int bit = atom_id - 1;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    words_[w] &= atom_mask_word(bit, w);
  }
  return *this;
}

VertexSet apply_atom(int atom_id, const VertexSet& set) {
  VertexSet result = set;
  result.keep_atom(atom_id);
  return result;
}

std::vector<NodeStatus> compute_status(
    const PredicateTree& tree, const std::vector<std::uint8_t>& applied) {
  std::vector<NodeStatus> status(tree.node_count());
  // Children precede their parent in no particular order, so walk leaves-up
  // by iterating node indices backwards: children are always created after
  // their parent by the builder, making a reverse pass bottom-up.
  for (int index = tree.node_count() - 1; index >= 0; --index) {
    const auto& node = tree.node(index);
    auto& out = status[index];
    if (node.kind == NodeKind::Leaf) {
      const bool done = applied[node.atom] != 0;
      out = NodeStatus{done, done, done};
      continue;
    }
    bool all_complete = true;
    bool all_pos = true, any_pos = false;
    bool all_neg = true, any_neg = false;
    for (int child : node.children) {
      const auto& cs = status[child];
      all_complete = all_complete && cs.complete;
      all_pos = all_pos && cs.pos;
      any_pos = any_pos || cs.pos;
      all_neg = all_neg && cs.neg;
      any_neg = any_neg || cs.neg;
    }
    out.complete = all_complete;
    if (node.kind == NodeKind::And) {
      out.pos = all_pos;
      out.neg = any_neg;
    } else {
      out.pos = any_pos;
      out.neg = all_neg;
    }
  }
  return status;
}

namespace {

std::vector<std::uint8_t> applied_flags(const PredicateTree& tree,
                                        const std::vector<int>& applied_ids) {
  std::vector<std::uint8_t> flags(tree.atom_count() + 1, 0);
  for (int id : applied_ids) flags[id] = 1;
  return flags;
}

}  // namespace

bool is_complete(const PredicateTree& tree, int node_index,
                 const std::vector<int>& applied_ids) {
  return compute_status(tree, applied_flags(tree, applied_ids))[node_index]
      .complete;
}

bool is_pos_determinable(const PredicateTree& tree, int node_index,
                         const std::vector<int>& applied_ids) {
  return compute_status(tree, applied_flags(tree, applied_ids))[node_index].pos;
}

bool is_neg_determinable(const PredicateTree& tree, int node_index,
                         const std::vector<int>& applied_ids) {
  return compute_status(tree, applied_flags(tree, applied_ids))[node_index].neg;
}

}  // namespace predplan
