#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "predplan/engine.hpp"
#include "predplan/expr.hpp"
#include "predplan/vertexsem.hpp"

namespace predplan {

// Set-algebra helpers shared by VertexSet and Bitmap.
template <typename S>
S set_and(S a, const S& b) {
  a &= b;
  return a;
}

template <typename S>
S set_or(S a, const S& b) {
  a |= b;
  return a;
}

template <typename S>
S set_diff(S a, const S& b) {
  a.subtract(b);
  return a;
}

// Evaluator backends share one shape: a Set type with &=, |= and subtract,
// a ground() universe, a measure() that prices sets for the cost model, and
// apply(atom_id, set) evaluating one atom over a set.

// Exact hypercube counting; measure is the number of vertices.
class VertexEvaluator {
 public:
  using Set = VertexSet;

  explicit VertexEvaluator(const PredicateTree& tree)
      : n_(tree.atom_count()) {}

  Set ground() const { return VertexSet::all(n_); }
  double measure(const Set& set) const {
    return static_cast<double>(set.count());
  }
  double total() const { return static_cast<double>(VertexSet::all(n_).count()); }
  Set apply(int atom_id, const Set& set) const {
    return apply_atom(atom_id, set);
  }

 private:
  int n_;
};

// Independence model over atom outcomes; measure is probability mass.
// Sets keep their vertex structure so correlations introduced by shared
// history are priced exactly.
class FractionEvaluator {
 public:
  using Set = VertexSet;

  explicit FractionEvaluator(const PredicateTree& tree) : n_(tree.atom_count()) {
    if (n_ < 1 || n_ > 20) {
      throw std::invalid_argument(
          "fraction evaluation supports 1 to 20 atoms");
    }
    weights_.assign(std::size_t{1} << n_, 1.0);
    for (int atom = 1; atom <= n_; ++atom) {
      const double selectivity = tree.atom(atom).selectivity;
      for (std::size_t v = 0; v < weights_.size(); ++v) {
        weights_[v] *= ((v >> (atom - 1)) & 1) ? selectivity
                                               : (1.0 - selectivity);
      }
    }
  }

  Set ground() const { return VertexSet::all(n_); }

  double measure(const Set& set) const {
    double mass = 0.0;
    const auto& words = set.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::uint64_t word = words[w];
      while (word) {
        const int bit = std::countr_zero(word);
        mass += weights_[(w << 6) + static_cast<std::size_t>(bit)];
        word &= word - 1;
      }
    }
    return mass;
  }

  double total() const { return 1.0; }

  Set apply(int atom_id, const Set& set) const {
    return apply_atom(atom_id, set);
  }

 private:
  int n_;
  std::vector<double> weights_;
};

// Record execution over a table; apply fetches column data for exactly the
// rows in the input set and charges them to the metrics.
class BitmapEvaluator {
 public:
  using Set = Bitmap;

  BitmapEvaluator(const PredicateTree& tree, const Table& table,
                  Metrics& metrics, TouchLedger* ledger = nullptr)
      : tree_(&tree), table_(&table), metrics_(&metrics), ledger_(ledger) {}

  Set ground() const { return Bitmap::all(table_->row_count); }
  double measure(const Set& set) const {
    return static_cast<double>(set.count());
  }
  double total() const { return static_cast<double>(table_->row_count); }
  Set apply(int atom_id, const Set& set) const {
    return apply_atom_exec(*table_, tree_->atom(atom_id), set, *metrics_,
                           ledger_);
  }

 private:
  const PredicateTree* tree_;
  const Table* table_;
  Metrics* metrics_;
  TouchLedger* ledger_;
};

// Realized-count evaluator for ordering search: per-atom outcome bitmaps are
// precomputed once, so apply is a mask intersection and charges nothing.
class CachedBitmapEvaluator {
 public:
  using Set = Bitmap;

  CachedBitmapEvaluator(const PredicateTree& tree, const Table& table)
      : row_count_(table.row_count) {
    Metrics scratch;
    const Bitmap everything = Bitmap::all(row_count_);
    masks_.reserve(tree.atom_count());
    for (int atom = 1; atom <= tree.atom_count(); ++atom) {
      masks_.push_back(
          apply_atom_exec(table, tree.atom(atom), everything, scratch));
    }
  }

  Set ground() const { return Bitmap::all(row_count_); }
  double measure(const Set& set) const {
    return static_cast<double>(set.count());
  }
  double total() const { return static_cast<double>(row_count_); }
  Set apply(int atom_id, const Set& set) const {
    return set_and(set, masks_[atom_id - 1]);
  }

  const Bitmap& mask(int atom_id) const { return masks_[atom_id - 1]; }

 private:
  std::size_t row_count_;
  std::vector<Bitmap> masks_;
};

}  // namespace predplan
