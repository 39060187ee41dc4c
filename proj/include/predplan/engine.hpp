#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "predplan/expr.hpp"

namespace predplan {

struct EngineError : std::runtime_error {
  explicit EngineError(const std::string& message)
      : std::runtime_error(message) {}
};

using IntColumn = std::vector<std::int64_t>;
using RealColumn = std::vector<double>;
using StringColumn = std::vector<std::string>;
using ColumnData = std::variant<IntColumn, RealColumn, StringColumn>;

// Immutable after load. All columns have row_count entries.
struct Table {
  std::vector<std::string> names;
  std::vector<ColumnData> columns;
  std::size_t row_count = 0;

  int column_index(const std::string& name) const;  // -1 when absent
  const ColumnData& column(const std::string& name) const;
};

// Header row names columns; types inferred as integer, then real, then
// string. Ragged rows, an empty file, or a missing file are errors.
Table load_csv(const std::string& path);

// Fixed-length uncompressed bit vector of record ids.
class Bitmap {
 public:
  Bitmap() = default;

  static Bitmap all(std::size_t size);
  static Bitmap none(std::size_t size);

  std::size_t size() const { return size_; }
  std::uint64_t count() const;
  bool empty() const;

  bool test(std::size_t row) const {
    return (words_[row >> 6] >> (row & 63)) & 1;
  }
  void set(std::size_t row) { words_[row >> 6] |= std::uint64_t{1} << (row & 63); }

  Bitmap& operator&=(const Bitmap& other);
  Bitmap& operator|=(const Bitmap& other);
  Bitmap& subtract(const Bitmap& other);

  bool operator==(const Bitmap& other) const = default;
  bool is_subset_of(const Bitmap& other) const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  // Invokes fn(row) for every set bit in ascending order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t word = words_[w];
      while (word) {
        const int bit = std::countr_zero(word);
        fn((w << 6) + static_cast<std::size_t>(bit));
        word &= word - 1;
      }
    }
  }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

Bitmap bm_and(const Bitmap& a, const Bitmap& b);
Bitmap bm_or(const Bitmap& a, const Bitmap& b);
Bitmap bm_diff(const Bitmap& a, const Bitmap& b);

// Sorted per-column values; supports exact selectivity for every comparator.
struct ColumnStats {
  std::map<std::string, ColumnData> sorted;
};

ColumnStats build_stats(const Table& table);

// Fraction of records satisfying the atom, exact from the sorted column.
double estimate_selectivity(const ColumnStats& stats, const Atom& atom);

struct Metrics {
  std::uint64_t evaluations = 0;           // records evaluated by atoms
  std::vector<std::uint64_t> per_step;     // input cardinality per atom step
  std::chrono::duration<double> wall_time{0};
};

// Debug aid: counts how often each (atom, record) pair was evaluated.
class TouchLedger {
 public:
  TouchLedger(int atom_count, std::size_t row_count)
      : row_count_(row_count), counts_(atom_count * row_count, 0) {}

  void touch(int atom_id, std::size_t row) {
    ++counts_[(atom_id - 1) * row_count_ + row];
  }
  bool any_double_evaluation() const;

 private:
  std::size_t row_count_;
  std::vector<std::uint8_t> counts_;
};

// Evaluates the atom over exactly the rows set in input. Charges |input|
// evaluations and appends one per_step entry.
Bitmap apply_atom_exec(const Table& table, const Atom& atom,
                       const Bitmap& input, Metrics& metrics,
                       TouchLedger* ledger = nullptr);

// Direct single-record atom evaluation; charges nothing.
bool eval_atom_on_row(const Table& table, const Atom& atom, std::size_t row);

}  // namespace predplan
