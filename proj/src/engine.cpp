#include "predplan/engine.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

namespace predplan {

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const ColumnData& Table::column(const std::string& name) const {
  const int index = column_index(name);
  if (index < 0) throw EngineError("unknown column '" + name + "'");
  return columns[index];
}

namespace {

// RFC-4180 field splitting; quoted fields may contain commas, doubled
// quotes, and newlines.
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    if (!row_started) return;
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_started = true;
        break;
      case ',':
        row_started = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        row_started = true;
        break;
    }
  }
  if (quoted) throw EngineError("unterminated quoted field");
  end_row();
  return rows;
}

bool parse_int(const std::string& text, std::int64_t& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && !text.empty();
}

bool parse_real(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && !text.empty();
}

}  // namespace

Table load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EngineError("cannot open '" + path + "'");
  auto rows = read_csv_rows(in);
  if (rows.empty()) throw EngineError("empty CSV file '" + path + "'");

  Table table;
  table.names = rows[0];
  const std::size_t width = table.names.size();
  table.row_count = rows.size() - 1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw EngineError("ragged CSV row " + std::to_string(r + 1) + " in '" +
                        path + "'");
    }
  }

  for (std::size_t c = 0; c < width; ++c) {
    bool all_int = true;
    bool all_real = true;
    for (std::size_t r = 1; r < rows.size() && (all_int || all_real); ++r) {
      std::int64_t iv;
      double rv;
      if (all_int && !parse_int(rows[r][c], iv)) all_int = false;
      if (all_real && !parse_real(rows[r][c], rv)) all_real = false;
    }
    if (all_int) {
      IntColumn column(table.row_count);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        parse_int(rows[r][c], column[r - 1]);
      }
      table.columns.emplace_back(std::move(column));
    } else if (all_real) {
      RealColumn column(table.row_count);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        parse_real(rows[r][c], column[r - 1]);
      }
      table.columns.emplace_back(std::move(column));
    } else {
      StringColumn column(table.row_count);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        column[r - 1] = rows[r][c];
      }
      table.columns.emplace_back(std::move(column));
    }
  }
  return table;
}

Bitmap Bitmap::all(std::size_t size) {
  Bitmap bm = none(size);
  for (auto& word : bm.words_) word = ~std::uint64_t{0};
  if (size & 63) {
    bm.words_.back() &= (std::uint64_t{1} << (size & 63)) - 1;
  }
  return bm;
}

Bitmap Bitmap::none(std::size_t size) {
  Bitmap bm;
  bm.size_ = size;
  bm.words_.assign((size + 63) / 64, 0);
  return bm;
}

std::uint64_t Bitmap::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t word : words_) total += std::popcount(word);
  return total;
}

bool Bitmap::empty() const {
  for (std::uint64_t word : words_) {
    if (word) return false;
  }
  return true;
}

namespace {

void require_same_size(const Bitmap& a, const Bitmap& b) {
  if (a.size() != b.size()) {
    throw EngineError("bitmap length mismatch: " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  }
}

}  // namespace

Bitmap& Bitmap::operator&=(const Bitmap& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

Bitmap& Bitmap::operator|=(const Bitmap& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

Bitmap& Bitmap::subtract(const Bitmap& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

bool Bitmap::is_subset_of(const Bitmap& other) const {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

Bitmap bm_and(const Bitmap& a, const Bitmap& b) {
  Bitmap out = a;
  out &= b;
  return out;
}

Bitmap bm_or(const Bitmap& a, const Bitmap& b) {
  Bitmap out = a;
  out |= b;
  return out;
}

Bitmap bm_diff(const Bitmap& a, const Bitmap& b) {
  Bitmap out = a;
  out.subtract(b);
  return out;
}

ColumnStats build_stats(const Table& table) {
  ColumnStats stats;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    ColumnData sorted = table.columns[c];
    std::visit([](auto& values) { std::sort(values.begin(), values.end()); },
               sorted);
    stats.sorted.emplace(table.names[c], std::move(sorted));
  }
  return stats;
}

namespace {

template <typename T>
double ordered_fraction(const std::vector<T>& sorted, Cmp cmp, const T& value) {
  const double n = static_cast<double>(sorted.size());
  if (sorted.empty()) return 0.0;
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
  const auto hi = std::upper_bound(sorted.begin(), sorted.end(), value);
  const double below = static_cast<double>(lo - sorted.begin());
  const double at_or_below = static_cast<double>(hi - sorted.begin());
  switch (cmp) {
    case Cmp::Lt: return below / n;
    case Cmp::Le: return at_or_below / n;
    case Cmp::Gt: return 1.0 - at_or_below / n;
    case Cmp::Ge: return 1.0 - below / n;
    case Cmp::Eq: return (at_or_below - below) / n;
    case Cmp::Ne: return 1.0 - (at_or_below - below) / n;
  }
  return 0.0;
}

}  // namespace

double estimate_selectivity(const ColumnStats& stats, const Atom& atom) {
  const auto it = stats.sorted.find(atom.column);
  if (it == stats.sorted.end()) {
    throw EngineError("no statistics for column '" + atom.column + "'");
  }
  const ColumnData& sorted = it->second;
  if (const double* num = std::get_if<double>(&atom.value)) {
    if (const auto* ints = std::get_if<IntColumn>(&sorted)) {
      // Compare in the real domain so fractional literals bracket correctly.
      std::vector<double> view(ints->begin(), ints->end());
      return ordered_fraction(view, atom.cmp, *num);
    }
    if (const auto* reals = std::get_if<RealColumn>(&sorted)) {
      return ordered_fraction(*reals, atom.cmp, *num);
    }
    throw EngineError("numeric comparison against string column '" +
                      atom.column + "'");
  }
  const std::string& text = std::get<std::string>(atom.value);
  if (const auto* strings = std::get_if<StringColumn>(&sorted)) {
    return ordered_fraction(*strings, atom.cmp, text);
  }
  throw EngineError("string comparison against numeric column '" +
                    atom.column + "'");
}

bool TouchLedger::any_double_evaluation() const {
  for (std::uint8_t count : counts_) {
    if (count > 1) return true;
  }
  return false;
}

namespace {

template <typename T>
bool compare(const T& lhs, Cmp cmp, const T& rhs) {
  switch (cmp) {
    case Cmp::Lt: return lhs < rhs;
    case Cmp::Le: return lhs <= rhs;
    case Cmp::Gt: return lhs > rhs;
    case Cmp::Ge: return lhs >= rhs;
    case Cmp::Eq: return lhs == rhs;
    case Cmp::Ne: return lhs != rhs;
  }
  return false;
}

}  // namespace

bool eval_atom_on_row(const Table& table, const Atom& atom, std::size_t row) {
  const ColumnData& data = table.column(atom.column);
  if (const double* num = std::get_if<double>(&atom.value)) {
    if (const auto* ints = std::get_if<IntColumn>(&data)) {
      return compare(static_cast<double>((*ints)[row]), atom.cmp, *num);
    }
    if (const auto* reals = std::get_if<RealColumn>(&data)) {
      return compare((*reals)[row], atom.cmp, *num);
    }
    throw EngineError("numeric comparison against string column '" +
                      atom.column + "'");
  }
  const std::string& text = std::get<std::string>(atom.value);
  if (const auto* strings = std::get_if<StringColumn>(&data)) {
    return compare((*strings)[row], atom.cmp, text);
  }
  throw EngineError("string comparison against numeric column '" +
                    atom.column + "'");
}

Bitmap apply_atom_exec(const Table& table, const Atom& atom,
                       const Bitmap& input, Metrics& metrics,
                       TouchLedger* ledger) {
  if (input.size() != table.row_count) {
    throw EngineError("bitmap length does not match table row count");
  }
  const ColumnData& data = table.column(atom.column);
  Bitmap output = Bitmap::none(table.row_count);

  auto scan = [&](const auto& values, const auto& literal) {
    input.for_each([&](std::size_t row) {
      if (ledger) ledger->touch(atom.id, row);
      if (compare(values[row], atom.cmp, literal)) output.set(row);
    });
  };

  if (const double* num = std::get_if<double>(&atom.value)) {
    if (const auto* ints = std::get_if<IntColumn>(&data)) {
      const double literal = *num;
      input.for_each([&](std::size_t row) {
        if (ledger) ledger->touch(atom.id, row);
        if (compare(static_cast<double>((*ints)[row]), atom.cmp, literal)) {
          output.set(row);
        }
      });
    } else if (const auto* reals = std::get_if<RealColumn>(&data)) {
      scan(*reals, *num);
    } else {
      throw EngineError("numeric comparison against string column '" +
                        atom.column + "'");
    }
  } else {
    const std::string& text = std::get<std::string>(atom.value);
    if (const auto* strings = std::get_if<StringColumn>(&data)) {
      scan(*strings, text);
    } else {
      throw EngineError("string comparison against numeric column '" +
                        atom.column + "'");
    }
  }

  metrics.evaluations += input.count();
  metrics.per_step.push_back(input.count());
  return output;
}

}  // namespace predplan
