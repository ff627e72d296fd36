#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace seqbench {

// A cell value inside a database row. `DecimalText` carries exact decimal
// strings (the embedded engine and remote backends may both produce them);
// comparisons go through canonical_number_string so 75, 75.0 and
// Decimal("75.00") all collapse to the same key.
struct DecimalText {
  std::string digits;
  bool operator==(const DecimalText&) const = default;
};

using DbValue = std::variant<std::nullptr_t, std::int64_t, double, std::string, DecimalText>;
using DbRow = std::vector<DbValue>;

// "0075.2500" -> "75.25", "-0" -> "0", ".5" -> "0.5". Non-numeric text is
// returned unchanged so callers can use the result as an opaque key.
std::string canonical_number_string(const std::string& text);

// Shortest round-trip rendering of a double.
std::string render_double(double v);

// Comparison key: numbers collapse across representations, strings and null
// stay distinct from numbers.
std::string canonical_value_key(const DbValue& v);
std::string canonical_row_key(const DbRow& row);

bool rows_equal(const std::vector<DbRow>& a, const std::vector<DbRow>& b);

// Python-style tuple-list literal, matching what a MySQL-backed harness shows
// agents: [(1, "John Doe", "HR"), (2, "Jane Smith", "IT")]. One-element rows
// render with a trailing comma.
std::string render_rows_literal(const std::vector<DbRow>& rows);

// Tolerant reader for agent-submitted literals: accepts single or double
// quotes, Decimal("...") wrappers, None/NULL, arbitrary whitespace and
// trailing commas. Values are compared exactly after parsing.
std::optional<std::vector<DbRow>> parse_rows_literal(const std::string& text);

// Canonical rendering used when comparing voted answers: parse, then re-render
// with normalized numbers and whitespace, keeping row order.
std::optional<std::string> canonical_rows_literal(const std::string& text);

}  // namespace seqbench
