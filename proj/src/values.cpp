#include "seqbench/values.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace seqbench {

namespace {

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

std::string escape_string(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string canonical_number_string(const std::string& text) {
  std::string s = text;
  // strip surrounding whitespace
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return text;
  s = s.substr(b, e - b + 1);
  if (!looks_numeric(s)) return s;

  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+') ++i;
  else if (s[i] == '-') { negative = true; ++i; }

  std::string intpart, fracpart;
  bool in_frac = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.') { in_frac = true; continue; }
    (in_frac ? fracpart : intpart) += s[i];
  }
  // trim leading zeros of the integer part, trailing zeros of the fraction
  std::size_t nz = intpart.find_first_not_of('0');
  intpart = (nz == std::string::npos) ? "0" : intpart.substr(nz);
  while (!fracpart.empty() && fracpart.back() == '0') fracpart.pop_back();

  std::string out = intpart;
  if (!fracpart.empty()) out += "." + fracpart;
  if (out == "0") return "0";
  return negative ? "-" + out : out;
}

std::string render_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string canonical_value_key(const DbValue& v) {
  struct Visitor {
    std::string operator()(std::nullptr_t) const { return "z:null"; }
    std::string operator()(std::int64_t i) const { return "n:" + canonical_number_string(std::to_string(i)); }
    std::string operator()(double d) const { return "n:" + canonical_number_string(render_double(d)); }
    std::string operator()(const std::string& s) const { return "s:" + s; }
    std::string operator()(const DecimalText& d) const { return "n:" + canonical_number_string(d.digits); }
  };
  return std::visit(Visitor{}, v);
}

std::string canonical_row_key(const DbRow& row) {
  std::string out;
  for (const auto& v : row) {
    out += canonical_value_key(v);
    out += '\x1f';
  }
  return out;
}

bool rows_equal(const std::vector<DbRow>& a, const std::vector<DbRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (canonical_row_key(a[i]) != canonical_row_key(b[i])) return false;
  }
  return true;
}

std::string render_rows_literal(const std::vector<DbRow>& rows) {
  struct Visitor {
    std::string operator()(std::nullptr_t) const { return "None"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_double(d); }
    std::string operator()(const std::string& s) const { return escape_string(s); }
    std::string operator()(const DecimalText& d) const { return "Decimal(\"" + d.digits + "\")"; }
  };
  std::string out = "[";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0) out += ", ";
    out += "(";
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) out += ", ";
      out += std::visit(Visitor{}, rows[r][c]);
    }
    if (rows[r].size() == 1) out += ",";
    out += ")";
  }
  out += "]";
  return out;
}

namespace {

struct LiteralParser {
  const std::string& text;
  std::size_t pos = 0;

  explicit LiteralParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) { ++pos; return true; }
    return false;
  }

  bool match_word(const std::string& w) {
    skip_ws();
    if (text.compare(pos, w.size(), w) == 0) { pos += w.size(); return true; }
    return false;
  }

  std::optional<std::string> parse_quoted() {
    skip_ws();
    if (pos >= text.size()) return std::nullopt;
    char quote = text[pos];
    if (quote != '"' && quote != '\'') return std::nullopt;
    ++pos;
    std::string out;
    while (pos < text.size()) {
      char c = text[pos++];
      if (c == '\\' && pos < text.size()) {
        char n = text[pos++];
        switch (n) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += n;
        }
      } else if (c == quote) {
        return out;
      } else {
        out += c;
      }
    }
    return std::nullopt;  // unterminated
  }

  std::optional<DbValue> parse_value() {
    skip_ws();
    if (pos >= text.size()) return std::nullopt;
    char c = text[pos];
    if (c == '"' || c == '\'') {
      auto s = parse_quoted();
      if (!s) return std::nullopt;
      return DbValue{*s};
    }
    if (match_word("Decimal")) {
      if (!eat('(')) return std::nullopt;
      auto s = parse_quoted();
      if (!s || !eat(')')) return std::nullopt;
      return DbValue{DecimalText{*s}};
    }
    if (match_word("None") || match_word("NULL")) return DbValue{nullptr};
    // number
    std::size_t start = pos;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
    bool digits = false, dot = false, expo = false;
    while (pos < text.size()) {
      char d = text[pos];
      if (std::isdigit(static_cast<unsigned char>(d))) { digits = true; ++pos; }
      else if (d == '.' && !dot && !expo) { dot = true; ++pos; }
      else if ((d == 'e' || d == 'E') && digits && !expo) { expo = true; ++pos; if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos; }
      else break;
    }
    if (!digits) return std::nullopt;
    std::string num = text.substr(start, pos - start);
    if (!dot && !expo) {
      std::int64_t i = 0;
      auto res = std::from_chars(num.data(), num.data() + num.size(), i);
      if (res.ec == std::errc()) return DbValue{i};
    }
    return DbValue{std::strtod(num.c_str(), nullptr)};
  }

  std::optional<DbRow> parse_tuple() {
    if (!eat('(')) return std::nullopt;
    DbRow row;
    skip_ws();
    if (eat(')')) return row;
    while (true) {
      auto v = parse_value();
      if (!v) return std::nullopt;
      row.push_back(*v);
      skip_ws();
      if (eat(',')) {
        skip_ws();
        if (eat(')')) return row;  // trailing comma (1-tuples)
        continue;
      }
      if (eat(')')) return row;
      return std::nullopt;
    }
  }

  std::optional<std::vector<DbRow>> parse_rows() {
    if (!eat('[')) return std::nullopt;
    std::vector<DbRow> rows;
    skip_ws();
    if (eat(']')) {
      skip_ws();
      return pos == text.size() ? std::optional(rows) : std::nullopt;
    }
    while (true) {
      auto t = parse_tuple();
      if (!t) return std::nullopt;
      rows.push_back(std::move(*t));
      skip_ws();
      if (eat(',')) {
        skip_ws();
        if (eat(']')) break;  // trailing comma
        continue;
      }
      if (eat(']')) break;
      return std::nullopt;
    }
    skip_ws();
    return pos == text.size() ? std::optional(rows) : std::nullopt;
  }
};

}  // namespace

std::optional<std::vector<DbRow>> parse_rows_literal(const std::string& text) {
  LiteralParser p(text);
  return p.parse_rows();
}

std::optional<std::string> canonical_rows_literal(const std::string& text) {
  auto rows = parse_rows_literal(text);
  if (!rows) return std::nullopt;
  std::string out = "[";
  for (std::size_t r = 0; r < rows->size(); ++r) {
    if (r > 0) out += ",";
    out += "(";
    const auto& row = (*rows)[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ",";
      out += canonical_value_key(row[c]);
    }
    out += ")";
  }
  out += "]";
  return out;
}

}  // namespace seqbench
