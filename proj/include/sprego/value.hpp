#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sprego/utf8.hpp"

namespace sprego {

enum class ErrorKind { ValueErr, DivZero, NumErr, NotAvailable, RefErr, NameErr };

inline std::string_view to_string(ErrorKind e) {
  switch (e) {
    case ErrorKind::ValueErr: return "#VALUE!";
    case ErrorKind::DivZero: return "#DIV/0!";
    case ErrorKind::NumErr: return "#NUM!";
    case ErrorKind::NotAvailable: return "#N/A";
    case ErrorKind::RefErr: return "#REF!";
    case ErrorKind::NameErr: return "#NAME?";
  }
  return "#VALUE!";
}

/// Exact, case-sensitive match against the canonical error spellings.
inline std::optional<ErrorKind> parse_error_kind(std::string_view s) {
  for (auto e : {ErrorKind::ValueErr, ErrorKind::DivZero, ErrorKind::NumErr, ErrorKind::NotAvailable,
                 ErrorKind::RefErr, ErrorKind::NameErr}) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

struct Blank {
  friend bool operator==(Blank, Blank) = default;
};
struct Omitted {
  friend bool operator==(Omitted, Omitted) = default;
};

/// A single spreadsheet value. Numbers are always finite: constructing a
/// Number from NaN or an infinity yields #NUM! instead.
class Scalar {
 public:
  using Storage = std::variant<Blank, Omitted, double, std::string, bool, ErrorKind>;

  Scalar() = default;

  static Scalar blank() { return Scalar{Storage{Blank{}}}; }
  static Scalar omitted() { return Scalar{Storage{Omitted{}}}; }
  static Scalar number(double d) {
    if (!std::isfinite(d)) return error(ErrorKind::NumErr);
    return Scalar{Storage{d == 0.0 ? 0.0 : d}};
  }
  static Scalar text(std::string s) { return Scalar{Storage{std::move(s)}}; }
  static Scalar boolean(bool b) { return Scalar{Storage{b}}; }
  static Scalar error(ErrorKind e) { return Scalar{Storage{e}}; }

  bool is_blank() const { return std::holds_alternative<Blank>(v_); }
  bool is_omitted() const { return std::holds_alternative<Omitted>(v_); }
  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_boolean() const { return std::holds_alternative<bool>(v_); }
  bool is_error() const { return std::holds_alternative<ErrorKind>(v_); }

  double as_number() const { return std::get<double>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  bool as_boolean() const { return std::get<bool>(v_); }
  ErrorKind as_error() const { return std::get<ErrorKind>(v_); }

  const Storage& storage() const { return v_; }

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  explicit Scalar(Storage v) : v_(std::move(v)) {}
  Storage v_{Blank{}};
};

/// Rectangular, row-major matrix of Scalars.
class ArrayValue {
 public:
  ArrayValue(std::size_t rows, std::size_t cols, Scalar fill = Scalar::blank())
      : rows_(rows), cols_(cols), cells_(rows * cols, std::move(fill)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("ArrayValue: empty shape");
  }
  ArrayValue(std::size_t rows, std::size_t cols, std::vector<Scalar> cells)
      : rows_(rows), cols_(cols), cells_(std::move(cells)) {
    if (rows == 0 || cols == 0 || cells_.size() != rows * cols)
      throw std::invalid_argument("ArrayValue: shape does not match element count");
  }

  static ArrayValue column(std::vector<Scalar> cells) {
    const auto n = cells.size();
    return ArrayValue(n, 1, std::move(cells));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }

  const Scalar& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  Scalar& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  const std::vector<Scalar>& cells() const { return cells_; }

  ArrayValue transposed() const {
    ArrayValue out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out.at(c, r) = at(r, c);
    return out;
  }

  friend bool operator==(const ArrayValue&, const ArrayValue&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> cells_;
};

/// Result of evaluating a formula: a single value or an array.
using Value = std::variant<Scalar, ArrayValue>;

// ---------------------------------------------------------------------------
// Number text

/// Strict decimal parse: optional sign, digits with optional '.', optional
/// exponent. No whitespace, thousands separators or trailing characters.
inline std::optional<double> parse_number(std::string_view s) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative = s[i++] == '-';
  const std::size_t body = i;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    const std::size_t exp_digits_start = j;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j == exp_digits_start) return std::nullopt;
    i = j;
  }
  if (i != s.size()) return std::nullopt;

  // from_chars rejects '+' and a leading '.', so normalise first.
  std::string buf;
  if (s[body] == '.') buf.push_back('0');
  buf.append(s.substr(body));
  double d = 0;
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), d);
  if (ec != std::errc{} || ptr != buf.data() + buf.size() || !std::isfinite(d)) return std::nullopt;
  return negative ? -d : d;
}

/// Shortest decimal text that parses back to exactly `d`.
inline std::string format_number_roundtrip(double d) {
  if (d == 0.0) return "0";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

/// Display form: at most 15 significant digits, trailing zeros dropped.
inline std::string format_number_display(double d) {
  if (d == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", d);
  std::string s = buf;
  if (s == "-0") return "0";
  return s;
}

/// Canonical output rendering used by traces, reports and the CLI.
inline std::string render(const Scalar& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return format_number_display(x);
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? "TRUE" : "FALSE";
        else if constexpr (std::is_same_v<T, ErrorKind>) return std::string(to_string(x));
        else return std::string{};
      },
      v.storage());
}

// ---------------------------------------------------------------------------
// Coercion

inline Scalar coerce_to_number(const Scalar& v) {
  if (v.is_number() || v.is_error()) return v;
  if (v.is_boolean()) return Scalar::number(v.as_boolean() ? 1.0 : 0.0);
  if (v.is_blank() || v.is_omitted()) return Scalar::number(0.0);
  if (auto d = parse_number(v.as_text())) return Scalar::number(*d);
  return Scalar::error(ErrorKind::ValueErr);
}

inline Scalar coerce_to_text(const Scalar& v) {
  if (v.is_text() || v.is_error()) return v;
  if (v.is_number()) return Scalar::text(format_number_roundtrip(v.as_number()));
  if (v.is_boolean()) return Scalar::text(v.as_boolean() ? "TRUE" : "FALSE");
  return Scalar::text("");
}

// ---------------------------------------------------------------------------
// Comparison

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

namespace detail {

// Type rank for cross-type ordering: Number < Text < Boolean.
inline int type_rank(const Scalar& v) {
  if (v.is_number()) return 0;
  if (v.is_text()) return 1;
  return 2;
}

inline int three_way(const Scalar& a, const Scalar& b) {
  if (a.is_number()) {
    const double x = a.as_number(), y = b.as_number();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_text()) {
    const auto x = utf8::fold(utf8::decode(a.as_text()));
    const auto y = utf8::fold(utf8::decode(b.as_text()));
    const int c = x.compare(y);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  return static_cast<int>(a.as_boolean()) - static_cast<int>(b.as_boolean());
}

}  // namespace detail

/// Three-way ordering of two non-error scalars; Blank takes the shape of the
/// other operand (0, "" or FALSE).
inline int order(Scalar a, Scalar b) {
  auto fill_blank = [](Scalar& x, const Scalar& other) {
    if (!x.is_blank() && !x.is_omitted()) return;
    if (other.is_text()) x = Scalar::text("");
    else if (other.is_boolean()) x = Scalar::boolean(false);
    else x = Scalar::number(0.0);
  };
  fill_blank(a, b);
  fill_blank(b, a);
  const int ra = detail::type_rank(a), rb = detail::type_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  return detail::three_way(a, b);
}

inline Scalar compare(const Scalar& a, const Scalar& b, CompareOp op) {
  if (a.is_error()) return a;
  if (b.is_error()) return b;
  const int c = order(a, b);
  switch (op) {
    case CompareOp::Eq: return Scalar::boolean(c == 0);
    case CompareOp::Ne: return Scalar::boolean(c != 0);
    case CompareOp::Lt: return Scalar::boolean(c < 0);
    case CompareOp::Le: return Scalar::boolean(c <= 0);
    case CompareOp::Gt: return Scalar::boolean(c > 0);
    case CompareOp::Ge: return Scalar::boolean(c >= 0);
  }
  return Scalar::error(ErrorKind::ValueErr);
}

/// Element (1,1) of an array, or the scalar itself.
inline Scalar display_value(const Value& v) {
  if (const auto* s = std::get_if<Scalar>(&v)) return *s;
  return std::get<ArrayValue>(v).at(0, 0);
}

}  // namespace sprego
