#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sprego/context.hpp"
#include "sprego/utf8.hpp"
#include "sprego/value.hpp"

namespace sprego {

enum class ArgMode {
  ScalarLifted,    // receives one Scalar; arrays are lifted over by the evaluator
  ArrayConsuming,  // receives the whole operand, reference included
};

using FunctionImpl = std::function<Operand(std::span<const Operand>, EvalContext&)>;

struct FunctionDescriptor {
  std::string name;
  int min_arity = 0;
  int max_arity = 0;
  std::vector<ArgMode> modes;  // the last mode repeats for variadic tails
  FunctionImpl impl;           // empty for IF/AND/OR, which the evaluator handles lazily
  bool is_volatile = false;

  ArgMode mode(std::size_t i) const {
    if (modes.empty()) return ArgMode::ScalarLifted;
    return i < modes.size() ? modes[i] : modes.back();
  }
  bool is_special_form() const { return !impl; }
};

namespace fn {

using Args = std::span<const Operand>;

inline Operand val(Scalar s) { return Operand{Value{std::move(s)}, std::nullopt}; }
inline Operand err(ErrorKind e) { return val(Scalar::error(e)); }

inline bool has(Args a, std::size_t i) { return i < a.size(); }
inline const Scalar& scalar(Args a, std::size_t i) { return *a[i].scalar(); }

inline ArrayValue as_array(const Operand& op) {
  if (const auto* a = op.array()) return *a;
  return ArrayValue(1, 1, *op.scalar());
}

/// Number coerced and truncated toward zero; errors pass through.
inline Scalar integer_arg(const Scalar& v) {
  Scalar n = coerce_to_number(v);
  if (n.is_error()) return n;
  return Scalar::number(std::trunc(n.as_number()));
}

/// Spreadsheet truthiness: Boolean as is, Number != 0, Blank false, Text #VALUE!.
inline Scalar truth(const Scalar& v) {
  if (v.is_error() || v.is_boolean()) return v;
  if (v.is_number()) return Scalar::boolean(v.as_number() != 0.0);
  if (v.is_blank() || v.is_omitted()) return Scalar::boolean(false);
  return Scalar::error(ErrorKind::ValueErr);
}

// ---------------------------------------------------------------------------
// Text

inline Operand left_right(Args a, bool from_left) {
  Scalar t = coerce_to_text(scalar(a, 0));
  if (t.is_error()) return val(t);
  double n = 1;
  if (has(a, 1)) {
    Scalar k = integer_arg(scalar(a, 1));
    if (k.is_error()) return val(k);
    n = k.as_number();
  }
  if (n < 0) return err(ErrorKind::ValueErr);
  const auto chars = utf8::decode(t.as_text());
  const auto take = static_cast<std::size_t>(std::min<double>(n, static_cast<double>(chars.size())));
  const auto part = from_left ? std::u32string_view(chars).substr(0, take)
                              : std::u32string_view(chars).substr(chars.size() - take);
  return val(Scalar::text(utf8::encode(part)));
}

inline Operand len(Args a, EvalContext&) {
  Scalar t = coerce_to_text(scalar(a, 0));
  if (t.is_error()) return val(t);
  return val(Scalar::number(static_cast<double>(utf8::length(t.as_text()))));
}

inline Operand find_impl(Args a, bool fold_case) {
  Scalar needle = coerce_to_text(scalar(a, 0));
  if (needle.is_error()) return val(needle);
  Scalar hay = coerce_to_text(scalar(a, 1));
  if (hay.is_error()) return val(hay);
  double start = 1;
  if (has(a, 2)) {
    Scalar s = integer_arg(scalar(a, 2));
    if (s.is_error()) return val(s);
    start = s.as_number();
  }
  auto n = utf8::decode(needle.as_text());
  auto h = utf8::decode(hay.as_text());
  if (start < 1 || start > static_cast<double>(h.size()) + 1) return err(ErrorKind::ValueErr);
  if (fold_case) {
    n = utf8::fold(std::move(n));
    h = utf8::fold(std::move(h));
  }
  const auto pos = h.find(n, static_cast<std::size_t>(start) - 1);
  if (pos == std::u32string::npos) return err(ErrorKind::ValueErr);
  return val(Scalar::number(static_cast<double>(pos + 1)));
}

inline Operand substitute(Args a, EvalContext&) {
  Scalar t = coerce_to_text(scalar(a, 0));
  if (t.is_error()) return val(t);
  Scalar old_t = coerce_to_text(scalar(a, 1));
  if (old_t.is_error()) return val(old_t);
  Scalar new_t = coerce_to_text(scalar(a, 2));
  if (new_t.is_error()) return val(new_t);
  double instance = 0;  // 0 = every occurrence
  if (has(a, 3)) {
    Scalar k = integer_arg(scalar(a, 3));
    if (k.is_error()) return val(k);
    if (k.as_number() < 1) return err(ErrorKind::ValueErr);
    instance = k.as_number();
  }
  const auto text = utf8::decode(t.as_text());
  const auto from = utf8::decode(old_t.as_text());
  const auto to = utf8::decode(new_t.as_text());
  if (from.empty()) return val(t);

  std::u32string out;
  std::size_t i = 0;
  double seen = 0;
  while (i < text.size()) {
    const auto hit = text.find(from, i);
    if (hit == std::u32string::npos) break;
    ++seen;
    out.append(text, i, hit - i);
    if (instance == 0 || seen == instance) out += to;
    else out += from;
    i = hit + from.size();
  }
  out.append(text, std::min(i, text.size()));
  return val(Scalar::text(utf8::encode(out)));
}

// ---------------------------------------------------------------------------
// Aggregates: Numbers count, Booleans/Text/Blank are skipped, errors win.

struct Collected {
  std::vector<double> numbers;
  std::optional<ErrorKind> error;
};

inline Collected collect_numbers(Args a) {
  Collected out;
  auto visit = [&](const Scalar& v) {
    if (out.error) return;
    if (v.is_error()) out.error = v.as_error();
    else if (v.is_number()) out.numbers.push_back(v.as_number());
  };
  for (const auto& op : a) {
    if (const auto* arr = op.array()) {
      for (const auto& v : arr->cells()) visit(v);
    } else {
      visit(*op.scalar());
    }
  }
  return out;
}

inline Operand sum(Args a, EvalContext&) {
  auto c = collect_numbers(a);
  if (c.error) return err(*c.error);
  double s = 0;
  for (double d : c.numbers) s += d;
  return val(Scalar::number(s));
}

inline Operand average(Args a, EvalContext&) {
  auto c = collect_numbers(a);
  if (c.error) return err(*c.error);
  if (c.numbers.empty()) return err(ErrorKind::DivZero);
  double s = 0;
  for (double d : c.numbers) s += d;
  return val(Scalar::number(s / static_cast<double>(c.numbers.size())));
}

inline Operand extremum(Args a, bool want_max) {
  auto c = collect_numbers(a);
  if (c.error) return err(*c.error);
  if (c.numbers.empty()) return val(Scalar::number(0));
  const auto it = want_max ? std::max_element(c.numbers.begin(), c.numbers.end())
                           : std::min_element(c.numbers.begin(), c.numbers.end());
  return val(Scalar::number(*it));
}

inline Operand kth(Args a, bool largest) {
  auto c = collect_numbers(a.subspan(0, 1));
  if (c.error) return err(*c.error);
  Scalar k = integer_arg(scalar(a, 1));
  if (k.is_error()) return val(k);
  const double kk = k.as_number();
  if (kk < 1 || kk > static_cast<double>(c.numbers.size())) return err(ErrorKind::NumErr);
  std::sort(c.numbers.begin(), c.numbers.end());
  const auto idx = static_cast<std::size_t>(kk) - 1;
  return val(Scalar::number(largest ? c.numbers[c.numbers.size() - 1 - idx] : c.numbers[idx]));
}

// ---------------------------------------------------------------------------
// Logical

/// Folds AND/OR over operands one at a time so the caller can stop early.
class LogicalAccumulator {
 public:
  explicit LogicalAccumulator(bool is_and) : is_and_(is_and), acc_(is_and) {}

  void add(const Operand& op) {
    if (error_) return;
    auto visit = [&](const Scalar& v) {
      if (error_) return;
      if (v.is_error()) {
        error_ = v.as_error();
        return;
      }
      bool b;
      if (v.is_boolean()) b = v.as_boolean();
      else if (v.is_number()) b = v.as_number() != 0.0;
      else return;
      seen_ = true;
      acc_ = is_and_ ? (acc_ && b) : (acc_ || b);
    };
    if (const auto* arr = op.array()) {
      for (const auto& v : arr->cells()) visit(v);
    } else {
      visit(*op.scalar());
    }
  }

  /// True once further arguments cannot change the outcome.
  bool decided() const { return error_.has_value() || (seen_ && acc_ != is_and_); }

  Scalar result() const {
    if (error_) return Scalar::error(*error_);
    if (!seen_) return Scalar::error(ErrorKind::ValueErr);
    return Scalar::boolean(acc_);
  }

 private:
  bool is_and_;
  bool acc_;
  bool seen_ = false;
  std::optional<ErrorKind> error_;
};

inline Operand not_fn(Args a, EvalContext&) {
  Scalar t = truth(scalar(a, 0));
  if (t.is_error()) return val(t);
  return val(Scalar::boolean(!t.as_boolean()));
}

inline Operand iserror(Args a, EvalContext&) { return val(Scalar::boolean(scalar(a, 0).is_error())); }

// ---------------------------------------------------------------------------
// Lookup and reference

inline Operand match(Args a, EvalContext&) {
  const Scalar& needle = scalar(a, 0);
  if (needle.is_error()) return val(needle);
  if (needle.is_blank() || needle.is_omitted()) return err(ErrorKind::NotAvailable);
  const ArrayValue vec = as_array(a[1]);
  if (vec.rows() != 1 && vec.cols() != 1) return err(ErrorKind::NotAvailable);
  int mode = 1;
  if (has(a, 2)) {
    Scalar m = coerce_to_number(scalar(a, 2));
    if (m.is_error()) return val(m);
    mode = m.as_number() > 0 ? 1 : (m.as_number() < 0 ? -1 : 0);
  }
  const int needle_rank = detail::type_rank(needle);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < vec.size(); ++i) {
    const Scalar& e = vec.cells()[i];
    if (e.is_error() || e.is_blank() || detail::type_rank(e) != needle_rank) continue;
    const int c = order(e, needle);
    if (mode == 0) {
      if (c == 0) return val(Scalar::number(static_cast<double>(i + 1)));
      continue;
    }
    if (mode == 1 ? c > 0 : c < 0) continue;
    if (!best) {
      best = i;
      continue;
    }
    const int vs_best = order(e, vec.cells()[*best]);
    if (mode == 1 ? vs_best >= 0 : vs_best <= 0) best = i;
  }
  if (!best) return err(ErrorKind::NotAvailable);
  return val(Scalar::number(static_cast<double>(*best + 1)));
}

inline Operand index(Args a, EvalContext&) {
  const ArrayValue arr = as_array(a[0]);
  Scalar r = integer_arg(scalar(a, 1));
  if (r.is_error()) return val(r);
  double row = r.as_number();
  double col = 1;
  if (has(a, 2)) {
    Scalar c = integer_arg(scalar(a, 2));
    if (c.is_error()) return val(c);
    col = c.as_number();
  } else if (arr.rows() == 1 && arr.cols() > 1) {
    // a single index into a row vector walks along the row
    col = row;
    row = 1;
  }
  if (row < 0 || col < 0) return err(ErrorKind::ValueErr);
  if (row > static_cast<double>(arr.rows()) || col > static_cast<double>(arr.cols())) return err(ErrorKind::RefErr);

  const std::size_t r0 = row == 0 ? 0 : static_cast<std::size_t>(row) - 1;
  const std::size_t r1 = row == 0 ? arr.rows() : r0 + 1;
  const std::size_t c0 = col == 0 ? 0 : static_cast<std::size_t>(col) - 1;
  const std::size_t c1 = col == 0 ? arr.cols() : c0 + 1;

  std::optional<RangeRef> ref;
  if (a[0].ref) {
    const auto tl = a[0].ref->top_left;
    ref = RangeRef{{tl.column + static_cast<int>(c0), tl.row + static_cast<int>(r0)},
                   {tl.column + static_cast<int>(c1) - 1, tl.row + static_cast<int>(r1) - 1}};
  }
  if (r1 - r0 == 1 && c1 - c0 == 1) return Operand{Value{arr.at(r0, c0)}, ref};
  ArrayValue out(r1 - r0, c1 - c0);
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = c0; j < c1; ++j) out.at(i - r0, j - c0) = arr.at(i, j);
  return Operand{Value{std::move(out)}, ref};
}

inline Operand offset(Args a, EvalContext& ctx) {
  if (!a[0].ref) return err(ErrorKind::ValueErr);
  const RangeRef base = *a[0].ref;
  double shift[2];
  for (int i = 0; i < 2; ++i) {
    Scalar s = integer_arg(scalar(a, static_cast<std::size_t>(i + 1)));
    if (s.is_error()) return val(s);
    shift[i] = s.as_number();
  }
  double size[2] = {static_cast<double>(base.rows()), static_cast<double>(base.cols())};
  for (int i = 0; i < 2; ++i) {
    const auto at = static_cast<std::size_t>(i + 3);
    if (!has(a, at) || scalar(a, at).is_omitted()) continue;
    Scalar s = integer_arg(scalar(a, at));
    if (s.is_error()) return val(s);
    if (s.as_number() < 1) return err(ErrorKind::RefErr);
    size[i] = s.as_number();
  }
  const double top = base.top_left.row + shift[0];
  const double left = base.top_left.column + shift[1];
  const double bottom = top + size[0] - 1;
  const double right = left + size[1] - 1;
  if (top < 1 || left < 1 || bottom > kMaxRows || right > kMaxColumns) return err(ErrorKind::RefErr);
  const RangeRef moved{{static_cast<int>(left), static_cast<int>(top)}, {static_cast<int>(right), static_cast<int>(bottom)}};
  if (moved.is_single_cell()) return Operand{Value{ctx.sheet().get(moved.top_left)}, moved};
  return Operand{Value{get_range(ctx.sheet(), moved)}, moved};
}

inline Operand row_or_column(Args a, EvalContext& ctx, bool rows) {
  if (a.empty() || (a[0].scalar() && a[0].scalar()->is_omitted()))
    return val(Scalar::number(rows ? ctx.anchor().row : ctx.anchor().column));
  if (!a[0].ref) return err(ErrorKind::ValueErr);
  const RangeRef r = *a[0].ref;
  const std::size_t n = rows ? r.rows() : r.cols();
  const int first = rows ? r.top_left.row : r.top_left.column;
  if (!ctx.array_entered() || n == 1) return val(Scalar::number(first));
  ArrayValue out(rows ? n : 1, rows ? 1 : n);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar& slot = rows ? out.at(i, 0) : out.at(0, i);
    slot = Scalar::number(first + static_cast<double>(i));
  }
  return Operand{Value{std::move(out)}, std::nullopt};
}

inline Operand transpose(Args a, EvalContext&) {
  if (const auto* arr = a[0].array()) return Operand{Value{arr->transposed()}, std::nullopt};
  return val(*a[0].scalar());
}

// ---------------------------------------------------------------------------
// Numeric

/// Rounds half away from zero on the shortest decimal form of `x`, so
/// 2.345 rounds to 2.35 even though its binary value sits just below.
inline double round_decimal(double x, int digits) {
  if (x == 0.0) return 0.0;
  const bool negative = x < 0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, std::fabs(x), std::chars_format::scientific);
  const std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));
  const auto e_pos = sci.find('e');
  std::string mantissa;
  for (char c : sci.substr(0, e_pos))
    if (c != '.') mantissa.push_back(c);
  int exponent = 0;
  std::from_chars(sci.data() + e_pos + 1 + (sci[e_pos + 1] == '+' ? 1 : 0), sci.data() + sci.size(), exponent);

  const long keep = static_cast<long>(exponent) + 1 + digits;
  if (keep >= static_cast<long>(mantissa.size())) return x;
  if (keep < 0) return 0.0;
  std::uint64_t kept = 0;
  for (long i = 0; i < keep; ++i) kept = kept * 10 + static_cast<std::uint64_t>(mantissa[static_cast<std::size_t>(i)] - '0');
  if (mantissa[static_cast<std::size_t>(keep)] >= '5') ++kept;
  if (kept == 0) return 0.0;
  const std::string text = std::to_string(kept) + "e" + std::to_string(-digits);
  double out = 0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return negative ? -out : out;
}

inline Operand round(Args a, EvalContext&) {
  Scalar x = coerce_to_number(scalar(a, 0));
  if (x.is_error()) return val(x);
  Scalar d = integer_arg(scalar(a, 1));
  if (d.is_error()) return val(d);
  const int digits = static_cast<int>(std::clamp(d.as_number(), -400.0, 400.0));
  return val(Scalar::number(round_decimal(x.as_number(), digits)));
}

inline Operand int_fn(Args a, EvalContext&) {
  Scalar x = coerce_to_number(scalar(a, 0));
  if (x.is_error()) return val(x);
  return val(Scalar::number(std::floor(x.as_number())));
}

inline Operand rand(Args, EvalContext& ctx) { return val(Scalar::number(ctx.next_random())); }

}  // namespace fn

namespace detail {

inline std::map<std::string, FunctionDescriptor, std::less<>> build_registry() {
  using M = ArgMode;
  constexpr int kVariadic = 255;
  const auto S = M::ScalarLifted;
  const auto A = M::ArrayConsuming;
  std::vector<FunctionDescriptor> all = {
      {"SUM", 1, kVariadic, {A}, fn::sum},
      {"AVERAGE", 1, kVariadic, {A}, fn::average},
      {"MIN", 1, kVariadic, {A}, [](fn::Args a, EvalContext&) { return fn::extremum(a, false); }},
      {"MAX", 1, kVariadic, {A}, [](fn::Args a, EvalContext&) { return fn::extremum(a, true); }},
      {"SMALL", 2, 2, {A, S}, [](fn::Args a, EvalContext&) { return fn::kth(a, false); }},
      {"LARGE", 2, 2, {A, S}, [](fn::Args a, EvalContext&) { return fn::kth(a, true); }},
      {"LEFT", 1, 2, {S}, [](fn::Args a, EvalContext&) { return fn::left_right(a, true); }},
      {"RIGHT", 1, 2, {S}, [](fn::Args a, EvalContext&) { return fn::left_right(a, false); }},
      {"LEN", 1, 1, {S}, fn::len},
      {"FIND", 2, 3, {S}, [](fn::Args a, EvalContext&) { return fn::find_impl(a, false); }},
      {"SEARCH", 2, 3, {S}, [](fn::Args a, EvalContext&) { return fn::find_impl(a, true); }},
      {"SUBSTITUTE", 3, 4, {S}, fn::substitute},
      {"IF", 2, 3, {S}, nullptr},
      {"AND", 1, kVariadic, {A}, nullptr},
      {"OR", 1, kVariadic, {A}, nullptr},
      {"NOT", 1, 1, {S}, fn::not_fn},
      {"ISERROR", 1, 1, {S}, fn::iserror},
      {"MATCH", 2, 3, {S, A, S}, fn::match},
      {"INDEX", 2, 3, {A, S}, fn::index},
      {"OFFSET", 3, 5, {A, S}, fn::offset},
      {"ROW", 0, 1, {A}, [](fn::Args a, EvalContext& c) { return fn::row_or_column(a, c, true); }},
      {"COLUMN", 0, 1, {A}, [](fn::Args a, EvalContext& c) { return fn::row_or_column(a, c, false); }},
      {"TRANSPOSE", 1, 1, {A}, fn::transpose},
      {"ROUND", 2, 2, {S}, fn::round},
      {"INT", 1, 1, {S}, fn::int_fn},
      {"RAND", 0, 0, {}, fn::rand, true},
  };
  std::map<std::string, FunctionDescriptor, std::less<>> out;
  for (auto& d : all) {
    auto name = d.name;
    out.emplace(std::move(name), std::move(d));
  }
  return out;
}

}  // namespace detail

/// All callable functions keyed by upper-case name.
inline const std::map<std::string, FunctionDescriptor, std::less<>>& function_registry() {
  static const auto registry = detail::build_registry();
  return registry;
}

/// Lookup by upper-case name; nullptr for unknown functions.
inline const FunctionDescriptor* find_function(std::string_view upper_name) {
  const auto& reg = function_registry();
  auto it = reg.find(upper_name);
  return it == reg.end() ? nullptr : &it->second;
}

}  // namespace sprego
