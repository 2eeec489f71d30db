#pragma once

// Random generators for the property suites. Deterministic per seed.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "sprego/ast.hpp"
#include "sprego/functions.hpp"
#include "sprego/grid.hpp"
#include "sprego/value.hpp"

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& engine() { return rng_; }

  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  const T& pick(const std::vector<T>& xs) { return xs[static_cast<std::size_t>(between(0, static_cast<int>(xs.size()) - 1))]; }

  // Mix of small integers, short decimals, extreme magnitudes and raw bit patterns.
  double finite_number() {
    switch (between(0, 4)) {
      case 0: return between(-1000, 1000);
      case 1: return between(-99999, 99999) / 100.0;
      case 2: return std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng_), between(-1060, 1020));
      case 3: {
        std::uint64_t bits = rng_();
        double d;
        std::memcpy(&d, &bits, sizeof d);
        return std::isfinite(d) ? d : 1.5;
      }
      default: return std::uniform_real_distribution<double>(-1e6, 1e6)(rng_);
    }
  }

  double nonneg_number() {
    const double d = finite_number();
    return d < 0 ? -d : d;
  }

  // Text drawn from `alphabet`, which may hold multi-byte UTF-8 pieces.
  std::string text(int max_len, const std::vector<std::string>& alphabet) {
    std::string out;
    const int n = between(0, max_len);
    for (int i = 0; i < n; ++i) out += pick(alphabet);
    return out;
  }

  std::string text(int max_len = 10) { return text(max_len, kAlphabet); }

  sprego::ErrorKind error_kind() {
    using sprego::ErrorKind;
    static const std::vector<ErrorKind> kinds = {ErrorKind::ValueErr,     ErrorKind::DivZero, ErrorKind::NumErr,
                                                 ErrorKind::NotAvailable, ErrorKind::RefErr,  ErrorKind::NameErr};
    return pick(kinds);
  }

  // Any storable cell value; errors only when `with_errors`.
  sprego::Scalar cell(bool with_errors = true) {
    using sprego::Scalar;
    switch (between(0, with_errors ? 4 : 3)) {
      case 0: return Scalar::blank();
      case 1: return Scalar::number(coin() ? between(-50, 50) : finite_number());
      case 2: return Scalar::text(text(6));
      case 3: return Scalar::boolean(coin());
      default: return Scalar::error(error_kind());
    }
  }

  sprego::CellAddress address(int max_col = 60, int max_row = 2000) { return {between(1, max_col), between(1, max_row)}; }

  inline static const std::vector<std::string> kAlphabet = {
      "a", "b", "c", "A", "B", "x", "Z", "0", "7", " ", "(", ")", ",", "\"", "-", ".", "é", "É", "ß", "Ж", "ж", "λ", "€", "日"};

 private:
  std::mt19937_64 rng_;
};

// Writes `cells` row-major into a fresh sheet starting at A1.
inline sprego::Sheet sheet_with(const std::vector<sprego::Scalar>& cells, std::size_t rows, std::size_t cols) {
  sprego::Sheet s;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      s.set({static_cast<int>(c) + 1, static_cast<int>(r) + 1}, cells[r * cols + c]);
  return s;
}

inline std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

/// Random AST in the shape the parser produces: literal numbers are
/// non-negative, unary plus never appears, omitted slots only inside calls.
class AstGen {
 public:
  // References land inside max_col x max_row.
  explicit AstGen(Gen& g, int max_col = 60, int max_row = 2000) : g_(g), max_col_(max_col), max_row_(max_row) {}

  sprego::ExprPtr expr(int depth) {
    using namespace sprego;
    if (depth <= 0 || g_.coin(0.3)) return leaf();
    switch (g_.between(0, 3)) {
      case 0: return make_unary(g_.coin() ? UnaryOp::Negate : UnaryOp::Percent, expr(depth - 1));
      case 1:
      case 2: {
        static const std::vector<BinaryOp> ops = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                                  BinaryOp::Pow, BinaryOp::Concat, BinaryOp::Eq, BinaryOp::Ne,
                                                  BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge};
        return make_binary(g_.pick(ops), expr(depth - 1), expr(depth - 1));
      }
      default: return call(depth);
    }
  }

 private:
  sprego::ExprPtr leaf() {
    using namespace sprego;
    switch (g_.between(0, 5)) {
      case 0: return make_literal(Scalar::number(g_.coin() ? g_.between(0, 100) : g_.nonneg_number()));
      case 1: return make_literal(Scalar::text(g_.text(5)));
      case 2: return make_literal(Scalar::boolean(g_.coin()));
      case 3: return make_literal(Scalar::error(g_.error_kind()));
      case 4: return make_ref(g_.address(max_col_, max_row_));
      default: {
        const CellAddress a = g_.address(max_col_, max_row_), b = g_.address(max_col_, max_row_);
        if (a == b) return make_ref(a);
        return make_range(RangeRef::normalized(a, b));
      }
    }
  }

  sprego::ExprPtr call(int depth) {
    using namespace sprego;
    static const std::vector<std::string> names = [] {
      std::vector<std::string> v;
      for (const auto& [name, _] : function_registry()) v.push_back(name);
      v.push_back("NOSUCHFN");
      return v;
    }();
    std::vector<ExprPtr> args;
    const int n = g_.between(0, 4);
    for (int i = 0; i < n; ++i) {
      // A lone empty slot reads back as a zero-argument call.
      if (n > 1 && g_.coin(0.2)) args.push_back(make_literal(Scalar::omitted()));
      else args.push_back(expr(depth - 1));
    }
    return make_call(g_.pick(names), std::move(args));
  }

  Gen& g_;
  int max_col_;
  int max_row_;
};

}  // namespace gen
