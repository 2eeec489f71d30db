#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sprego/grid.hpp"
#include "sprego/value.hpp"

namespace sprego {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnaryOp { Negate, Percent };

enum class BinaryOp { Add, Sub, Mul, Div, Pow, Concat, Eq, Ne, Lt, Le, Gt, Ge };

struct Literal {
  Scalar value;
};

struct Ref {
  CellAddress address;
};

struct RangeLit {
  RangeRef range;
};

struct Unary {
  UnaryOp op;
  ExprPtr operand;
};

struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

/// Function call. `name` is upper-cased; an empty argument slot is a
/// Literal holding Omitted, so IF(a,,) carries three arguments.
struct Call {
  std::string name;
  std::vector<ExprPtr> args;
};

/// Immutable formula tree node. Subtrees are shared, never mutated.
struct Expr {
  std::variant<Literal, Ref, RangeLit, Unary, Binary, Call> node;

  bool is_leaf() const {
    return std::holds_alternative<Literal>(node) || std::holds_alternative<Ref>(node) ||
           std::holds_alternative<RangeLit>(node);
  }
};

inline ExprPtr make_literal(Scalar v) { return std::make_shared<const Expr>(Expr{Literal{std::move(v)}}); }
inline ExprPtr make_ref(CellAddress a) { return std::make_shared<const Expr>(Expr{Ref{a}}); }
inline ExprPtr make_range(RangeRef r) { return std::make_shared<const Expr>(Expr{RangeLit{r}}); }
inline ExprPtr make_unary(UnaryOp op, ExprPtr e) { return std::make_shared<const Expr>(Expr{Unary{op, std::move(e)}}); }
inline ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(l), std::move(r)}});
}
inline ExprPtr make_call(std::string name, std::vector<ExprPtr> args) {
  return std::make_shared<const Expr>(Expr{Call{std::move(name), std::move(args)}});
}

/// Deep structural equality.
inline bool equal(const Expr& a, const Expr& b);

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

inline bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Ref>) return x.address == y.address;
        else if constexpr (std::is_same_v<T, RangeLit>) return x.range == y.range;
        else if constexpr (std::is_same_v<T, Unary>) return x.op == y.op && equal(x.operand, y.operand);
        else if constexpr (std::is_same_v<T, Binary>)
          return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
        else {
          if (x.name != y.name || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!equal(x.args[i], y.args[i])) return false;
          return true;
        }
      },
      a.node);
}

inline bool is_omitted_literal(const ExprPtr& e) {
  const auto* lit = std::get_if<Literal>(&e->node);
  return lit && lit->value.is_omitted();
}

}  // namespace sprego
