#pragma once

#include <cmath>
#include <vector>

#include "sprego/ast.hpp"
#include "sprego/context.hpp"
#include "sprego/functions.hpp"
#include "sprego/lift.hpp"

namespace sprego {

namespace detail {

inline Scalar arithmetic(BinaryOp op, const Scalar& a, const Scalar& b) {
  if (a.is_error()) return a;
  if (b.is_error()) return b;
  const Scalar x = coerce_to_number(a);
  if (x.is_error()) return x;
  const Scalar y = coerce_to_number(b);
  if (y.is_error()) return y;
  const double l = x.as_number(), r = y.as_number();
  switch (op) {
    case BinaryOp::Add: return Scalar::number(l + r);
    case BinaryOp::Sub: return Scalar::number(l - r);
    case BinaryOp::Mul: return Scalar::number(l * r);
    case BinaryOp::Div:
      if (r == 0.0) return Scalar::error(ErrorKind::DivZero);
      return Scalar::number(l / r);
    case BinaryOp::Pow:
      if (l == 0.0 && r == 0.0) return Scalar::error(ErrorKind::NumErr);
      if (l == 0.0 && r < 0.0) return Scalar::error(ErrorKind::DivZero);
      return Scalar::number(std::pow(l, r));  // NaN/inf become #NUM!
    default: return Scalar::error(ErrorKind::ValueErr);
  }
}

inline Scalar apply_binary(BinaryOp op, const Scalar& a, const Scalar& b) {
  switch (op) {
    case BinaryOp::Concat: {
      const Scalar x = coerce_to_text(a);
      if (x.is_error()) return x;
      const Scalar y = coerce_to_text(b);
      if (y.is_error()) return y;
      return Scalar::text(x.as_text() + y.as_text());
    }
    case BinaryOp::Eq: return compare(a, b, CompareOp::Eq);
    case BinaryOp::Ne: return compare(a, b, CompareOp::Ne);
    case BinaryOp::Lt: return compare(a, b, CompareOp::Lt);
    case BinaryOp::Le: return compare(a, b, CompareOp::Le);
    case BinaryOp::Gt: return compare(a, b, CompareOp::Gt);
    case BinaryOp::Ge: return compare(a, b, CompareOp::Ge);
    default: return arithmetic(op, a, b);
  }
}

inline Scalar apply_unary(UnaryOp op, const Scalar& a) {
  const Scalar x = coerce_to_number(a);
  if (x.is_error()) return x;
  return Scalar::number(op == UnaryOp::Negate ? -x.as_number() : x.as_number() / 100.0);
}

class Evaluator {
 public:
  explicit Evaluator(EvalContext& ctx) : ctx_(ctx) {}

  Operand eval(const Expr& e) {
    return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
  }

  /// Value for a position that needs scalars. Outside array entry a
  /// multi-cell reference there is #VALUE! (no implicit intersection).
  Value scalar_position(Operand op) const {
    if (!ctx_.array_entered() && op.array() && op.ref && !op.ref->is_single_cell())
      return Scalar::error(ErrorKind::ValueErr);
    return std::move(op.value);
  }

  Operand eval_if(const Call& call) {
    const Value cond = scalar_position(eval(*call.args[0]));
    const ExprPtr& then_slot = call.args[1];
    const ExprPtr* else_slot = call.args.size() > 2 ? &call.args[2] : nullptr;

    // Selected slot value: an empty slot is 0, a missing else is FALSE,
    // and a blank cell reads as 0.
    auto branch = [&](const ExprPtr* slot) -> Value {
      if (!slot) return Scalar::boolean(false);
      if (is_omitted_literal(*slot)) return Scalar::number(0);
      return scalar_position(eval(**slot));
    };
    auto settle = [](Scalar v) { return v.is_blank() ? Scalar::number(0) : v; };

    if (const auto* c = std::get_if<Scalar>(&cond)) {
      const Scalar t = fn::truth(*c);
      if (t.is_error()) return fn::val(t);
      Value chosen = branch(t.as_boolean() ? &then_slot : else_slot);
      if (auto* s = std::get_if<Scalar>(&chosen)) return fn::val(settle(*s));
      auto& arr = std::get<ArrayValue>(chosen);
      for (std::size_t i = 0; i < arr.rows(); ++i)
        for (std::size_t j = 0; j < arr.cols(); ++j) arr.at(i, j) = settle(arr.at(i, j));
      return Operand{std::move(chosen), std::nullopt};
    }

    // Array condition: only branches selected by some element are evaluated.
    const auto& carr = std::get<ArrayValue>(cond);
    bool need_then = false, need_else = false;
    for (const auto& v : carr.cells()) {
      const Scalar t = fn::truth(v);
      if (t.is_error()) continue;
      (t.as_boolean() ? need_then : need_else) = true;
    }
    std::optional<Value> then_v, else_v;
    std::vector<Shape> shapes{shape_of(cond)};
    if (need_then) shapes.push_back(shape_of(*(then_v = branch(&then_slot))));
    if (need_else) shapes.push_back(shape_of(*(else_v = branch(else_slot))));
    const auto shape = broadcast_shape(shapes);
    if (!shape) return fn::err(ErrorKind::ValueErr);

    ArrayValue out(shape->rows, shape->cols);
    for (std::size_t r = 0; r < shape->rows; ++r)
      for (std::size_t c = 0; c < shape->cols; ++c) {
        const Scalar t = fn::truth(element_at(cond, r, c));
        if (t.is_error()) out.at(r, c) = t;
        else out.at(r, c) = settle(element_at(t.as_boolean() ? *then_v : *else_v, r, c));
      }
    return Operand{Value{std::move(out)}, std::nullopt};
  }

  Operand eval_logical(const Call& call, bool is_and) {
    fn::LogicalAccumulator acc(is_and);
    for (const auto& arg : call.args) {
      if (is_omitted_literal(arg)) continue;
      acc.add(eval(*arg));
      if (acc.decided()) break;
    }
    return fn::val(acc.result());
  }

 private:
  Operand eval_node(const Literal& n) { return fn::val(n.value); }

  Operand eval_node(const Ref& n) {
    return Operand{Value{ctx_.sheet().get(n.address)}, RangeRef::single(n.address)};
  }

  Operand eval_node(const RangeLit& n) { return Operand{Value{get_range(ctx_.sheet(), n.range)}, n.range}; }

  Operand eval_node(const Unary& n) {
    const Value v = scalar_position(eval(*n.operand));
    return Operand{lift(std::span<const Value>(&v, 1), [&](std::span<const Scalar> s) { return apply_unary(n.op, s[0]); }),
                   std::nullopt};
  }

  Operand eval_node(const Binary& n) {
    const Value both[2] = {scalar_position(eval(*n.lhs)), scalar_position(eval(*n.rhs))};
    return Operand{lift(std::span<const Value>(both), [&](std::span<const Scalar> s) { return apply_binary(n.op, s[0], s[1]); }),
                   std::nullopt};
  }

  Operand eval_node(const Call& n) {
    const FunctionDescriptor* fd = find_function(n.name);
    if (!fd) return fn::err(ErrorKind::NameErr);
    const auto argc = static_cast<int>(n.args.size());
    if (argc < fd->min_arity || argc > fd->max_arity) return fn::err(ErrorKind::ValueErr);
    if (n.name == "IF") return eval_if(n);
    if (n.name == "AND" || n.name == "OR") return eval_logical(n, n.name == "AND");

    std::vector<Operand> args;
    args.reserve(n.args.size());
    std::vector<std::size_t> lifted;
    std::vector<Shape> shapes;
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      Operand op = eval(*n.args[i]);
      if (fd->mode(i) == ArgMode::ScalarLifted) {
        op = Operand{scalar_position(std::move(op)), std::nullopt};
        if (op.array()) {
          lifted.push_back(i);
          shapes.push_back(shape_of(op.value));
        }
      }
      args.push_back(std::move(op));
    }
    if (lifted.empty()) return fd->impl(args, ctx_);

    const auto shape = broadcast_shape(shapes);
    if (!shape) return fn::err(ErrorKind::ValueErr);
    std::vector<Operand> element_args = args;
    ArrayValue out(shape->rows, shape->cols);
    for (std::size_t r = 0; r < shape->rows; ++r)
      for (std::size_t c = 0; c < shape->cols; ++c) {
        for (std::size_t i : lifted) element_args[i] = fn::val(element_at(args[i].value, r, c));
        out.at(r, c) = display_value(fd->impl(element_args, ctx_).value);
      }
    return Operand{Value{std::move(out)}, std::nullopt};
  }

  EvalContext& ctx_;
};

}  // namespace detail

/// Evaluates `e` against the context's snapshot. Array entry is taken from the context.
/// A bare multi-cell reference outside array entry is #VALUE!.
inline Value evaluate(const Expr& e, EvalContext& ctx) {
  detail::Evaluator ev(ctx);
  return ev.scalar_position(ev.eval(e));
}

inline Value evaluate(const ExprPtr& e, EvalContext& ctx) { return evaluate(*e, ctx); }

/// IF with per-element slot selection. A null `else_slot` is the two-argument form.
inline Value eval_if(const ExprPtr& cond, const ExprPtr& then_slot, const ExprPtr& else_slot, EvalContext& ctx) {
  Call call{"IF", {cond, then_slot}};
  if (else_slot) call.args.push_back(else_slot);
  return detail::Evaluator(ctx).eval_if(call).value;
}

}  // namespace sprego
