#pragma once

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sprego/evaluator.hpp"
#include "sprego/parser.hpp"

namespace sprego {

/// One debugging column: a sub-expression and its per-row results.
struct TraceStep {
  std::string label;
  ExprPtr expr;
  std::string text;
  ArrayValue results{1, 1};
};

struct TraceTable {
  std::string input_header;
  ArrayValue input{1, 1};
  std::vector<TraceStep> steps;
};

namespace detail {

inline void decompose_into(const ExprPtr& e, std::vector<ExprPtr>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Unary>) {
          decompose_into(n.operand, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          decompose_into(n.lhs, out);
          decompose_into(n.rhs, out);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args) decompose_into(a, out);
        }
      },
      e->node);
  if (e->is_leaf()) return;
  for (const auto& seen : out)
    if (equal(seen, e)) return;
  out.push_back(e);
}

inline const RangeLit* first_range(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> const RangeLit* {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, RangeLit>) return &n;
        else if constexpr (std::is_same_v<T, Unary>) return first_range(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) {
          if (auto* r = first_range(*n.lhs)) return r;
          return first_range(*n.rhs);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args)
            if (auto* r = first_range(*a)) return r;
          return nullptr;
        } else {
          return nullptr;
        }
      },
      e.node);
}

// First column of `v` fitted to `rows`; scalars and single rows repeat, missing rows are #N/A.
inline ArrayValue fit_rows(const Value& v, std::size_t rows) {
  ArrayValue out(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    if (const auto* s = std::get_if<Scalar>(&v)) {
      out.at(r, 0) = *s;
      continue;
    }
    const auto& a = std::get<ArrayValue>(v);
    if (a.rows() == 1) out.at(r, 0) = a.at(0, 0);
    else if (r < a.rows()) out.at(r, 0) = a.at(r, 0);
    else out.at(r, 0) = Scalar::error(ErrorKind::NotAvailable);
  }
  return out;
}

}  // namespace detail

/// Distinct non-leaf sub-expressions in post-order; structurally equal
/// subtrees appear once, at their first occurrence.
inline std::vector<ExprPtr> decompose(const ExprPtr& e) {
  std::vector<ExprPtr> out;
  detail::decompose_into(e, out);
  return out;
}

struct TraceOptions {
  std::optional<RangeRef> input;  // defaults to the first range in the formula
  int first_label = 1;
};

/// Evaluates every decomposition step over the snapshot, array-entered.
/// A formula with no operators traces as one step: itself.
inline TraceTable trace(const ExprPtr& formula, EvalContext& ctx, const TraceOptions& opt = {}) {
  TraceTable table;
  std::optional<RangeRef> input = opt.input;
  if (!input) {
    if (const auto* r = detail::first_range(*formula)) input = r->range;
  }
  std::size_t rows = 1;
  if (input) {
    const RangeRef col{input->top_left, {input->top_left.column, input->bottom_right.row}};
    table.input = get_range(ctx.sheet(), col);
    rows = col.rows();
    const CellAddress above{input->top_left.column, input->top_left.row - 1};
    const Scalar header = above.row >= 1 ? ctx.sheet().get(above) : Scalar::blank();
    table.input_header = header.is_blank() ? to_string(*input) : render(header);
  }

  auto steps = decompose(formula);
  if (steps.empty()) steps.push_back(formula);

  const bool was_array = ctx.array_entered();
  ctx.set_array_entered(true);
  int label = opt.first_label;
  for (const auto& step : steps) {
    TraceStep ts;
    ts.label = "S" + std::to_string(label++);
    ts.expr = step;
    ts.text = unparse(step);
    ts.results = detail::fit_rows(evaluate(step, ctx), rows);
    table.steps.push_back(std::move(ts));
  }
  ctx.set_array_entered(was_array);
  return table;
}

inline TraceTable trace(const FormulaSource& src, EvalContext& ctx, const TraceOptions& opt = {}) {
  return trace(parse_formula(src).expr, ctx, opt);
}

/// Header row of labels, then one row per input row. LF line endings.
inline void write_tsv(const TraceTable& t, std::ostream& out) {
  out << t.input_header;
  for (const auto& s : t.steps) out << '\t' << s.label;
  out << '\n';
  for (std::size_t r = 0; r < t.input.rows(); ++r) {
    out << render(t.input.at(r, 0));
    for (const auto& s : t.steps) out << '\t' << render(s.results.at(r, 0));
    out << '\n';
  }
}

inline std::string to_tsv(const TraceTable& t) {
  std::ostringstream os;
  write_tsv(t, os);
  return os.str();
}

}  // namespace sprego
