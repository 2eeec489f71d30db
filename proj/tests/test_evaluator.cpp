#include <gtest/gtest.h>

#include "sprego/evaluator.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace sprego;
using props::eval;
using props::eval_scalar;

namespace {

Scalar num(double d) { return Scalar::number(d); }
Scalar err(ErrorKind e) { return Scalar::error(e); }

ArrayValue column_of(const Value& v) { return std::get<ArrayValue>(v); }

}  // namespace

TEST(Arithmetic, Basics) {
  const Sheet s;
  EXPECT_EQ(eval_scalar(s, "=1+2*3"), num(7));
  EXPECT_EQ(eval_scalar(s, "=2^10"), num(1024));
  EXPECT_EQ(eval_scalar(s, "=-2^2"), num(4));
  EXPECT_EQ(eval_scalar(s, "=50%"), num(0.5));
  EXPECT_EQ(eval_scalar(s, "=\"14\"*1"), num(14));
  EXPECT_EQ(eval_scalar(s, "=\"1.1k\"*1"), err(ErrorKind::ValueErr));
  EXPECT_EQ(eval_scalar(s, "=TRUE+1"), num(2));
  EXPECT_EQ(eval_scalar(s, "=A1+1"), num(1));
  EXPECT_EQ(eval_scalar(s, "=1&2"), Scalar::text("12"));
  EXPECT_EQ(eval_scalar(s, "=1/4&\"\""), Scalar::text("0.25"));
}

TEST(Arithmetic, Errors) {
  const Sheet s;
  EXPECT_EQ(eval_scalar(s, "=1/0"), err(ErrorKind::DivZero));
  EXPECT_EQ(eval_scalar(s, "=0^0"), err(ErrorKind::NumErr));
  EXPECT_EQ(eval_scalar(s, "=0^-1"), err(ErrorKind::DivZero));
  EXPECT_EQ(eval_scalar(s, "=(-8)^0.5"), err(ErrorKind::NumErr));
  EXPECT_EQ(eval_scalar(s, "=1e308*10"), err(ErrorKind::NumErr));
  EXPECT_EQ(eval_scalar(s, "=#N/A+1/0"), err(ErrorKind::NotAvailable));
  EXPECT_EQ(eval_scalar(s, "=NOPE(1)"), err(ErrorKind::NameErr));
  EXPECT_EQ(eval_scalar(s, "=LEN()"), err(ErrorKind::ValueErr));
  EXPECT_EQ(eval_scalar(s, "=LEN(1,2)"), err(ErrorKind::ValueErr));
}

TEST(Lifting, ColumnTimesScalar) {
  Sheet s;
  for (int r = 1; r <= 3; ++r) s.set({1, r}, num(r));
  const auto a = column_of(eval(s, "{=A1:A3*10}"));
  EXPECT_EQ(a, ArrayValue::column({num(10), num(20), num(30)}));
}

TEST(Lifting, MismatchedShapesGiveOneValueError) {
  Sheet s;
  EXPECT_EQ(eval(s, "{=A1:A3+A1:A4}"), Value{err(ErrorKind::ValueErr)});
  EXPECT_EQ(eval(s, "{=A1:B3+A1:C3}"), Value{err(ErrorKind::ValueErr)});
  // A row and a column broadcast to a grid.
  const auto grid = column_of(eval(s, "{=A1:A3+A1:C1}"));
  EXPECT_EQ(grid.rows(), 3u);
  EXPECT_EQ(grid.cols(), 3u);
}

TEST(Lifting, NoImplicitIntersectionOutsideArrayEntry) {
  Sheet s;
  s.set({1, 1}, num(5));
  s.set({1, 2}, num(6));
  EXPECT_EQ(eval(s, "=A1:A2*2"), Value{err(ErrorKind::ValueErr)});
  EXPECT_EQ(eval(s, "=A1*2"), Value{num(10)});
  // Aggregates still take the whole range.
  EXPECT_EQ(eval(s, "=SUM(A1:A2)"), Value{num(11)});
  EXPECT_EQ(eval(s, "=A1:A2"), Value{err(ErrorKind::ValueErr)});
  const auto a = eval(s, "{=A1:A2}");
  EXPECT_EQ(column_of(a).rows(), 2u);
}

TEST(Lifting, ElementErrorsStayLocal) {
  Sheet s;
  s.set({1, 1}, num(2));
  s.set({1, 2}, num(0));
  s.set({1, 3}, Scalar::text("x"));
  const auto a = column_of(eval(s, "{=1/A1:A3}"));
  EXPECT_EQ(a, ArrayValue::column({num(0.5), err(ErrorKind::DivZero), err(ErrorKind::ValueErr)}));
}

TEST(If, ExamplesFromTheViewsTask) {
  const Sheet s;
  EXPECT_EQ(eval_scalar(s, "=IF(ISERROR(FIND(\"k\",\"680\")),,)"), num(0));
  EXPECT_EQ(eval_scalar(s, "=IF(FALSE,1)"), Scalar::boolean(false));
  EXPECT_EQ(eval_scalar(s, "=IF(TRUE,1)"), num(1));
  EXPECT_EQ(eval_scalar(s, "=IF(TRUE,A1)"), num(0));
  EXPECT_EQ(eval_scalar(s, "=IF(2,\"y\",\"n\")"), Scalar::text("y"));
  EXPECT_EQ(eval_scalar(s, "=IF(0,\"y\",\"n\")"), Scalar::text("n"));
  EXPECT_EQ(eval_scalar(s, "=IF(\"x\",1,2)"), err(ErrorKind::ValueErr));
  EXPECT_EQ(eval_scalar(s, "=IF(#N/A,1,2)"), err(ErrorKind::NotAvailable));
}

TEST(If, UnselectedBranchIsNotEvaluated) {
  Sheet s;
  s.set({1, 1}, Scalar::text("12 Views"));
  s.set({1, 2}, Scalar::text("1.1k Views"));
  const auto a = column_of(eval(
      s, "{=IF(ISERROR(FIND(\"k\",A1:A2)),LEFT(A1:A2,FIND(\"V\",A1:A2)-2)*1,LEFT(A1:A2,FIND(\"V\",A1:A2)-3)*1000)}"));
  EXPECT_EQ(a.at(0, 0), num(12));
  EXPECT_EQ(a.at(1, 0), num(1100));
  // Scalar guard: the erroring branch is never reached.
  EXPECT_EQ(eval_scalar(s, "=IF(TRUE,1,1/0)"), num(1));
}

TEST(If, ArrayConditionWithScalarBranches) {
  Sheet s;
  s.set({1, 1}, Scalar::boolean(true));
  s.set({1, 2}, Scalar::boolean(false));
  EXPECT_EQ(column_of(eval(s, "{=IF(A1:A2,1)}")), ArrayValue::column({num(1), Scalar::boolean(false)}));
  EXPECT_EQ(column_of(eval(s, "{=IF(A1:A2,\"a\",\"b\")}")), ArrayValue::column({Scalar::text("a"), Scalar::text("b")}));
}

TEST(If, PublicHelper) {
  const Sheet s;
  EvalContext ctx(s);
  EXPECT_EQ(eval_if(make_literal(Scalar::boolean(false)), make_literal(num(1)), nullptr, ctx), Value{Scalar::boolean(false)});
  EXPECT_EQ(eval_if(make_literal(Scalar::boolean(false)), make_literal(num(1)), make_literal(Scalar::omitted()), ctx),
            Value{num(0)});
}

TEST(Logical, ShortCircuitAndErrors) {
  const Sheet s;
  EXPECT_EQ(eval_scalar(s, "=AND(FALSE,1/0)"), Scalar::boolean(false));
  EXPECT_EQ(eval_scalar(s, "=OR(TRUE,1/0)"), Scalar::boolean(true));
  EXPECT_EQ(eval_scalar(s, "=AND(TRUE,1/0)"), err(ErrorKind::DivZero));
  EXPECT_EQ(eval_scalar(s, "=AND(A1:A3)"), err(ErrorKind::ValueErr));
  EXPECT_EQ(eval_scalar(s, "=OR(0,2)"), Scalar::boolean(true));
}

TEST(Display, FirstComponentOfArrays) {
  const auto sheet = oracle::load_sample();
  EXPECT_EQ(eval_scalar(sheet, "{=LEFT(C2:C15,FIND(\"(\",C2:C15)-2)}"), Scalar::text("ReisenII"));
}

TEST(Reduction, TaskFiveOnTheSample) {
  auto sheet = oracle::load_sample();
  const auto views = oracle::all_views();
  for (std::size_t i = 0; i < views.size(); ++i) sheet.set({9, static_cast<int>(i) + 2}, num(views[i]));
  for (double threshold : {0.0, 100.0, 500.0, 1100.0, 1600.0, 2500.0}) {
    sheet.set({8, 1003}, num(threshold));
    EXPECT_EQ(eval_scalar(sheet, "{=SUM(IF(I2:I15>H1003,1))}"), num(oracle::count_greater(views, threshold)))
        << "threshold " << threshold;
  }
}

TEST(Reduction, TaskSixOnTheSample) {
  auto sheet = oracle::load_sample();
  for (std::size_t i = 0; i < oracle::kRows; ++i) {
    sheet.set({7, static_cast<int>(i) + 2}, Scalar::text(oracle::server(oracle::kAccounts[i])));
    sheet.set({8, static_cast<int>(i) + 2}, num(oracle::comments(oracle::kComments[i])));
  }
  sheet.set({7, 1004}, Scalar::text("euw"));
  const auto avg = eval_scalar(sheet, "{=AVERAGE(IF(G2:G15=G1004,H2:H15))}");
  ASSERT_TRUE(avg.is_number());
  EXPECT_TRUE(oracle::close(avg.as_number(), 293.0 / 12));
  EXPECT_EQ(eval_scalar(sheet, "{=MAX(IF(G2:G15=G1004,H2:H15))}"), num(125));
  sheet.set({7, 1004}, Scalar::text("EUWE"));
  EXPECT_EQ(eval_scalar(sheet, "{=AVERAGE(IF(G2:G15=G1004,H2:H15))}"), err(ErrorKind::DivZero));
  EXPECT_EQ(eval_scalar(sheet, "{=MAX(IF(G2:G15=G1004,H2:H15))}"), num(0));
}

TEST(EvaluatorProperties, LiftingEquivalence) {
  const auto r = props::lifting_equivalence(41, 2000);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(EvaluatorProperties, BroadcastSymmetry) {
  gen::Gen g(42);
  static const std::vector<std::string> ops = {"+", "-", "*", "/", "&", "=", "<", ">="};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t rows = static_cast<std::size_t>(g.between(2, 7));
    Sheet s;
    const Scalar k = g.cell();
    s.set({2, 1}, k);
    for (std::size_t r = 0; r < rows; ++r) {
      s.set({1, static_cast<int>(r) + 1}, g.cell());
      s.set({3, static_cast<int>(r) + 1}, k);
    }
    const std::string op = g.pick(ops);
    const std::string col = "A1:A" + std::to_string(rows), expanded = "C1:C" + std::to_string(rows);
    ASSERT_EQ(eval(s, "{=" + col + op + "B1}"), eval(s, "{=" + col + op + expanded + "}")) << op;
    ASSERT_EQ(eval(s, "{=B1" + op + col + "}"), eval(s, "{=" + expanded + op + col + "}")) << op;
  }
}

TEST(EvaluatorProperties, ErrorLocality) {
  gen::Gen g(43);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t rows = static_cast<std::size_t>(g.between(2, 8));
    Sheet s;
    std::vector<Scalar> cells;
    for (std::size_t r = 0; r < rows; ++r) {
      cells.push_back(g.coin(0.3) ? Scalar::error(g.error_kind()) : num(g.between(-9, 9)));
      s.set({1, static_cast<int>(r) + 1}, cells.back());
    }
    const auto a = column_of(eval(s, "{=A1:A" + std::to_string(rows) + "*2+1}"));
    for (std::size_t r = 0; r < rows; ++r) {
      if (cells[r].is_error()) ASSERT_EQ(a.at(r, 0), cells[r]);
      else ASSERT_EQ(a.at(r, 0), num(cells[r].as_number() * 2 + 1));
    }
  }
}

TEST(EvaluatorProperties, PurityAndDeterminism) {
  gen::Gen g(44);
  gen::AstGen ast(g, 8, 30);
  for (int i = 0; i < 1000; ++i) {
    Sheet s;
    for (int k = 0; k < 20; ++k) s.set(g.address(8, 30), g.cell());
    const Sheet before = s;
    const auto e = ast.expr(4);
    const std::uint64_t seed = g.engine()();
    EvalContext c1(s, g.coin(), {1, 1}, seed), c2(s, c1.array_entered(), {1, 1}, seed);
    const auto v1 = evaluate(e, c1);
    const auto v2 = evaluate(e, c2);
    ASSERT_EQ(v1, v2) << unparse(e);
    ASSERT_EQ(s.cells(), before.cells());
  }
}

TEST(EvaluatorProperties, SumOfIfCountsTrueConditions) {
  gen::Gen g(45);
  for (int i = 0; i < 1000; ++i) {
    const int rows = g.between(1, 40);
    Sheet s;
    int trues = 0;
    for (int r = 1; r <= rows; ++r) {
      const bool b = g.coin();
      trues += b;
      s.set({1, r}, Scalar::boolean(b));
    }
    ASSERT_EQ(eval_scalar(s, "{=SUM(IF(A1:A" + std::to_string(rows) + ",1))}"), num(trues));
  }
}
