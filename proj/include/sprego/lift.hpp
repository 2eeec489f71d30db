#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sprego/value.hpp"

namespace sprego {

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape shape_of(const Value& v) {
  if (const auto* a = std::get_if<ArrayValue>(&v)) return {a->rows(), a->cols()};
  return {};
}

/// Common broadcast shape. Each axis must be 1 or agree with the largest
/// extent on that axis; otherwise nullopt.
inline std::optional<Shape> broadcast_shape(std::span<const Shape> shapes) {
  Shape out;
  for (const auto& s : shapes) {
    out.rows = std::max(out.rows, s.rows);
    out.cols = std::max(out.cols, s.cols);
  }
  for (const auto& s : shapes) {
    if (s.rows != 1 && s.rows != out.rows) return std::nullopt;
    if (s.cols != 1 && s.cols != out.cols) return std::nullopt;
  }
  return out;
}

/// Element (r, c) of `v` under broadcasting; scalars repeat everywhere.
inline const Scalar& element_at(const Value& v, std::size_t r, std::size_t c) {
  if (const auto* s = std::get_if<Scalar>(&v)) return *s;
  const auto& a = std::get<ArrayValue>(v);
  return a.at(a.rows() == 1 ? 0 : r, a.cols() == 1 ? 0 : c);
}

/// Applies a scalar function element-wise. All-scalar arguments give a
/// scalar; otherwise the result takes the broadcast shape, and a shape
/// mismatch gives a single #VALUE!.
template <typename F>
Value lift(std::span<const Value> args, F&& f) {
  bool any_array = false;
  std::vector<Shape> shapes;
  shapes.reserve(args.size());
  for (const auto& a : args) {
    any_array = any_array || std::holds_alternative<ArrayValue>(a);
    shapes.push_back(shape_of(a));
  }
  std::vector<Scalar> elems(args.size());
  if (!any_array) {
    for (std::size_t i = 0; i < args.size(); ++i) elems[i] = std::get<Scalar>(args[i]);
    return Value{f(std::span<const Scalar>(elems))};
  }
  const auto shape = broadcast_shape(shapes);
  if (!shape) return Value{Scalar::error(ErrorKind::ValueErr)};
  ArrayValue out(shape->rows, shape->cols);
  for (std::size_t r = 0; r < shape->rows; ++r)
    for (std::size_t c = 0; c < shape->cols; ++c) {
      for (std::size_t i = 0; i < args.size(); ++i) elems[i] = element_at(args[i], r, c);
      out.at(r, c) = f(std::span<const Scalar>(elems));
    }
  return Value{std::move(out)};
}

}  // namespace sprego
