#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "sprego/grid.hpp"
#include "sprego/value.hpp"

namespace sprego {

/// Evaluation environment. The sheet is a read-only snapshot; the RNG stream
/// is private to the context so results depend only on (snapshot, seed).
class EvalContext {
 public:
  explicit EvalContext(const Sheet& sheet, bool array_entered = true, CellAddress anchor = {1, 1},
                       std::uint64_t seed = 0)
      : sheet_(&sheet), array_entered_(array_entered), anchor_(anchor), seed_(seed), rng_(seed) {}

  const Sheet& sheet() const { return *sheet_; }
  bool array_entered() const { return array_entered_; }
  void set_array_entered(bool v) { array_entered_ = v; }
  CellAddress anchor() const { return anchor_; }
  std::uint64_t seed() const { return seed_; }

  /// Uniform draw in [0, 1) with 53 random bits.
  double next_random() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  const Sheet* sheet_;
  bool array_entered_;
  CellAddress anchor_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

/// An evaluated sub-expression. `ref` is set when the value came from a
/// reference, which OFFSET/ROW/COLUMN need and which decides whether a
/// multi-cell range may stand where a scalar is required.
struct Operand {
  Value value;
  std::optional<RangeRef> ref;

  const Scalar* scalar() const { return std::get_if<Scalar>(&value); }
  const ArrayValue* array() const { return std::get_if<ArrayValue>(&value); }
};

}  // namespace sprego
