#pragma once

// Exact integer routines behind the irreducibility/aperiodicity decision.

#include <cstdint>
#include <vector>

namespace madd::detail {

using IntVector = std::vector<std::int64_t>;

/// Row echelon form of the integer lattice spanned by `rows` (all of equal
/// length), obtained with unimodular row operations only. Zero rows are
/// dropped; the pivot of each remaining row is positive.
[[nodiscard]] std::vector<IntVector> integer_echelon(std::vector<IntVector> rows, std::size_t columns);

/// Index [Z^d : L] of the lattice L spanned by `generators`; 0 when the rank
/// is below d.
[[nodiscard]] std::int64_t lattice_index(const std::vector<IntVector>& generators, std::size_t d);

/// For generators (x_1..x_d, n), returns the positive generator of
/// { n : (0, n) in L }, or 0 when that intersection is trivial.
[[nodiscard]] std::int64_t last_coordinate_period(const std::vector<IntVector>& generators, std::size_t d);

struct ConeResult {
  bool full = false;
  bool truncated = false;
};

/// Whether the convex cone generated by `generators` is all of R^d.
[[nodiscard]] ConeResult cone_is_full(const std::vector<IntVector>& generators, std::size_t d,
                                      std::size_t max_subsets = 2'000'000);

}  // namespace madd::detail
