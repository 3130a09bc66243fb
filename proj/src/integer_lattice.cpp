#include "integer_lattice.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "madd/errors.hpp"

namespace madd::detail {
namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw NumericError("integer overflow in lattice reduction");
  return static_cast<std::int64_t>(v);
}

// row_a -= q * row_b
void axpy(IntVector& a, const IntVector& b, std::int64_t q) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = checked(static_cast<__int128>(a[k]) - static_cast<__int128>(q) * b[k]);
}

bool is_zero(const IntVector& v) {
  return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
}

// Determinant of a small square integer matrix by fraction-free elimination.
__int128 bareiss_det(std::vector<std::vector<__int128>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  __int128 sign = 1;
  __int128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

// Generalized cross product of d-1 vectors in Z^d.
IntVector normal_of(const std::vector<const IntVector*>& vs, std::size_t d) {
  IntVector normal(d, 0);
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<std::vector<__int128>> minor;
    minor.reserve(vs.size());
    for (const IntVector* v : vs) {
      std::vector<__int128> row;
      row.reserve(d - 1);
      for (std::size_t k = 0; k < d; ++k)
        if (k != col) row.push_back((*v)[k]);
      minor.push_back(std::move(row));
    }
    const __int128 det = bareiss_det(std::move(minor));
    normal[col] = checked(((col % 2) == 0) ? det : -det);
  }
  return normal;
}

IntVector primitive(IntVector v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  if (g > 1)
    for (auto& x : v) x /= g;
  return v;
}

}  // namespace

std::vector<IntVector> integer_echelon(std::vector<IntVector> rows, std::size_t columns) {
  std::erase_if(rows, is_zero);
  std::size_t top = 0;
  for (std::size_t col = 0; col < columns && top < rows.size(); ++col) {
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t r = top; r < rows.size(); ++r) {
        if (rows[r][col] != 0 && (best == rows.size() || std::abs(rows[r][col]) < std::abs(rows[best][col]))) best = r;
      }
      if (best == rows.size()) break;
      std::swap(rows[top], rows[best]);
      bool reduced = true;
      for (std::size_t r = top + 1; r < rows.size(); ++r) {
        if (rows[r][col] == 0) continue;
        axpy(rows[r], rows[top], rows[r][col] / rows[top][col]);
        if (rows[r][col] != 0) reduced = false;
      }
      if (reduced) {
        if (rows[top][col] < 0)
          for (auto& x : rows[top]) x = -x;
        ++top;
        break;
      }
    }
    std::erase_if(rows, is_zero);
  }
  rows.resize(std::min(rows.size(), top));
  return rows;
}

std::int64_t lattice_index(const std::vector<IntVector>& generators, std::size_t d) {
  const auto echelon = integer_echelon(generators, d);
  if (echelon.size() < d) return 0;
  __int128 index = 1;
  for (std::size_t k = 0; k < d; ++k) index *= echelon[k][k];
  return checked(index);
}

std::int64_t last_coordinate_period(const std::vector<IntVector>& generators, std::size_t d) {
  const auto echelon = integer_echelon(generators, d + 1);
  for (const auto& row : echelon) {
    bool leading_zero = true;
    for (std::size_t k = 0; k < d; ++k) leading_zero = leading_zero && row[k] == 0;
    if (leading_zero) return std::abs(row[d]);
  }
  return 0;
}

ConeResult cone_is_full(const std::vector<IntVector>& generators, std::size_t d, std::size_t max_subsets) {
  std::set<IntVector> unique;
  for (const auto& g : generators)
    if (!is_zero(g)) unique.insert(primitive(g));
  const std::vector<IntVector> dirs(unique.begin(), unique.end());
  ConeResult result;
  if (dirs.empty()) return result;
  if (d == 1) {
    const bool pos = std::any_of(dirs.begin(), dirs.end(), [](const IntVector& v) { return v[0] > 0; });
    const bool neg = std::any_of(dirs.begin(), dirs.end(), [](const IntVector& v) { return v[0] < 0; });
    result.full = pos && neg;
    return result;
  }
  if (integer_echelon(dirs, d).size() < d) return result;

  // The dual cone, when nontrivial, has an extreme ray orthogonal to d-1
  // independent generators; test each candidate normal for a one-signed
  // pairing with all generators.
  const std::size_t k = d - 1;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t visited = 0;
  while (true) {
    if (++visited > max_subsets) {
      result.truncated = true;
      break;
    }
    std::vector<const IntVector*> vs;
    for (auto i : idx) vs.push_back(&dirs[i]);
    const IntVector n = normal_of(vs, d);
    if (!is_zero(n)) {
      bool nonneg = true;
      bool nonpos = true;
      for (const auto& v : dirs) {
        __int128 dot = 0;
        for (std::size_t c = 0; c < d; ++c) dot += static_cast<__int128>(n[c]) * v[c];
        nonneg = nonneg && dot >= 0;
        nonpos = nonpos && dot <= 0;
      }
      if (nonneg || nonpos) return result;
    }
    // next combination
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == dirs.size() - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t q = pos; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
  result.full = true;
  return result;
}

}  // namespace madd::detail
