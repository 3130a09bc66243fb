#pragma once

// Dense box-supported arrays on Z^d, used to propagate the law of the
// Markov-additive chain one step at a time.

#include <cstdint>
#include <vector>

#include "madd/process_model.hpp"

namespace madd::detail {

class LatticeField {
 public:
  LatticeField() = default;
  explicit LatticeField(std::size_t d) : lo_(d, 0), extent_(d, 0) {}
  LatticeField(std::vector<std::int64_t> lo, std::vector<std::int64_t> extent);

  static LatticeField delta(const LatticeVector& x, double mass);

  [[nodiscard]] std::size_t dim() const noexcept { return lo_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] const std::vector<std::int64_t>& lo() const noexcept { return lo_; }
  [[nodiscard]] const std::vector<std::int64_t>& extent() const noexcept { return extent_; }
  [[nodiscard]] std::size_t cells() const noexcept { return data_.size(); }

  [[nodiscard]] bool contains(const LatticeVector& x) const;
  [[nodiscard]] double at(const LatticeVector& x) const;
  [[nodiscard]] double total() const;

  /// Zeroes entries below `threshold`, shrinks the box to the remaining
  /// support and returns the discarded mass.
  double prune(double threshold);

  /// Calls f(coords, value) for every nonzero entry in row-major order.
  template <class F>
  void for_each_nonzero(F&& f) const {
    std::vector<std::int64_t> coord(lo_);
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
      if (data_[idx] != 0.0) f(coord, data_[idx]);
      advance(coord);
    }
  }

  /// out += this (*) mu, resizing `out` as needed.
  void convolve_into(const JumpMeasure& mu, LatticeField& out) const;

  /// Grows the box to contain [lo, lo + extent).
  void ensure_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi_exclusive);

 private:
  void advance(std::vector<std::int64_t>& coord) const;
  [[nodiscard]] std::size_t index_of(const std::vector<std::int64_t>& coord) const;

  std::vector<std::int64_t> lo_;
  std::vector<std::int64_t> extent_;
  std::vector<double> data_;
};

/// Law of (A_n, M_n) from a fixed starting state, one field per layer.
class LayeredLaw {
 public:
  LayeredLaw(const ProcessSpec& spec, int start_state, const LatticeVector& start);

  void step();
  double prune(double threshold);

  [[nodiscard]] int steps() const noexcept { return steps_; }
  [[nodiscard]] const LatticeField& layer(int j) const { return layers_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] double mass_at(const LatticeVector& x, int j) const { return layer(j).at(x); }

 private:
  const ProcessSpec* spec_;
  std::vector<LatticeField> layers_;
  int steps_ = 0;
};

}  // namespace madd::detail
