#pragma once

#include <cstddef>
#include <vector>

namespace slowbond {

/// Binary indexed tree over nonnegative weights. Supports point assignment
/// and inverse-CDF lookup in O(log n).
class FenwickTree {
 public:
  explicit FenwickTree(std::size_t n) : values_(n, 0.0), tree_(n + 1, 0.0) {
    top_ = 1;
    while (top_ * 2 <= n) top_ *= 2;
  }

  std::size_t size() const noexcept { return values_.size(); }
  double weight(std::size_t i) const noexcept { return values_[i]; }
  double total() const noexcept { return total_; }

  void set(std::size_t i, double w) noexcept {
    const double delta = w - values_[i];
    if (delta == 0.0) return;
    values_[i] = w;
    total_ += delta;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  /// Recomputes internal sums from the stored weights, discarding roundoff
  /// accumulated by repeated updates.
  void rebuild() noexcept {
    const std::size_t n = values_.size();
    total_ = 0;
    for (std::size_t k = 1; k <= n; ++k) tree_[k] = values_[k - 1];
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t parent = k + (k & (~k + 1));
      if (parent <= n) tree_[parent] += tree_[k];
      total_ += values_[k - 1];
    }
  }

  /// Index i with prefix(i) <= target < prefix(i+1), for 0 <= target < total.
  std::size_t find(double target) const noexcept {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return pos < values_.size() ? pos : values_.size() - 1;
  }

 private:
  std::vector<double> values_;
  std::vector<double> tree_;
  std::size_t top_ = 1;
  double total_ = 0;
};

}  // namespace slowbond
