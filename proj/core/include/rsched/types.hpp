#ifndef RSCHED_TYPES_HPP
#define RSCHED_TYPES_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rsched {

/// A point on the N-simplex: non-negative entries summing to 1.
///
/// Construction validates the invariants. Sums within 1e-9 of 1 are accepted
/// as-is; sums off by up to 1e-6 are renormalized; anything worse is rejected.
class GroupWeights {
 public:
  explicit GroupWeights(std::vector<double> weights);

  static GroupWeights uniform(std::size_t n);
  /// Point mass on group `index`.
  static GroupWeights vertex(std::size_t n, std::size_t index);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& values() const { return weights_; }
  std::span<const double> span() const { return weights_; }

  bool strictly_positive() const;

  friend bool operator==(const GroupWeights&, const GroupWeights&) = default;

 private:
  std::vector<double> weights_;
};

/// Per-group loss values; entries must be finite.
class GroupLosses {
 public:
  explicit GroupLosses(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Dot product with a fixed left-to-right summation order. All weighted-loss
/// evaluations route through this so that algebraically equal objectives
/// compare bitwise equal.
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace rsched

#endif
