#include "rsched/types.hpp"

#include <cmath>
#include <stdexcept>

namespace rsched {

namespace {
constexpr double kSumTolerance = 1e-9;
constexpr double kRenormTolerance = 1e-6;
}  // namespace

GroupWeights::GroupWeights(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("GroupWeights: empty weight vector");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("GroupWeights: entries must be finite and >= 0");
    }
    sum += w;
  }
  const double drift = std::abs(sum - 1.0);
  if (drift <= kSumTolerance) {
    return;
  }
  if (drift <= kRenormTolerance) {
    for (double& w : weights_) w /= sum;
    return;
  }
  throw std::invalid_argument("GroupWeights: entries sum to " + std::to_string(sum) +
                              ", expected 1 within 1e-6");
}

GroupWeights GroupWeights::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("GroupWeights::uniform: n must be >= 1");
  return GroupWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

GroupWeights GroupWeights::vertex(std::size_t n, std::size_t index) {
  if (index >= n) throw std::invalid_argument("GroupWeights::vertex: index out of range");
  std::vector<double> w(n, 0.0);
  w[index] = 1.0;
  return GroupWeights(std::move(w));
}

bool GroupWeights::strictly_positive() const {
  for (double w : weights_) {
    if (w <= 0.0) return false;
  }
  return true;
}

GroupLosses::GroupLosses(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("GroupLosses: empty loss vector");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("GroupLosses: entries must be finite");
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace rsched
