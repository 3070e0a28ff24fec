#include "rsched/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsched/uncertainty.hpp"

namespace rsched {

double chi_square_divergence(const GroupWeights& q, const GroupWeights& p) {
  if (q.size() != p.size()) {
    throw std::invalid_argument("chi_square_divergence: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (p[i] <= 0.0) {
      throw std::invalid_argument("chi_square_divergence: reference entry p_" +
                                  std::to_string(i) + " must be > 0");
    }
    const double r = q[i] / p[i] - 1.0;
    acc += p[i] * r * r;
  }
  return 0.5 * acc;
}

GroupWeights temperature_distribution(const std::vector<std::size_t>& sizes, double tau) {
  if (sizes.empty()) {
    throw std::invalid_argument("temperature_distribution: no groups");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("temperature_distribution: tau must be > 0");
  }
  std::vector<double> logits(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) {
      throw std::invalid_argument("temperature_distribution: size of group " +
                                  std::to_string(i) + " must be > 0");
    }
    logits[i] = std::log(static_cast<double>(sizes[i])) / tau;
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - m);
    z += l;
  }
  for (double& l : logits) l /= z;
  return GroupWeights(std::move(logits));
}

GroupWeights training_distribution(const std::vector<std::size_t>& sizes) {
  return temperature_distribution(sizes, 1.0);
}

CVaR::CVaR(double a, GroupWeights c) : alpha(a), center(std::move(c)) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("CVaR: alpha must lie in (0, 1]");
  }
}

ChiSquareBall::ChiSquareBall(double r, GroupWeights c) : rho(r), center(std::move(c)) {
  if (!(rho > 0.0)) {
    throw std::invalid_argument("ChiSquareBall: rho must be > 0");
  }
  if (!center.strictly_positive()) {
    throw std::invalid_argument("ChiSquareBall: center entries must be strictly > 0");
  }
}

std::optional<std::size_t> group_count(const UncertaintySet& set) {
  if (const auto* s = std::get_if<Singleton>(&set)) return s->center.size();
  if (const auto* c = std::get_if<CVaR>(&set)) return c->center.size();
  if (const auto* x = std::get_if<ChiSquareBall>(&set)) return x->center.size();
  return std::nullopt;
}

bool contains(const UncertaintySet& set, const GroupWeights& q, double slack) {
  if (auto n = group_count(set); n && *n != q.size()) return false;
  if (const auto* s = std::get_if<Singleton>(&set)) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (std::abs(q[i] - s->center[i]) > slack) return false;
    }
    return true;
  }
  if (std::holds_alternative<FullSimplex>(set)) return true;
  if (const auto* c = std::get_if<CVaR>(&set)) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (c->center[i] <= 0.0) {
        if (q[i] > slack) return false;
      } else if (q[i] / c->center[i] > 1.0 / c->alpha + slack) {
        return false;
      }
    }
    return true;
  }
  const auto& ball = std::get<ChiSquareBall>(set);
  return chi_square_divergence(q, ball.center) <= ball.rho + slack;
}

}  // namespace rsched
