#ifndef RSCHED_UNCERTAINTY_HPP
#define RSCHED_UNCERTAINTY_HPP

#include <optional>
#include <variant>

#include "rsched/types.hpp"

namespace rsched {

/// U = {center}: the adversary has no freedom; reduces to a fixed weighting.
struct Singleton {
  explicit Singleton(GroupWeights c) : center(std::move(c)) {}
  GroupWeights center;
};

/// U = the whole simplex: the worst single group carries all the mass.
struct FullSimplex {};

/// U = {q : max_i q_i / center_i <= 1/alpha}. The robust loss averages the
/// largest alpha-fraction of group losses.
struct CVaR {
  CVaR(double alpha, GroupWeights center);
  double alpha;
  GroupWeights center;
};

/// U = {q : chi2(q, center) <= rho} with chi2(q,p) = 1/2 sum p_i (q_i/p_i - 1)^2.
struct ChiSquareBall {
  ChiSquareBall(double rho, GroupWeights center);
  double rho;
  GroupWeights center;
};

using UncertaintySet = std::variant<Singleton, FullSimplex, CVaR, ChiSquareBall>;

/// Group count the set is bound to; empty for FullSimplex (any N fits).
std::optional<std::size_t> group_count(const UncertaintySet& set);

/// Membership test with additive slack on the divergence / ratio constraint.
bool contains(const UncertaintySet& set, const GroupWeights& q, double slack = 1e-6);

}  // namespace rsched

#endif
