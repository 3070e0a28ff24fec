#ifndef RSCHED_DISTRIBUTIONS_HPP
#define RSCHED_DISTRIBUTIONS_HPP

#include <cstddef>
#include <vector>

#include "rsched/types.hpp"

namespace rsched {

/// chi2(q, p) = 1/2 sum_i p_i (q_i/p_i - 1)^2.
/// Requires strictly positive p; zero exactly when q == p entrywise.
double chi_square_divergence(const GroupWeights& q, const GroupWeights& p);

/// p_i = sizes_i^{1/tau} / sum_j sizes_j^{1/tau}. tau = 1 is size-proportional
/// sampling, tau -> infinity approaches uniform. Computed in log space so
/// large sizes and small tau do not overflow.
GroupWeights temperature_distribution(const std::vector<std::size_t>& sizes, double tau);

/// p_i = sizes_i / sum_j sizes_j (temperature_distribution at tau = 1).
GroupWeights training_distribution(const std::vector<std::size_t>& sizes);

}  // namespace rsched

#endif
