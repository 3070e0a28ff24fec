#ifndef RSCHED_SOLVERS_HPP
#define RSCHED_SOLVERS_HPP

#include <vector>

#include "rsched/types.hpp"
#include "rsched/uncertainty.hpp"

namespace rsched {

/// Bisection controls shared by the dual solvers.
struct SolverConfig {
  double dual_tolerance = 1e-10;  // stopping width of a dual bracket
  int max_iterations = 200;       // halvings per bisection

  void validate() const;
};

/// Exact maximizer of q^T v over an uncertainty set.
struct BestResponse {
  GroupWeights q;
  double objective = 0.0;  // q^T v at the solution
  bool active = false;     // divergence / ratio constraint tight at the solution
};

/// argmax_{q in U} q^T v.
///
/// Singleton returns the center; FullSimplex puts all mass on the largest
/// entry (lowest index on ties); CVaR fills groups in decreasing v order at
/// the ratio cap center_i/alpha; the chi-square ball bisects the dual
/// variable eta of q*(eta)_i ~ p_i (v_i - eta)_+ until the divergence equals
/// rho. A constant v returns the minimal-divergence representative (the
/// center where one exists).
BestResponse best_response(const GroupLosses& v, const UncertaintySet& set,
                           const SolverConfig& cfg = {});

/// Euclidean projection of v onto {q in simplex : chi2(q, center) <= rho}.
///
/// Solves the stationarity system q_i = max(0, p_i (v_i + lambda - eta) / (p_i + lambda))
/// with an outer bisection on lambda (complementary slackness of the ball
/// constraint) and an inner bisection on eta (unit mass). Feasible inputs are
/// returned unchanged.
GroupWeights project_chi_square(const std::vector<double>& v, const ChiSquareBall& set,
                                const SolverConfig& cfg = {});

}  // namespace rsched

#endif
