#include "rsched/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rsched/distributions.hpp"

namespace rsched {

void SolverConfig::validate() const {
  if (!(dual_tolerance > 0.0)) {
    throw std::invalid_argument("SolverConfig: dual_tolerance must be > 0");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
  }
}

namespace {

double chi_square_raw(const std::vector<double>& q, const GroupWeights& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double r = q[i] / p[i] - 1.0;
    acc += p[i] * r * r;
  }
  return 0.5 * acc;
}

// q*(eta)_i = p_i (v_i - eta)_+ normalized. Defined for eta < max(v).
void response_at(const std::vector<double>& v, const GroupWeights& p, double eta,
                 std::vector<double>& q) {
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    q[i] = p[i] * std::max(0.0, v[i] - eta);
    z += q[i];
  }
  for (double& x : q) x /= z;
}

std::size_t lowest_argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

[[noreturn]] void throw_bracket(const char* what, double lo, double hi) {
  std::ostringstream os;
  os << what << ": bisection did not converge, last bracket [" << lo << ", " << hi << "]";
  throw std::runtime_error(os.str());
}

BestResponse solve_cvar(const std::vector<double>& v, const CVaR& set) {
  const std::size_t n = v.size();
  const auto& p = set.center;
  if (set.alpha == 1.0) {
    // Ratio cap 1 pins q to the center exactly.
    return {p, dot(p.span(), v), true};
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<double> q(n, 0.0);
  double remaining = 1.0;
  bool capped = false;
  for (std::size_t i : order) {
    const double cap = p[i] / set.alpha;
    if (cap >= remaining) {
      q[i] = remaining;
      remaining = 0.0;
      capped = capped || (q[i] >= cap);
      break;
    }
    q[i] = cap;
    capped = true;
    remaining -= cap;
  }
  GroupWeights qw(std::move(q));
  return {qw, dot(qw.span(), v), capped};
}

BestResponse solve_chi_square(const std::vector<double>& v, const ChiSquareBall& set,
                              const SolverConfig& cfg) {
  const std::size_t n = v.size();
  const auto& p = set.center;
  const double vmax = *std::max_element(v.begin(), v.end());
  const double vmin = *std::min_element(v.begin(), v.end());

  // The most concentrated point on the solution path: center mass restricted
  // to the argmax set. If it is feasible the linear objective cannot improve
  // further and the constraint stays slack.
  std::vector<double> qlim(n, 0.0);
  double zmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == vmax) {
      qlim[i] = p[i];
      zmax += p[i];
    }
  }
  for (double& x : qlim) x /= zmax;
  const double div_lim = chi_square_raw(qlim, p);
  if (div_lim <= set.rho) {
    return {GroupWeights(std::move(qlim)), vmax, div_lim >= set.rho};
  }

  // Root-find eta with chi2(q*(eta), p) = rho. The bracket low end starts at
  // min(v) - 1 (valid for eta below every kink) and expands geometrically
  // until the divergence falls below rho; the divergence grows toward
  // div_lim > rho as eta approaches max(v).
  std::vector<double> q(n);
  double lo = vmin - 1.0;
  double step = 1.0;
  for (;;) {
    response_at(v, p, lo, q);
    if (chi_square_raw(q, p) <= set.rho) break;
    lo -= step;
    step *= 2.0;
    if (!std::isfinite(lo)) throw_bracket("best_response", lo, vmax);
  }
  double hi = vmax;
  int it = 0;
  while (hi - lo > cfg.dual_tolerance && it < cfg.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    response_at(v, p, mid, q);
    if (chi_square_raw(q, p) <= set.rho) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  if (hi - lo > cfg.dual_tolerance) throw_bracket("best_response", lo, hi);
  response_at(v, p, lo, q);  // feasible side of the bracket
  GroupWeights qw(std::move(q));
  return {qw, dot(qw.span(), v), true};
}

// Unit-mass dual: finds eta with sum_i max(0, p_i (v_i + lambda - eta) / (p_i + lambda)) = 1
// and leaves the (normalized) weights in q.
void solve_mass_dual(const std::vector<double>& v, const GroupWeights& p, double lambda,
                     const SolverConfig& cfg, std::vector<double>& q) {
  const std::size_t n = v.size();
  auto mass_at = [&](double eta) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = std::max(0.0, p[i] * (v[i] + lambda - eta) / (p[i] + lambda));
      m += q[i];
    }
    return m;
  };
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += p[i] * (v[i] + lambda) / (p[i] + lambda);
    b += p[i] / (p[i] + lambda);
  }
  // mass(eta) >= a - b*eta everywhere, so mass >= 1 at (a-1)/b; mass = 0 at
  // max(v) + lambda.
  double lo = (a - 1.0) / b;
  double hi = *std::max_element(v.begin(), v.end()) + lambda;
  if (lo > hi) lo = hi - 1.0;
  int it = 0;
  while (hi - lo > cfg.dual_tolerance && it < cfg.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mass_at(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  const double m = mass_at(lo);
  if (m <= 0.0) throw_bracket("project_chi_square (mass dual)", lo, hi);
  for (double& x : q) x /= m;
}

}  // namespace

BestResponse best_response(const GroupLosses& v, const UncertaintySet& set,
                           const SolverConfig& cfg) {
  cfg.validate();
  if (auto n = group_count(set); n && *n != v.size()) {
    throw std::invalid_argument("best_response: losses have " + std::to_string(v.size()) +
                                " groups, set expects " + std::to_string(*n));
  }
  const auto& vals = v.values();

  if (const auto* s = std::get_if<Singleton>(&set)) {
    return {s->center, dot(s->center.span(), vals), false};
  }
  if (std::holds_alternative<FullSimplex>(set)) {
    const std::size_t imax = lowest_argmax(vals);
    return {GroupWeights::vertex(vals.size(), imax), vals[imax], false};
  }

  const double vmax = *std::max_element(vals.begin(), vals.end());
  const double vmin = *std::min_element(vals.begin(), vals.end());
  if (const auto* c = std::get_if<CVaR>(&set)) {
    if (vmax == vmin) return {c->center, dot(c->center.span(), vals), false};
    return solve_cvar(vals, *c);
  }
  const auto& ball = std::get<ChiSquareBall>(set);
  if (vmax == vmin) {
    // Every feasible q ties; the center is the minimal-divergence choice.
    return {ball.center, dot(ball.center.span(), vals), false};
  }
  return solve_chi_square(vals, ball, cfg);
}

GroupWeights project_chi_square(const std::vector<double>& v, const ChiSquareBall& set,
                                const SolverConfig& cfg) {
  cfg.validate();
  const auto& p = set.center;
  const std::size_t n = p.size();
  if (v.size() != n) {
    throw std::invalid_argument("project_chi_square: dimension mismatch");
  }
  double sum = 0.0;
  bool nonneg = true;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("project_chi_square: input must be finite");
    }
    nonneg = nonneg && x >= 0.0;
    sum += x;
  }
  if (nonneg && std::abs(sum - 1.0) <= 1e-9) {
    GroupWeights qv{std::vector<double>(v)};
    if (chi_square_divergence(qv, p) <= set.rho) return qv;
  }

  std::vector<double> q(n);
  solve_mass_dual(v, p, 0.0, cfg, q);
  if (chi_square_raw(q, p) <= set.rho) {
    // Ball constraint slack: plain simplex projection.
    return GroupWeights(std::move(q));
  }

  double lam_lo = 0.0, lam_hi = 1.0;
  for (;;) {
    solve_mass_dual(v, p, lam_hi, cfg, q);
    if (chi_square_raw(q, p) <= set.rho) break;
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    if (lam_hi > 1e18) throw_bracket("project_chi_square", lam_lo, lam_hi);
  }
  int it = 0;
  while (lam_hi - lam_lo > cfg.dual_tolerance * std::max(1.0, lam_hi) &&
         it < cfg.max_iterations) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    solve_mass_dual(v, p, mid, cfg, q);
    if (chi_square_raw(q, p) <= set.rho) {
      lam_hi = mid;
    } else {
      lam_lo = mid;
    }
    ++it;
  }
  solve_mass_dual(v, p, lam_hi, cfg, q);  // feasible side
  return GroupWeights(std::move(q));
}

}  // namespace rsched
