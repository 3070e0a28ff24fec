#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "rsched/distributions.hpp"
#include "rsched/solvers.hpp"

using namespace rsched;

namespace {

// Closed form for the symmetric toy instance v = (0.1, 0.1, 1.1), uniform
// center, rho = 0.1: objective = mean + sigma * sqrt(2 rho), third weight
// (1 + sqrt(4 rho)) / 3.
constexpr double kToyObjective = 0.6441518440112253;
constexpr double kToyQ3 = 0.5441518440112253;
constexpr double kToyQ12 = 0.22792407799438735;

GroupLosses toy_losses() { return GroupLosses({0.1, 0.1, 1.1}); }

std::vector<double> random_v(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("best_response over a singleton returns the center") {
  GroupWeights center({0.2, 0.3, 0.5});
  BestResponse br = best_response(toy_losses(), Singleton{center});
  CHECK(br.q == center);
  CHECK(br.objective == dot(center.span(), toy_losses().values()));
  CHECK_FALSE(br.active);
}

TEST_CASE("best_response over the full simplex is the max loss") {
  BestResponse br = best_response(toy_losses(), FullSimplex{});
  CHECK(br.objective == 1.1);
  CHECK(br.q[2] == 1.0);

  // Ties break toward the lowest group index.
  BestResponse tie = best_response(GroupLosses({1.0, 1.0, 0.0}), FullSimplex{});
  CHECK(tie.q[0] == 1.0);
  CHECK(tie.objective == 1.0);
}

TEST_CASE("chi-square best response reproduces the worked toy instance") {
  GroupWeights u3 = GroupWeights::uniform(3);
  BestResponse br = best_response(toy_losses(), ChiSquareBall(0.1, u3));
  CHECK(br.objective == doctest::Approx(kToyObjective).epsilon(1e-9));
  CHECK(br.q[0] == doctest::Approx(kToyQ12).epsilon(1e-7));
  CHECK(br.q[1] == doctest::Approx(kToyQ12).epsilon(1e-7));
  CHECK(br.q[2] == doctest::Approx(kToyQ3).epsilon(1e-7));
  CHECK(br.active);
  CHECK(chi_square_divergence(br.q, u3) <= 0.1 + 1e-9);
}

TEST_CASE("chi-square best response with constant losses returns the center") {
  GroupWeights u3 = GroupWeights::uniform(3);
  BestResponse br = best_response(GroupLosses({1.0, 1.0, 1.0}), ChiSquareBall(0.1, u3));
  CHECK(br.q == u3);
  CHECK(br.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(br.active);
}

TEST_CASE("chi-square best response reaches the vertex once the ball is wide") {
  GroupWeights u3 = GroupWeights::uniform(3);
  // chi2(e_3, uniform_3) = 1.0, so rho = 1 admits the vertex exactly.
  BestResponse br = best_response(toy_losses(), ChiSquareBall(1.0, u3));
  CHECK(br.q[2] == 1.0);
  CHECK(br.objective == 1.1);

  BestResponse wide = best_response(toy_losses(), ChiSquareBall(2.0, u3));
  CHECK(wide.objective == 1.1);
  CHECK_FALSE(wide.active);
}

TEST_CASE("chi-square best response degenerates to the center as rho -> 0") {
  GroupWeights u3 = GroupWeights::uniform(3);
  const double erm = dot(u3.span(), toy_losses().values());
  BestResponse br = best_response(toy_losses(), ChiSquareBall(1e-10, u3));
  CHECK(std::abs(br.objective - erm) < 1e-5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(br.q[i] - u3[i]) < 1e-4);
  CHECK(br.objective >= erm - 1e-12);
}

TEST_CASE("chi-square best response handles negative baselined losses") {
  GroupWeights u3 = GroupWeights::uniform(3);
  BestResponse br = best_response(GroupLosses({-0.9, -1.0, 0.1}), ChiSquareBall(0.1, u3));
  BestResponse shifted = best_response(GroupLosses({0.1, 0.0, 1.1}), ChiSquareBall(0.1, u3));
  CHECK(br.objective == doctest::Approx(shifted.objective - 1.0).epsilon(1e-9));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(br.q[i] == doctest::Approx(shifted.q[i]).epsilon(1e-8));
  }
}

TEST_CASE("cvar best response fills the largest losses at the ratio cap") {
  GroupWeights u3 = GroupWeights::uniform(3);
  BestResponse br = best_response(toy_losses(), CVaR(1.0 / 3.0, u3));
  CHECK(br.q[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(br.objective == doctest::Approx(1.1).epsilon(1e-12));

  // alpha = 1 pins q to the training distribution.
  GroupWeights p({0.1, 0.3, 0.6});
  BestResponse erm = best_response(toy_losses(), CVaR(1.0, p));
  CHECK(erm.q == p);
  CHECK(erm.objective == dot(p.span(), toy_losses().values()));

  // alpha below the smallest weight gives the worst-group loss.
  BestResponse worst = best_response(toy_losses(), CVaR(0.05, p));
  CHECK(worst.objective == doctest::Approx(1.1).epsilon(1e-12));

  // Fractional boundary group: alpha = 2/3 over a uniform center caps each
  // ratio at 1.5, so the top group takes 0.5 and the runner-up 0.5.
  BestResponse frac = best_response(toy_losses(), CVaR(2.0 / 3.0, u3));
  CHECK(frac.q[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(frac.objective == doctest::Approx(0.5 * 1.1 + 0.5 * 0.1).epsilon(1e-12));
}

TEST_CASE("best_response rejects dimension mismatches and tiny budgets") {
  GroupWeights u3 = GroupWeights::uniform(3);
  CHECK_THROWS_AS(best_response(GroupLosses({1.0, 2.0}), ChiSquareBall(0.1, u3)),
                  std::invalid_argument);
  SolverConfig cramped;
  cramped.max_iterations = 1;
  cramped.dual_tolerance = 1e-15;
  CHECK_THROWS_WITH_AS(best_response(toy_losses(), ChiSquareBall(0.1, u3), cramped),
                       doctest::Contains("bracket"), std::runtime_error);
  SolverConfig bad;
  bad.dual_tolerance = 0.0;
  CHECK_THROWS_AS(best_response(toy_losses(), ChiSquareBall(0.1, u3), bad),
                  std::invalid_argument);
}

TEST_CASE("chi-square best response is feasible and matches the PGA oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const std::vector<double> v = random_v(rng, n);
    const GroupWeights p(oracles::random_center(rng, n));
    const double rho = std::vector<double>{0.01, 0.1, 0.5, 2.0}[trial % 4];
    ChiSquareBall ball(rho, p);
    BestResponse br = best_response(GroupLosses(v), ball);
    CHECK(contains(UncertaintySet{ball}, br.q, 1e-6));
    const double oracle = oracles::pga_best_response(v, ball);
    CHECK(br.objective >= oracle - 1e-4);
    CHECK(br.objective <= oracle + 1e-4);
  }
}

TEST_CASE("cvar best response matches exhaustive vertex enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ua(0.05, 1.0);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const std::vector<double> v = random_v(rng, n);
    const std::vector<double> p = oracles::random_center(rng, n);
    const double alpha = ua(rng);
    CVaR set(alpha, GroupWeights(p));
    BestResponse br = best_response(GroupLosses(v), set);
    CHECK(contains(UncertaintySet{set}, br.q, 1e-9));
    CHECK(br.objective == doctest::Approx(oracles::cvar_enumerated(v, p, alpha)).epsilon(1e-12));
  }
}

TEST_CASE("best response objective is monotone in rho and sandwiched") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const std::vector<double> v = random_v(rng, n);
    const GroupWeights p(oracles::random_center(rng, n));
    const double erm = dot(p.span(), v);
    const double worst = best_response(GroupLosses(v), FullSimplex{}).objective;
    double prev = erm - 1e-12;
    for (double rho : {0.001, 0.01, 0.1, 0.5, 1.0, 4.0}) {
      const double obj = best_response(GroupLosses(v), ChiSquareBall(rho, p)).objective;
      CHECK(obj >= prev - 1e-9);
      CHECK(obj >= erm - 1e-9);
      CHECK(obj <= worst + 1e-9);
      prev = obj;
    }
  }
}

TEST_CASE("best response maximizer is shift equivariant") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const std::vector<double> v = random_v(rng, n);
    const GroupWeights p(oracles::random_center(rng, n));
    for (double c : {-3.0, 0.7, 42.0}) {
      std::vector<double> shifted(v);
      for (double& x : shifted) x += c;
      BestResponse a = best_response(GroupLosses(v), ChiSquareBall(0.2, p));
      BestResponse b = best_response(GroupLosses(shifted), ChiSquareBall(0.2, p));
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.q[i] - b.q[i]) <= 1e-9);
      CHECK(b.objective == doctest::Approx(a.objective + c).epsilon(1e-9));
    }
  }
}

TEST_CASE("project_chi_square pinned examples") {
  GroupWeights u3 = GroupWeights::uniform(3);
  ChiSquareBall ball(0.1, u3);

  // The center projects to itself, bitwise.
  GroupWeights same = project_chi_square(u3.values(), ball);
  CHECK(same == u3);

  // Interior point stays untouched: chi2((0.4,0.3,0.3), u3) = 0.015 <= 0.5.
  ChiSquareBall wide(0.5, u3);
  std::vector<double> interior = {0.4, 0.3, 0.3};
  GroupWeights kept = project_chi_square(interior, wide);
  for (std::size_t i = 0; i < 3; ++i) CHECK(kept[i] == interior[i]);

  // By symmetry the projection of e_3 hits the same boundary point as the
  // toy best response.
  GroupWeights proj = project_chi_square({0.0, 0.0, 1.0}, ball);
  CHECK(proj[0] == doctest::Approx(kToyQ12).epsilon(1e-7));
  CHECK(proj[1] == doctest::Approx(kToyQ12).epsilon(1e-7));
  CHECK(proj[2] == doctest::Approx(kToyQ3).epsilon(1e-7));
  CHECK(chi_square_divergence(proj, u3) <= 0.1 + 1e-9);
}

TEST_CASE("project_chi_square rejects bad inputs") {
  ChiSquareBall ball(0.1, GroupWeights::uniform(3));
  CHECK_THROWS_AS(project_chi_square({0.1, 0.2}, ball), std::invalid_argument);
  CHECK_THROWS_AS(project_chi_square({0.1, 0.2, std::nan("")}, ball), std::invalid_argument);
}

TEST_CASE("a wide ball reduces projection to the simplex projection") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> spread(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> v(n);
    for (double& x : v) x = spread(rng);
    const GroupWeights p(oracles::random_center(rng, n));
    // Radius beyond every vertex makes the ball constraint vacuous.
    ChiSquareBall ball(2.0 * n, p);
    GroupWeights mine = project_chi_square(v, ball);
    CHECK(oracles::l2_dist(mine.values(), oracles::project_simplex(v)) <= 1e-8);
  }
}

TEST_CASE("project_chi_square matches Dykstra's alternating projections") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> spread(-1.5, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> v(n);
    for (double& x : v) x = spread(rng);
    const std::vector<double> p = oracles::random_center(rng, n);
    const double rho = std::vector<double>{0.02, 0.1, 0.5, 2.0}[trial % 4];
    GroupWeights mine = project_chi_square(v, ChiSquareBall(rho, GroupWeights(p)));
    std::vector<double> ref = oracles::dykstra_project(v, p, rho);
    CHECK(oracles::l2_dist(mine.values(), ref) < 1e-5);
  }
}

TEST_CASE("project_chi_square never does worse than any feasible grid point") {
  // Optimality certificate for N = 2 and 3: scan a fine feasible grid and
  // verify the implementation's distance is minimal.
  GroupWeights u2 = GroupWeights::uniform(2);
  ChiSquareBall ball2(0.08, u2);
  std::vector<double> v2 = {1.3, -0.4};
  GroupWeights q2 = project_chi_square(v2, ball2);
  const double mine2 = oracles::l2_dist(q2.values(), v2);
  for (double a = 0.0; a <= 1.0; a += 1e-4) {
    std::vector<double> cand = {a, 1.0 - a};
    if (oracles::chi_square(cand, u2.values()) > 0.08) continue;
    CHECK(mine2 <= oracles::l2_dist(cand, v2) + 1e-7);
  }

  GroupWeights u3 = GroupWeights::uniform(3);
  ChiSquareBall ball3(0.15, u3);
  std::vector<double> v3 = {0.9, 0.4, -0.3};
  GroupWeights q3 = project_chi_square(v3, ball3);
  const double mine3 = oracles::l2_dist(q3.values(), v3);
  for (double a = 0.0; a <= 1.0; a += 2e-3) {
    for (double b = 0.0; a + b <= 1.0; b += 2e-3) {
      std::vector<double> cand = {a, b, 1.0 - a - b};
      if (oracles::chi_square(cand, u3.values()) > 0.15) continue;
      CHECK(mine3 <= oracles::l2_dist(cand, v3) + 1e-5);
    }
  }
}

TEST_CASE("solvers are safe to call concurrently") {
  GroupWeights u3 = GroupWeights::uniform(3);
  ChiSquareBall ball(0.1, u3);
  const BestResponse expected = best_response(toy_losses(), ball);
  const GroupWeights expected_proj = project_chi_square({0.0, 0.0, 1.0}, ball);
  std::vector<std::thread> workers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        const BestResponse br = best_response(toy_losses(), ball);
        if (br.q != expected.q || br.objective != expected.objective) ++mismatches;
        if (project_chi_square({0.0, 0.0, 1.0}, ball) != expected_proj) ++mismatches;
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(mismatches == 0);
}

TEST_CASE("project_chi_square is idempotent") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> spread(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 6;
    std::vector<double> v(n);
    for (double& x : v) x = spread(rng);
    const GroupWeights p(oracles::random_center(rng, n));
    const double rho = std::vector<double>{0.05, 0.3, 1.0}[trial % 3];
    ChiSquareBall ball(rho, p);
    GroupWeights once = project_chi_square(v, ball);
    GroupWeights twice = project_chi_square(once.values(), ball);
    CHECK(oracles::l2_dist(once.values(), twice.values()) <= 1e-9);
  }
}
