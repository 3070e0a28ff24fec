#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rsched/distributions.hpp"
#include "rsched/types.hpp"
#include "rsched/uncertainty.hpp"

using namespace rsched;

TEST_CASE("GroupWeights validates and renormalizes drift") {
  GroupWeights w({0.1, 0.3, 0.6});
  CHECK(w.size() == 3);
  CHECK(w[2] == 0.6);

  // Drift within 1e-9 is accepted untouched.
  GroupWeights exact({0.5, 0.5 + 5e-10});
  CHECK(exact[1] == 0.5 + 5e-10);

  // Drift within 1e-6 is renormalized.
  GroupWeights renorm({0.5, 0.5 + 5e-7});
  double sum = renorm[0] + renorm[1];
  CHECK(std::abs(sum - 1.0) < 1e-12);

  CHECK_THROWS_AS(GroupWeights({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(GroupWeights({1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(GroupWeights({}), std::invalid_argument);
}

TEST_CASE("GroupWeights factories") {
  GroupWeights u = GroupWeights::uniform(4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == 0.25);
  GroupWeights e = GroupWeights::vertex(3, 1);
  CHECK(e[0] == 0.0);
  CHECK(e[1] == 1.0);
  CHECK(u.strictly_positive());
  CHECK_FALSE(e.strictly_positive());
}

TEST_CASE("GroupLosses requires finite entries") {
  CHECK_NOTHROW(GroupLosses({-1.0, 0.0, 2.5}));
  CHECK_THROWS_AS(GroupLosses({1.0, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(GroupLosses({}), std::invalid_argument);
}

TEST_CASE("chi_square_divergence matches hand-worked values") {
  GroupWeights p({0.1, 0.3, 0.6});
  CHECK(chi_square_divergence(p, p) == 0.0);

  GroupWeights q = GroupWeights::vertex(3, 0);
  GroupWeights u = GroupWeights::uniform(3);
  CHECK(chi_square_divergence(q, u) == doctest::Approx(1.0).epsilon(1e-12));

  GroupWeights toy({0.2279, 0.2279, 0.5442});
  CHECK(chi_square_divergence(toy, u) == doctest::Approx(0.1).epsilon(1e-2));
  CHECK(std::abs(chi_square_divergence(toy, u) - 0.1) < 1e-3);
}

TEST_CASE("chi_square_divergence rejects bad inputs") {
  GroupWeights u = GroupWeights::uniform(3);
  CHECK_THROWS_AS(chi_square_divergence(GroupWeights::uniform(2), u), std::invalid_argument);
  GroupWeights zero_mass({0.0, 0.5, 0.5});
  CHECK_THROWS_AS(chi_square_divergence(u, zero_mass), std::invalid_argument);
}

TEST_CASE("chi_square vertex closed form (N-1)/2") {
  for (std::size_t n = 2; n <= 8; ++n) {
    GroupWeights u = GroupWeights::uniform(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = chi_square_divergence(GroupWeights::vertex(n, i), u);
      CHECK(d == doctest::Approx((n - 1) / 2.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("chi_square non-negativity and identity of indiscernibles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    std::vector<double> a(n), b(n);
    double za = 0, zb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      za += a[i];
      zb += b[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      a[i] /= za;
      b[i] /= zb;
    }
    GroupWeights qa(a), qb(b);
    const double d = chi_square_divergence(qa, qb);
    CHECK(d >= 0.0);
    CHECK(chi_square_divergence(qa, qa) <= 1e-12);
    double max_gap = 0;
    for (std::size_t i = 0; i < n; ++i) max_gap = std::max(max_gap, std::abs(a[i] - b[i]));
    if (max_gap > 1e-6) CHECK(d > 0.0);
  }
}

TEST_CASE("temperature_distribution pinned examples") {
  GroupWeights p1 = temperature_distribution({10, 30, 60}, 1.0);
  CHECK(p1[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p1[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(p1[2] == doctest::Approx(0.6).epsilon(1e-12));

  GroupWeights pinf = temperature_distribution({10, 30, 60}, 1e6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pinf[i] - 1.0 / 3.0) < 1e-4);

  for (double tau : {0.3, 1.0, 7.0}) {
    GroupWeights sym = temperature_distribution({5, 5, 5}, tau);
    for (std::size_t i = 0; i < 3; ++i) CHECK(sym[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  CHECK_THROWS_AS(temperature_distribution({10, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(temperature_distribution({10, 20}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(temperature_distribution({10, 20}, -2.0), std::invalid_argument);
}

TEST_CASE("temperature_distribution survives extreme sizes and tau") {
  GroupWeights p = temperature_distribution({1, 1000000000}, 0.05);
  CHECK(p[1] > 0.9999);
  CHECK(p[0] >= 0.0);
  CHECK(std::isfinite(p[0]));
}

TEST_CASE("temperature_distribution is monotone toward uniform in tau") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(1, 100000);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    std::vector<std::size_t> sizes(n);
    for (auto& s : sizes) s = size(rng);
    double prev = 1e9;
    for (double tau : {0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
      GroupWeights p = temperature_distribution(sizes, tau);
      double dev = 0.0;
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dev = std::max(dev, std::abs(p[i] - 1.0 / static_cast<double>(n)));
        CHECK(p[i] >= 0.0);
        sum += p[i];
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      CHECK(dev <= prev + 1e-12);
      prev = dev;
    }
  }
}

TEST_CASE("training_distribution pinned examples") {
  GroupWeights p = training_distribution({10, 30, 60});
  CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
  GroupWeights single = training_distribution({17});
  CHECK(single[0] == 1.0);

  const std::vector<std::size_t> sizes = {4, 6, 13, 81, 240, 274, 243, 136};
  const std::vector<double> printed = {0.004, 0.006, 0.013, 0.081,
                                       0.240, 0.274, 0.243, 0.136};
  GroupWeights freq = training_distribution(sizes);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    CHECK(std::abs(freq[i] - printed[i]) < 1e-3);
  }
}

TEST_CASE("uncertainty set constructors validate") {
  GroupWeights u = GroupWeights::uniform(3);
  CHECK_THROWS_AS(CVaR(0.0, u), std::invalid_argument);
  CHECK_THROWS_AS(CVaR(1.5, u), std::invalid_argument);
  CHECK_NOTHROW(CVaR(1.0, u));
  CHECK_THROWS_AS(ChiSquareBall(0.0, u), std::invalid_argument);
  CHECK_THROWS_AS(ChiSquareBall(0.1, GroupWeights({0.0, 0.5, 0.5})), std::invalid_argument);
  CHECK_NOTHROW(ChiSquareBall(0.1, u));

  UncertaintySet set = ChiSquareBall(0.1, u);
  CHECK(group_count(set) == 3);
  CHECK_FALSE(group_count(UncertaintySet{FullSimplex{}}).has_value());
  CHECK(contains(set, u));
  CHECK_FALSE(contains(set, GroupWeights::vertex(3, 2)));
}
