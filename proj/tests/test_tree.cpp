#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "generators.hpp"
#include "ramcut/error.hpp"
#include "ramcut/tree_oracle.hpp"

using namespace ramcut;

TEST_CASE("Z-path counts: dynamic programming against the ballot form") {
  const char* expected[] = {"1", "42", "41990", "811985790", "280531912316292", "1666686537721857099910"};
  const double ratios[] = {0.125, 0.1640625, 0.18020153045654297, 0.18905517412349582, 0.19465811762229557,
                           0.1985257139337577};
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(count_z_paths(k).str() == expected[k - 1]);
    CHECK(count_z_paths(k) == ballot_z_paths(k));
    CHECK(z_path_ratio(k) == doctest::Approx(ratios[k - 1]).epsilon(1e-14));
  }
  for (std::size_t k = 7; k <= 12; ++k) CHECK(count_z_paths(k) == ballot_z_paths(k));
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(3, 5) == 0);
}

TEST_CASE("escape probability on Z") {
  for (std::size_t k = 1; k <= 10; ++k) {
    CHECK(z_escape_probability(k) == doctest::Approx(0.5 / static_cast<double>(k)).epsilon(1e-13));
  }
}

TEST_CASE("no-return bound at c0 = 1/8") {
  struct Row {
    std::size_t d, k;
    double lhs;
  };
  const Row rows[] = {{3, 1, 2.0 / 9},          {3, 2, 448.0 / 6561},         {4, 1, 3.0 / 16},
                      {4, 2, 5103.0 / 131072}, {5, 1, 4.0 / 25},             {5, 2, 43008.0 / 1953125}};
  for (const auto& r : rows) {
    const auto c = td1_bound_check(r.d, r.k);
    CHECK(c.steps == r.k + 2 * r.k * r.k);
    CHECK(c.lhs == doctest::Approx(r.lhs).epsilon(1e-13));
    CHECK(c.pass);
    CHECK(c.max_c0 >= 0.125 - 1e-12);
  }
  const auto tight = td1_bound_check(3, 1);
  CHECK(tight.rhs == doctest::Approx(2.0 / 9).epsilon(1e-13));
}

TEST_CASE("level law") {
  for (std::size_t d : {3, 4, 7}) {
    for (std::size_t t : {1, 2, 5, 30, 300}) {
      const auto law = level_law(d, t, false);
      CHECK(std::accumulate(law.begin(), law.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      // Parity: level and t agree mod 2.
      for (std::size_t l = 0; l < law.size(); ++l) {
        if ((l + t) % 2) CHECK(law[l] == 0.0);
      }
      const auto nr = level_law(d, t, true);
      CHECK(nr[0] == 0.0);
      for (std::size_t l = 1; l < law.size(); ++l) CHECK(nr[l] <= law[l] + 1e-15);
    }
  }
  CHECK(level_distribution(3, 2, 5, false) == 0.0);
  CHECK(level_size(3, 0) == 1.0);
  CHECK(level_size(3, 4) == 24.0);
}

TEST_CASE("tree kernel spreads level mass uniformly") {
  for (std::size_t d : {3, 5}) {
    for (std::size_t t : {1, 4, 9}) {
      double total = 0.0;
      for (std::size_t k = 0; k <= t; ++k) total += level_size(d, k) * tree_kernel(d, t, k);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("regeneration time on the tree") {
  const double e[] = {1, 3, 5.5, 8.25, 11.125, 14.0625};
  for (std::size_t k = 1; k <= 6; ++k) CHECK(tree_regeneration_time(3, k) == doctest::Approx(e[k - 1]).epsilon(1e-14));
}

TEST_CASE("kernel domination fixtures") {
  const auto p = kernel_domination_check(petersen_graph(), 0, 1, 3);
  CHECK(p.graph_kernel == doctest::Approx(5.0 / 27).epsilon(1e-14));
  CHECK(p.tree_kernel == doctest::Approx(5.0 / 27).epsilon(1e-14));
  CHECK(p.pass);

  const auto k4 = kernel_domination_check(complete_graph(4), 0, 1, 2);
  CHECK(k4.graph_kernel == doctest::Approx(2.0 / 9).epsilon(1e-14));
  CHECK(k4.tree_kernel == 0.0);
  CHECK(k4.pass);
}

TEST_CASE("kernel domination on random regular graphs") {
  CounterRng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 3 + rng.below(3);
    std::size_t n = 12 + rng.below(40);
    if ((n * d) % 2) ++n;
    const auto g = testgen::random_regular(rng, n, d);
    if (!is_connected(g)) continue;
    const auto x = static_cast<Vertex>(rng.below(n)), y = static_cast<Vertex>(rng.below(n));
    CHECK(kernel_domination_check(g, x, y, 1 + rng.below(10)).pass);
  }
}

TEST_CASE("inverse normal against boost and frozen values") {
  const std::pair<double, double> frozen[] = {{0.975, 1.959963984540054},
                                              {0.0013499, -2.999999555858321},
                                              {1e-10, -6.361340902404056},
                                              {0.02425, -1.972961051311885},
                                              {0.9, 1.2815515655446004}};
  for (const auto& [p, z] : frozen) CHECK(inv_normal_cdf(p) == doctest::Approx(z).epsilon(1e-14));
  const boost::math::normal_distribution<double> normal;
  CounterRng rng(67);
  for (int i = 0; i < 200; ++i) {
    const double p = 1e-12 + (1.0 - 2e-12) * rng.uniform();
    CHECK(inv_normal_cdf(p) == doctest::Approx(boost::math::quantile(normal, p)).epsilon(1e-13));
  }
  CHECK(inv_normal_cdf(0.5) == doctest::Approx(0.0));
}

TEST_CASE("diameter lower bound") {
  CHECK(diameter_constant(3) == doctest::Approx(4.898979485566356).epsilon(1e-14));
  CHECK(diameter_lower_bound(1000000, 3, 0.5) == doctest::Approx(59.794705707972525).epsilon(1e-13));
  CHECK(diameter_lower_bound(1000000, 3, 0.975) == doctest::Approx(102.66183994134067).epsilon(1e-13));
  CHECK(diameter_lower_bound(128, 3, 0.25) == doctest::Approx(12.257613650490605).epsilon(1e-13));
  CHECK(diameter_lower_bound(512, 3, 0.25) == doctest::Approx(17.08706565169386).epsilon(1e-13));
  CHECK(diameter_lower_bound(2048, 3, 0.25) == doctest::Approx(22.040838731747435).epsilon(1e-13));
}

TEST_CASE("distance concentration") {
  const auto c = tree_distance_concentration(3, 300);
  CHECK(c.mean == doctest::Approx(101.33333333313122).epsilon(1e-10));
  CHECK(c.stddev == doctest::Approx(16.138291250548768).epsilon(1e-10));
  for (std::size_t i = 1; i < c.tails.size(); ++i) {
    CHECK(c.tails[i].lower <= c.tails[i - 1].lower);
    CHECK(c.tails[i].upper <= c.tails[i - 1].upper);
  }
}

TEST_CASE("Monte Carlo level histogram tracks the exact law") {
  const std::size_t t = 40;
  const std::uint64_t walks = 200000;
  const auto hist = sample_level_histogram(3, t, walks, 5);
  const auto law = level_law(3, t, false);
  for (std::size_t l = 0; l < law.size(); ++l) {
    const double p = law[l];
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(walks)) + 1e-9;
    CHECK(std::abs(static_cast<double>(hist[l]) / static_cast<double>(walks) - p) <= 5 * se);
  }
}
