#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "ramcut/error.hpp"
#include "ramcut/walk.hpp"

using namespace ramcut;

TEST_CASE("tau") {
  CHECK(tau(60, 3, 2) == 10);
  CHECK(tau(61, 3, 2) == 11);
  CHECK(tau(0, 3, 2) == 0);
}

TEST_CASE("walks are seeded, valid and replayable") {
  CounterRng rng(71);
  for (int trial = 0; trial < 15; ++trial) {
    std::size_t n = 20 + rng.below(60);
    const std::size_t d = 3 + rng.below(2);
    if ((n * d) % 2) ++n;
    const auto g = testgen::random_regular(rng, n, d);
    if (!is_connected(g)) continue;
    const std::size_t k = 1 + rng.below(2);
    const auto seed = rng.next_u64();
    const auto w = simulate_walk(g, 0, 500, k, seed);
    CHECK(w.positions.size() == 501);
    for (std::size_t t = 1; t < w.positions.size(); ++t) CHECK(g.adjacent(w.positions[t - 1], w.positions[t]));
    const auto again = simulate_walk(g, 0, 500, k, seed);
    CHECK(again.positions == w.positions);
    const auto re = rederive(g, w.positions, k);
    CHECK(re.times == w.regen.times);
    CHECK(re.good == w.regen.good);
    CHECK(re.u == w.regen.u);
    // Each regeneration lands at distance exactly k from the previous anchor.
    for (std::size_t i = 1; i < w.regen.times.size(); ++i) {
      const auto dist = bfs_distances(g, w.positions[w.regen.times[i - 1]]);
      CHECK(dist[w.positions[w.regen.times[i]]] == static_cast<std::int32_t>(k));
      for (auto t = w.regen.times[i - 1] + 1; t < w.regen.times[i]; ++t) {
        CHECK(dist[w.positions[t]] < static_cast<std::int32_t>(k));
      }
    }
  }
}

TEST_CASE("U vanishes on Petersen and not on the prism") {
  const auto p = simulate_blocks(petersen_graph(), 0, 5000, 2, 1);
  const auto ps = block_statistics(std::span<const WalkTrace>(&p, 1));
  CHECK(ps.u_identically_zero);
  CHECK(ps.blocks >= 5000);
  CHECK(std::abs(ps.mean_t1 - 3.0) <= 4 * ps.stderr_t1);

  const auto q = simulate_blocks(prism_graph(), 0, 5000, 2, 1);
  const auto qs = block_statistics(std::span<const WalkTrace>(&q, 1));
  CHECK_FALSE(qs.u_identically_zero);
  REQUIRE(qs.u_survival.size() > 1);
  CHECK(qs.u_survival[0] > 0.0);
  CHECK(qs.monotone);

  CHECK_THROWS_AS(block_statistics(std::span<const WalkTrace>(&p, 1), 100000), Error);
}

TEST_CASE("empirical Y-kernel converges to W") {
  const auto g = build_random_regular(60, 3, 8);
  const Vertex anchors[] = {0, 7};
  const auto small = empirical_y_kernel(g, 2, 1000, 3, anchors);
  const auto large = empirical_y_kernel(g, 2, 100000, 3, anchors);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(large[i].tv < small[i].tv);
    CHECK(large[i].max_z <= kMonteCarloSigmas);
    double total = 0.0;
    for (double p : large[i].exact) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("escape transfer on Petersen") {
  const auto e = escape_transfer_experiment(petersen_graph(), 2, 0.25, 6, 3, 20000, 5);
  CHECK(e.tau == tau(6, 3, 2));
  CHECK(e.pass);
  CHECK(e.y_k_defect <= 1e-10);
  for (const auto& row : e.rows) CHECK(row.lhs <= 1.0);
}
