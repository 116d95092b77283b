#include <cmath>
#include <numeric>

#include "doctest.h"
#include "generators.hpp"
#include "ramcut/error.hpp"
#include "ramcut/hitting.hpp"
#include "ramcut/tree_oracle.hpp"

using namespace ramcut;

namespace {

// Sphere-hitting law by pushing mass forward until the interior is empty.
std::vector<double> sphere_law_by_evolution(const Graph& g, Vertex v, std::size_t k) {
  const auto dist = bfs_distances(g, v);
  std::vector<double> mu(g.vertex_count(), 0.0), next(g.vertex_count()), hit(g.vertex_count(), 0.0);
  mu[v] = 1.0;
  double inside = 1.0;
  while (inside > 1e-16) {
    std::fill(next.begin(), next.end(), 0.0);
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
      if (mu[x] == 0.0) continue;
      const double share = mu[x] / static_cast<double>(g.degree(x));
      for (Vertex y : g.neighbors(x)) next[y] += share;
    }
    inside = 0.0;
    for (Vertex y = 0; y < g.vertex_count(); ++y) {
      if (dist[y] == static_cast<std::int32_t>(k)) {
        hit[y] += next[y];
        next[y] = 0.0;
      }
      inside += next[y];
    }
    mu.swap(next);
  }
  return hit;
}

}  // namespace

TEST_CASE("survival routes agree") {
  CounterRng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testgen::connected_graph(rng, 4 + rng.below(40), rng.below(30));
    const auto c = srw_chain(g);
    const auto a = testgen::random_set(rng, c.size(), c.size());
    const auto start = a[static_cast<std::size_t>(rng.below(a.size()))];
    const auto curve = survival_curve(c, a, start, 20);
    CHECK(curve[0] == 1.0);
    const auto pos = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), start) - a.begin());
    for (std::size_t t = 0; t <= 20; t += 5) {
      CHECK(survival_probability(c, a, start, t) == doctest::Approx(curve[t]).epsilon(1e-13));
      CHECK(killed_survival(c.kernel(), a, t)[pos] == doctest::Approx(curve[t]).epsilon(1e-13));
    }
    for (std::size_t t = 1; t <= 20; ++t) CHECK(curve[t] <= curve[t - 1] + 1e-15);
  }
}

TEST_CASE("K4 pair: survival 3^-t and equality on the right") {
  const auto c = srw_chain(complete_graph(4));
  const auto s = spectrum(c, SpectrumMode::dense_full);
  std::vector<std::size_t> ts(101);
  std::iota(ts.begin(), ts.end(), std::size_t{0});
  const auto h = verify_spectral_hit(c, {0, 1}, ts, 0.5, 0.1, s);
  CHECK(h.restricted.lambda_a == doctest::Approx(1.0 / 3).epsilon(1e-10));
  for (const auto& row : h.rows) {
    const double expect = std::pow(3.0, -2.0 * static_cast<double>(row.t));
    CHECK(row.middle == doctest::Approx(expect).epsilon(1e-9));
    CHECK(row.right == doctest::Approx(expect).epsilon(1e-9));
    CHECK(row.left_pass);
    CHECK(row.right_pass);
    CHECK(row.two_way_pass);
  }
}

TEST_CASE("spectral hit chain on random pairs") {
  CounterRng rng(47);
  const std::size_t ts[] = {0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 100};
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = testgen::connected_graph(rng, 5 + rng.below(40), rng.below(40));
    const auto c = srw_chain(g);
    const auto s = spectrum(c, SpectrumMode::dense_full);
    const auto a = testgen::random_set(rng, c.size(), c.size() / 2 + 1);
    HitOptions o;
    o.quantile_checks = false;
    const auto h = verify_spectral_hit(c, a, ts, 0.3, 0.1, s, o);
    for (const auto& row : h.rows) {
      CHECK(row.left <= row.middle + kSpectralHitTolerance);
      CHECK(row.middle <= row.right + kSpectralHitTolerance);
      CHECK(std::abs(row.middle - row.middle_forward) <= kTwoWayTolerance);
    }
    CHECK(h.pass);
  }
}

TEST_CASE("hit quantiles") {
  const auto k4 = srw_chain(complete_graph(4));
  CHECK(hit_quantile(k4, 0.3, 0.1, HitSearch::exact).time == 1);

  const auto p = srw_chain(petersen_graph());
  const auto exact = hit_quantile(p, 0.25, 0.1, HitSearch::exact);
  CHECK(exact.time == 3);
  CHECK_FALSE(exact.lower_bound);
  CHECK(exact.sets_examined == 45);
  const auto cand = hit_quantile(p, 0.25, 0.1, HitSearch::candidate_family);
  CHECK(cand.time == 3);
  CHECK(cand.lower_bound);

  CHECK_THROWS_AS(hit_quantile(srw_chain(build_random_regular(30, 3, 1)), 0.1, 0.1, HitSearch::exact), BudgetError);
}

TEST_CASE("candidate family never exceeds the exact quantile") {
  CounterRng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testgen::connected_graph(rng, 5 + rng.below(10), rng.below(10));
    const auto c = srw_chain(g);
    const double alpha = 0.1 + 0.3 * rng.uniform();
    const double eps = 0.05 + 0.3 * rng.uniform();
    const auto exact = hit_quantile(c, alpha, eps, HitSearch::exact);
    const auto cand = hit_quantile(c, alpha, eps, HitSearch::candidate_family);
    CHECK(cand.time <= exact.time);
    for (const auto& a : candidate_small_sets(c, alpha)) CHECK(set_mass(c, a) <= alpha + 1e-12);
  }
}

TEST_CASE("sphere hitting: tree balls are uniform") {
  const auto p = petersen_graph();
  const auto h = sphere_hit_distribution(p, 0, 2);
  CHECK(h.sphere.size() == 6);
  CHECK(h.excess == 0);
  for (double q : h.probability) CHECK(q == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(h.lower_pass);
  CHECK(h.c_hat == doctest::Approx(1.0).epsilon(1e-12));

  const auto big = build_random_regular(2000, 3, 2000, 7);
  const auto hb = sphere_hit_distribution(big, 0, 3);
  CHECK(hb.sphere.size() == 12);
  for (double q : hb.probability) CHECK(q == doctest::Approx(1.0 / 12).epsilon(1e-12));
  CHECK(expected_regeneration_time(big, 0, 3) == doctest::Approx(5.5).epsilon(1e-10));
}

TEST_CASE("sphere hitting on the prism") {
  const auto h = sphere_hit_distribution(prism_graph(), 0, 2);
  CHECK(h.excess == 3);
  CHECK(h.max_probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h.c_hat == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(h.total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sphere hitting matches forward evolution and the lower bound") {
  CounterRng rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 3 + rng.below(2);
    std::size_t n = 20 + rng.below(60);
    if ((n * d) % 2) ++n;
    const auto g = testgen::random_regular(rng, n, d);
    const std::size_t k = 1 + rng.below(3);
    const auto v = static_cast<Vertex>(rng.below(n));
    if (!is_connected(g)) continue;
    const auto dist = bfs_distances(g, v);
    if (std::none_of(dist.begin(), dist.end(), [&](std::int32_t x) { return x == static_cast<std::int32_t>(k); })) continue;
    const auto h = sphere_hit_distribution(g, v, k);
    const auto law = sphere_law_by_evolution(g, v, k);
    for (std::size_t i = 0; i < h.sphere.size(); ++i) {
      CHECK(h.probability[i] == doctest::Approx(law[h.sphere[i]]).epsilon(1e-10));
      CHECK(h.probability[i] >= sphere_tree_probability(d, k) - kSphereLowerSlack);
    }
    CHECK(h.lower_pass);
    CHECK(h.total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("expected regeneration time") {
  CHECK(expected_regeneration_time(petersen_graph(), 0, 2) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(expected_regeneration_time(petersen_graph(), 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(expected_regeneration_time(complete_graph(4), 0, 2), Error);
}

TEST_CASE("W against K") {
  const auto w = w_vs_k_report(petersen_graph(), 2);
  CHECK(w.min_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.k_scaled_pass);
  CHECK(w.w_lower_pass);

  const auto prism = w_vs_k_report(prism_graph(), 2);
  CHECK(prism.min_w == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(prism.min_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(prism.max_ratio == doctest::Approx(1.0).epsilon(1e-10));

  const auto kernel = y_kernel(build_random_regular(60, 3, 5), 2);
  for (int x = 0; x < kernel.rows(); ++x) CHECK(kernel.row(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
}
