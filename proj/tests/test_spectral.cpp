#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "ramcut/error.hpp"
#include "ramcut/spectral.hpp"

using namespace ramcut;

namespace {

// Largest eigenvalue of the killed kernel from a dense symmetric solve.
double dense_restricted_root(const ReversibleChain& c, const StateSet& a) {
  const auto m = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd s(m, m);
  const auto pi = c.stationary();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto x = a[static_cast<std::size_t>(i)], y = a[static_cast<std::size_t>(j)];
      s(i, j) = std::sqrt(pi[x] / pi[y]) * c.entry(x, y);
    }
  }
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return std::max(0.0, solver.eigenvalues().maxCoeff());
}

}  // namespace

TEST_CASE("rho_d") {
  CHECK(rho(3) == doctest::Approx(0.9428090415820634).epsilon(1e-15));
  CHECK(rho(14) == doctest::Approx(2.0 * std::sqrt(13.0) / 14.0).epsilon(1e-15));
  CHECK_THROWS_AS(rho(1), Error);
}

TEST_CASE("Petersen spectrum, dense and iterative") {
  const auto g = petersen_graph();
  const auto dense = graph_spectrum(g, SpectrumMode::dense_full);
  REQUIRE(dense.eigenvalues.size() == 10);
  CHECK(dense.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i <= 5; ++i) CHECK(dense.eigenvalues[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  for (int i = 6; i < 10; ++i) CHECK(dense.eigenvalues[i] == doctest::Approx(-2.0 / 3).epsilon(1e-12));
  CHECK(dense.lambda_star == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(dense.t_rel == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(dense.trace_defect < 1e-12);
  CHECK(dense.rho_d.has_value());

  const auto it = graph_spectrum(g, SpectrumMode::iterative_extremal);
  CHECK(it.lambda2 == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(it.lambda_min == doctest::Approx(-2.0 / 3).epsilon(1e-9));
  CHECK(it.eigenvalues.empty());

  CHECK(classify_ramanujan(g, dense).classification == RamanujanClass::ramanujan);
}

TEST_CASE("Q3 is bipartite Ramanujan") {
  const auto g = hypercube_graph(3);
  for (auto mode : {SpectrumMode::dense_full, SpectrumMode::iterative_extremal}) {
    const auto s = graph_spectrum(g, mode);
    CHECK(s.lambda_min == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(s.lambda_min_nontrivial == doctest::Approx(-1.0 / 3).epsilon(1e-9));
    CHECK(s.lambda2 == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(s.lambda_star == doctest::Approx(1.0));
    CHECK(std::isinf(s.t_rel));
    const auto r = classify_ramanujan(g, s);
    CHECK(r.classification == RamanujanClass::ramanujan);
    CHECK(r.bipartite);
  }
}

TEST_CASE("dense and iterative extremal eigenvalues agree on random graphs") {
  CounterRng rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const auto g = testgen::random_regular(rng, 30 + 2 * rng.below(60), 3 + rng.below(2));
    if (!is_connected(g)) continue;
    const auto dense = graph_spectrum(g, SpectrumMode::dense_full);
    const auto it = graph_spectrum(g, SpectrumMode::iterative_extremal);
    CHECK(it.lambda2 == doctest::Approx(dense.lambda2).epsilon(1e-7));
    CHECK(it.lambda_min == doctest::Approx(dense.lambda_min).epsilon(1e-7));
    CHECK(dense.trace_defect < 1e-9);
    CHECK(dense.lambda2 <= 1.0 + 1e-12);
    CHECK(dense.lambda_min >= -1.0 - 1e-12);
  }
}

TEST_CASE("irregular and small-degree graphs are not classified") {
  const auto path = Graph(3, {{0, 1}, {1, 2}}, "path");
  const auto s = graph_spectrum(path, SpectrumMode::dense_full);
  CHECK_THROWS_AS(classify_ramanujan(path, s), Error);
  const auto cyc = cycle_graph(5);
  CHECK_THROWS_AS(classify_ramanujan(cyc, graph_spectrum(cyc, SpectrumMode::dense_full)), Error);
}

TEST_CASE("Poincare bound values") {
  CHECK(poincare_bound(10, 2.0 / 3, 0.25) == doctest::Approx(6.258459376336695).epsilon(1e-13));
  CHECK(poincare_bound(1000000, 0.94280, 0.25) == doctest::Approx(140.81313464161664).epsilon(1e-13));
  CHECK(poincare_bound(1000000, rho(3), 0.25) == doctest::Approx(140.8360651239936).epsilon(1e-13));
  CHECK(poincare_bound(10, 0.0, 0.25) == 0.0);
  CHECK_THROWS_AS(poincare_bound(10, 1.0, 0.25), Error);
}

TEST_CASE("restricted Perron roots: closed forms") {
  const auto k4 = srw_chain(complete_graph(4));
  const auto single = restricted_top_eig(k4, {0}, -1.0 / 3);
  CHECK(single.lambda_a == doctest::Approx(0.0));
  CHECK(single.refined_rhs == doctest::Approx(0.0));
  CHECK(single.refined_pass);
  CHECK_FALSE(single.paper_applicable);

  const auto pair = restricted_top_eig(k4, {0, 1}, -1.0 / 3);
  CHECK(pair.lambda_a == doctest::Approx(1.0 / 3).epsilon(1e-10));
  CHECK(pair.refined_rhs == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(pair.refined_pass);

  const auto c6 = srw_chain(cycle_graph(6));
  CHECK(restricted_top_eig(c6, {0, 1, 2}).lambda_a == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK_THROWS_AS(restricted_top_eig(k4, {}), Error);
  CHECK_THROWS_AS(restricted_top_eig(k4, {0, 1, 2, 3}), Error);
}

TEST_CASE("restricted roots match a dense solve and obey the refined bound") {
  CounterRng rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testgen::connected_graph(rng, 4 + rng.below(60), rng.below(60));
    const auto c = srw_chain(g);
    const auto s = spectrum(c, SpectrumMode::dense_full);
    const auto a = testgen::random_set(rng, c.size(), std::min<std::size_t>(c.size(), 500));
    const auto e = restricted_top_eig(c, a, s.lambda2);
    CHECK(e.lambda_a == doctest::Approx(dense_restricted_root(c, a)).epsilon(1e-8));
    CHECK(e.lambda_a <= s.lambda2 + (1.0 - s.lambda2) * e.pi_a + kRestrictedTolerance);
    CHECK(e.refined_pass);
    if (s.lambda2 >= 0.0) CHECK(e.paper_pass);
    // A subset never has a larger root.
    StateSet half(a.begin(), a.begin() + static_cast<std::ptrdiff_t>((a.size() + 1) / 2));
    CHECK(restricted_top_eig(c, half).lambda_a <= e.lambda_a + kRestrictedTolerance);
  }
}

TEST_CASE("comparison of a chain with itself is tight") {
  const auto c = srw_chain(build_random_regular(40, 3, 9));
  const auto cr = compare_restricted(c, c, {0, 1, 2, 5, 9});
  CHECK(cr.c1 == doctest::Approx(1.0));
  CHECK(cr.c2 == doctest::Approx(1.0));
  CHECK(cr.lambda_first == doctest::Approx(cr.lambda_second));
  CHECK(cr.pass);
}

TEST_CASE("comparison of P^2 against P^4") {
  const auto c = srw_chain(prism_graph(5));
  const auto p2 = power_chain(c, 2);
  const auto p4 = power_chain(c, 4);
  CounterRng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testgen::random_set(rng, c.size(), 6);
    const auto cr = compare_restricted(p2, p4, a);
    CHECK(cr.pass);
    CHECK(cr.lambda_first <= cr.rhs + 1e-9);
  }
  // P is not dominated by P^2 where P^2 vanishes, so the comparison must refuse.
  const auto c4 = srw_chain(cycle_graph(4));
  CHECK_THROWS_AS(compare_restricted(c4, power_chain(c4, 2), {0, 1}), Error);
}
