#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "ramcut/error.hpp"
#include "ramcut/graph.hpp"

using namespace ramcut;

TEST_CASE("named graphs have the expected shape") {
  const auto p = petersen_graph();
  CHECK(p.vertex_count() == 10);
  CHECK(p.edge_count() == 15);
  CHECK(p.regular_degree() == 3);
  CHECK(girth(p) == 5);
  CHECK(diameter(p) == 2);
  CHECK_FALSE(is_bipartite(p));

  const auto q3 = hypercube_graph(3);
  CHECK(q3.regular_degree() == 3);
  CHECK(is_bipartite(q3));
  CHECK(girth(q3) == 4);
  CHECK(diameter(q3) == 3);

  CHECK(complete_graph(4).regular_degree() == 3);
  CHECK(girth(complete_graph(4)) == 3);
  CHECK(prism_graph(3).vertex_count() == 6);
  CHECK(prism_graph().regular_degree() == 3);
  CHECK(cycle_graph(6).regular_degree() == 2);
  CHECK_FALSE(girth(Graph(3, {{0, 1}, {1, 2}}, "path")).has_value());
  CHECK_THROWS_AS(build_named("nope"), Error);
}

TEST_CASE("edge list round trip") {
  const auto g = build_random_regular(50, 3, 11);
  std::stringstream ss;
  write_edge_list(ss, g);
  const auto back = read_edge_list(ss);
  CHECK(back == g);
}

TEST_CASE("malformed edge lists report the line") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_edge_list(in);
  };
  try {
    parse("3 2\n0 1\n1 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse("3 1\n0 0\n"), ParseError);
  CHECK_THROWS_AS(parse("3 1\n0 5\n"), ParseError);
  CHECK_THROWS_AS(parse("3 2\n0 1\n"), ParseError);
  CHECK_THROWS_AS(parse("3 2\n0 1\n1 0\n"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("random regular graphs are simple, regular and seed-determined") {
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 3 + rng.below(3);
    std::size_t n = 10 + rng.below(90);
    if ((n * d) % 2) ++n;
    const auto seed = rng.next_u64();
    const auto g = build_random_regular(n, d, seed);
    CHECK(g.regular_degree() == d);
    CHECK(g == build_random_regular(n, d, seed));
  }
  CHECK_THROWS_AS(build_random_regular(7, 3, 1), Error);
  CHECK_THROWS_AS(build_random_regular(3, 3, 1), Error);
}

TEST_CASE("girth floor") {
  const auto g = build_random_regular(2000, 3, 2000, 7);
  CHECK(g.regular_degree() == 3);
  REQUIRE(girth(g).has_value());
  CHECK(*girth(g) >= 7);
}

TEST_CASE("LPS graphs") {
  const auto g = build_lps(5, 13);
  CHECK(g.vertex_count() == 2184);
  CHECK(g.regular_degree() == 6);
  CHECK(is_bipartite(g));
  CHECK(is_connected(g));
  CHECK_THROWS_AS(build_lps(7, 13), Error);
  CHECK_THROWS_AS(build_lps(5, 15), Error);
  CHECK(legendre_symbol(13, 17) == 1);
  CHECK(legendre_symbol(5, 13) == -1);
}

TEST_CASE("ball statistics and tree excess") {
  const auto p = petersen_graph();
  const auto s = ball_stats(p, 0, 2);
  CHECK(s.levels == std::vector<std::size_t>{1, 3, 6});
  CHECK(s.excess == 0);
  CHECK(s.paper_t == -1);
  CHECK(s.simple_cycle_count == 0u);

  const auto prism = ball_stats(prism_graph(), 0, 2);
  CHECK(prism.excess == 3);
  CHECK(prism.cycle_rank == 3);
  // K4 has seven simple cycles (four triangles, three squares).
  const auto k4 = complete_graph(4);
  CHECK(count_simple_cycles(k4.edges()) == 7u);
  CHECK(assumption1_scan(p, 2).max_excess == 0);
}

TEST_CASE("inflation joins pairs at distance exactly k") {
  const auto p = petersen_graph();
  const auto g2 = inflate(p, 2);
  CHECK(g2.regular_degree() == 6);
  for (const auto& e : g2.edges()) CHECK(bfs_distances(p, e.u)[e.v] == 2);

  CounterRng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testgen::connected_graph(rng, 5 + rng.below(30), rng.below(20));
    const std::size_t k = 1 + rng.below(3);
    const auto gk = inflate(g, k);
    std::size_t pairs = 0;
    for (Vertex u = 0; u < g.vertex_count(); ++u) {
      const auto dist = bfs_distances(g, u);
      for (Vertex v = u + 1; v < g.vertex_count(); ++v) pairs += dist[v] == static_cast<std::int32_t>(k);
    }
    CHECK(gk.edge_count() == pairs);
  }
  CHECK(inflate(p, 1) == p);
}

TEST_CASE("cycle rank of random connected graphs") {
  CounterRng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testgen::connected_graph(rng, 3 + rng.below(40), rng.below(30));
    CHECK(is_connected(g));
    CHECK(cycle_rank(g) == g.edge_count() + 1 - g.vertex_count());
  }
}
