#include <algorithm>
#include <string>

#include "ramcut/error.hpp"
#include "ramcut/graph.hpp"
#include "ramcut/rng.hpp"

namespace ramcut {

Graph complete_graph(std::size_t n) {
  if (n < 2) throw Error("complete: need n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) edges.push_back({u, v});
  }
  return Graph(n, std::move(edges), "named:complete(" + std::to_string(n) + ")");
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw Error("cycle: need n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) edges.push_back({u, static_cast<Vertex>((u + 1) % n)});
  return Graph(n, std::move(edges), "named:cycle(" + std::to_string(n) + ")");
}

Graph hypercube_graph(std::size_t dim) {
  if (dim < 1 || dim > 24) throw Error("hypercube: need 1 <= dim <= 24, got " + std::to_string(dim));
  const std::size_t n = std::size_t{1} << dim;
  std::vector<Edge> edges;
  for (Vertex u = 0; u < n; ++u) {
    for (std::size_t b = 0; b < dim; ++b) {
      const auto v = static_cast<Vertex>(u ^ (1u << b));
      if (u < v) edges.push_back({u, v});
    }
  }
  return Graph(n, std::move(edges), "named:hypercube(" + std::to_string(dim) + ")");
}

Graph petersen_graph() {
  std::vector<Edge> edges;
  for (Vertex i = 0; i < 5; ++i) {
    edges.push_back({i, (i + 1) % 5});
    edges.push_back({i, i + 5});
    edges.push_back({5 + i, 5 + (i + 2) % 5});
  }
  return Graph(10, std::move(edges), "named:petersen");
}

Graph prism_graph(std::size_t m) {
  if (m < 3) throw Error("prism: need m >= 3, got " + std::to_string(m));
  std::vector<Edge> edges;
  for (Vertex i = 0; i < m; ++i) {
    const auto j = static_cast<Vertex>((i + 1) % m);
    edges.push_back({i, j});
    edges.push_back({static_cast<Vertex>(m + i), static_cast<Vertex>(m + j)});
    edges.push_back({i, static_cast<Vertex>(m + i)});
  }
  return Graph(2 * m, std::move(edges), "named:prism(" + std::to_string(m) + ")");
}

Graph build_named(std::string_view name, std::size_t size) {
  if (name == "complete") return complete_graph(size);
  if (name == "cycle") return cycle_graph(size);
  if (name == "hypercube") return hypercube_graph(size);
  if (name == "petersen") return petersen_graph();
  if (name == "prism") return prism_graph(size == 0 ? 3 : size);
  throw Error("unknown graph name '" + std::string(name) + "'");
}

namespace {

// Mutable adjacency used while switching edges.
struct WorkingGraph {
  std::vector<std::vector<Vertex>> adj;
  std::vector<Edge> edges;

  bool has(Vertex a, Vertex b) const {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  }
  void unlink(Vertex a, Vertex b) {
    std::erase(adj[a], b);
    std::erase(adj[b], a);
  }
  void link(Vertex a, Vertex b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
};

// Some edge lying on a cycle of length < min_girth, scanning BFS roots from `start`.
std::optional<Edge> find_short_cycle_edge(const WorkingGraph& g, std::size_t min_girth, Vertex& start) {
  const std::size_t n = g.adj.size();
  const auto depth = static_cast<std::int32_t>((min_girth - 1) / 2);
  std::vector<std::int32_t> dist(n, kUnreached);
  std::vector<Vertex> parent(n, 0);
  std::vector<Vertex> queue;
  for (std::size_t step = 0; step < n; ++step) {
    const auto s = static_cast<Vertex>((start + step) % n);
    for (Vertex v : queue) dist[v] = kUnreached;
    queue.clear();
    dist[s] = 0;
    parent[s] = s;
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vertex x = queue[head];
      for (Vertex y : g.adj[x]) {
        if (dist[y] == kUnreached) {
          if (dist[x] < depth) {
            dist[y] = dist[x] + 1;
            parent[y] = x;
            queue.push_back(y);
          }
        } else if (y != parent[x] &&
                   static_cast<std::size_t>(dist[x] + dist[y] + 1) < min_girth) {
          start = s;
          return Edge{x, y};
        }
      }
    }
  }
  return std::nullopt;
}

// Length of the shortest a-b path avoiding the edge {a, b}, capped at limit + 1.
std::size_t detour_length(const WorkingGraph& g, Vertex a, Vertex b, std::size_t limit) {
  std::vector<std::pair<Vertex, std::size_t>> frontier{{a, 0}};
  std::vector<Vertex> seen{a};
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const auto [x, d] = frontier[head];
    if (d >= limit) break;
    for (Vertex y : g.adj[x]) {
      if (x == a && y == b) continue;
      if (y == b) return d + 1;
      if (std::find(seen.begin(), seen.end(), y) == seen.end()) {
        seen.push_back(y);
        frontier.emplace_back(y, d + 1);
      }
    }
  }
  return limit + 1;
}

void remove_short_cycles(WorkingGraph& g, std::size_t min_girth, CounterRng& rng) {
  const std::size_t n = g.adj.size();
  const std::size_t max_switches = 1000 * n;
  Vertex start = 0;
  std::size_t tries = 0;
  while (auto bad = find_short_cycle_edge(g, min_girth, start)) {
    const Vertex a = bad->u, b = bad->v;
    bool done = false;
    while (!done) {
      if (++tries > max_switches) {
        throw Error("random_regular: could not reach girth " + std::to_string(min_girth) +
                    " after " + std::to_string(max_switches) + " switch attempts");
      }
      const auto pick = static_cast<std::size_t>(rng.below(g.edges.size()));
      Vertex c = g.edges[pick].u, e = g.edges[pick].v;
      if (rng.below(2) == 1) std::swap(c, e);
      if (c == a || c == b || e == a || e == b || g.has(a, c) || g.has(b, e)) continue;
      g.unlink(a, b);
      g.unlink(c, e);
      g.link(a, c);
      g.link(b, e);
      // A new short cycle would have to pass through one of the two new edges.
      if (detour_length(g, a, c, min_girth - 2) + 1 >= min_girth &&
          detour_length(g, b, e, min_girth - 2) + 1 >= min_girth) {
        auto ab = std::find(g.edges.begin(), g.edges.end(), Edge{std::min(a, b), std::max(a, b)});
        *ab = {std::min(a, c), std::max(a, c)};
        g.edges[pick] = {std::min(b, e), std::max(b, e)};
        done = true;
      } else {
        g.unlink(a, c);
        g.unlink(b, e);
        g.link(a, b);
        g.link(c, e);
      }
    }
  }
}

// One pass of sequential suitable pairing; false when it gets stuck.
bool steger_wormald(WorkingGraph& work, std::size_t n, std::size_t d, CounterRng& rng) {
  std::vector<Vertex> points(n * d);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<Vertex>(i / d);
  work.adj.assign(n, {});
  work.edges.clear();
  std::size_t remaining = points.size();
  while (remaining > 0) {
    bool paired = false;
    for (std::size_t tries = 0; tries < 100 * remaining && !paired; ++tries) {
      const auto i = static_cast<std::size_t>(rng.below(remaining));
      const auto j = static_cast<std::size_t>(rng.below(remaining));
      const Vertex a = points[i], b = points[j];
      if (i == j || a == b || work.has(a, b)) continue;
      work.link(a, b);
      work.edges.push_back({std::min(a, b), std::max(a, b)});
      std::swap(points[std::max(i, j)], points[remaining - 1]);
      std::swap(points[std::min(i, j)], points[remaining - 2]);
      remaining -= 2;
      paired = true;
    }
    if (!paired) return false;
  }
  return true;
}

}  // namespace

Graph build_random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                           std::optional<std::size_t> min_girth) {
  if (d < 2) throw Error("random_regular: need d >= 2, got " + std::to_string(d));
  if (d >= n) throw Error("random_regular: need d < n (d=" + std::to_string(d) + ", n=" + std::to_string(n) + ")");
  if ((n * d) % 2 != 0) {
    throw Error("random_regular: n*d must be even (n=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
  CounterRng rng(seed, 0x5261'6e64'5265'67ULL);
  const std::size_t max_attempts = 10 * n;
  std::vector<Vertex> points(n * d);
  WorkingGraph work;
  bool simple = false;
  std::size_t attempt = 0;
  for (; attempt < max_attempts && !simple; ++attempt) {
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<Vertex>(i / d);
    for (std::size_t i = points.size() - 1; i > 0; --i) {
      std::swap(points[i], points[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    work.adj.assign(n, {});
    work.edges.clear();
    simple = true;
    for (std::size_t i = 0; i < points.size() && simple; i += 2) {
      const Vertex a = points[i], b = points[i + 1];
      if (a == b || work.has(a, b)) {
        simple = false;
      } else {
        work.link(a, b);
        work.edges.push_back({std::min(a, b), std::max(a, b)});
      }
    }
  }
  // Large d makes simple pairings rare; fall back to pairing only suitable points.
  for (std::size_t restart = 0; !simple && restart < max_attempts; ++restart) {
    simple = steger_wormald(work, n, d, rng);
  }
  if (!simple) {
    throw Error("random_regular: no simple pairing after " + std::to_string(attempt) + " attempts");
  }
  std::string tag = "random-regular(n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                    ",seed=" + std::to_string(seed);
  if (min_girth && *min_girth > 3) {
    remove_short_cycles(work, *min_girth, rng);
    tag += ",min_girth=" + std::to_string(*min_girth);
  }
  tag += ")";
  return Graph(n, std::move(work.edges), std::move(tag));
}

}  // namespace ramcut
