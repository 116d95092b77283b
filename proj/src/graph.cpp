#include "ramcut/graph.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <unordered_map>

#include "ramcut/error.hpp"
#include "ramcut/log.hpp"

namespace ramcut {

namespace {

WarningSink& warning_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace

void warn(std::string_view message) {
  if (warning_sink()) {
    warning_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink sink) {
  std::swap(sink, warning_sink());
  return sink;
}

Graph::Graph(std::size_t n, std::vector<Edge> edges, std::string provenance)
    : n_(n), edges_(std::move(edges)), provenance_(std::move(provenance)) {
  if (n_ > std::numeric_limits<Vertex>::max()) {
    throw Error("graph: vertex count " + std::to_string(n_) + " too large");
  }
  for (auto& e : edges_) {
    if (e.u >= n_ || e.v >= n_) {
      throw Error("graph: edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                  "} out of range for n=" + std::to_string(n_));
    }
    if (e.u == e.v) {
      throw Error("graph: self-loop at vertex " + std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw Error("graph: parallel edge {" + std::to_string(dup->u) + "," + std::to_string(dup->v) + "}");
  }

  std::vector<std::size_t> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  targets_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    targets_[fill[e.u]++] = e.v;
    targets_[fill[e.v]++] = e.u;
  }
  for (std::size_t v = 0; v < n_; ++v) {
    std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
  }

  if (n_ > 0) {
    const auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
    profile_ = {*lo, *hi, *lo == *hi};
  } else {
    profile_ = {0, 0, true};
  }
}

bool Graph::adjacent(Vertex a, Vertex b) const {
  const auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<std::int32_t> bfs_distances(const Graph& g, Vertex source, std::int32_t max_depth) {
  std::vector<std::int32_t> dist(g.vertex_count(), kUnreached);
  std::vector<Vertex> queue;
  queue.reserve(g.vertex_count());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex x = queue[head];
    if (dist[x] >= max_depth) continue;
    for (Vertex y : g.neighbors(x)) {
      if (dist[y] == kUnreached) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

LocalBfs::LocalBfs(const Graph& g) : g_(&g), dist_(g.vertex_count(), kUnreached) {}

std::span<const Vertex> LocalBfs::run(Vertex source, std::int32_t max_depth) {
  for (Vertex v : order_) dist_[v] = kUnreached;
  order_.clear();
  dist_[source] = 0;
  order_.push_back(source);
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const Vertex x = order_[head];
    if (dist_[x] >= max_depth) continue;
    for (Vertex y : g_->neighbors(x)) {
      if (dist_[y] == kUnreached) {
        dist_[y] = dist_[x] + 1;
        order_.push_back(y);
      }
    }
  }
  return order_;
}

std::vector<std::uint32_t> component_labels(const Graph& g) {
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(g.vertex_count(), kNone);
  std::vector<Vertex> stack;
  std::uint32_t next = 0;
  for (Vertex s = 0; s < g.vertex_count(); ++s) {
    if (label[s] != kNone) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : g.neighbors(x)) {
        if (label[y] == kNone) {
          label[y] = next;
          stack.push_back(y);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t component_count(const Graph& g) {
  const auto labels = component_labels(g);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

bool is_connected(const Graph& g) { return component_count(g) <= 1; }

std::optional<std::vector<std::uint8_t>> bipartition(const Graph& g) {
  constexpr std::uint8_t kUncoloured = 2;
  std::vector<std::uint8_t> colour(g.vertex_count(), kUncoloured);
  std::vector<Vertex> stack;
  for (Vertex s = 0; s < g.vertex_count(); ++s) {
    if (colour[s] != kUncoloured) continue;
    colour[s] = 0;
    stack.push_back(s);
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (Vertex y : g.neighbors(x)) {
        if (colour[y] == kUncoloured) {
          colour[y] = static_cast<std::uint8_t>(1 - colour[x]);
          stack.push_back(y);
        } else if (colour[y] == colour[x]) {
          return std::nullopt;
        }
      }
    }
  }
  return colour;
}

bool is_bipartite(const Graph& g) { return bipartition(g).has_value(); }

std::optional<std::size_t> girth(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::int32_t> dist(n, kUnreached);
  std::vector<Vertex> parent(n, 0);
  std::vector<Vertex> queue;
  for (Vertex s = 0; s < n; ++s) {
    for (Vertex v : queue) dist[v] = kUnreached;
    queue.clear();
    dist[s] = 0;
    parent[s] = s;
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Vertex x = queue[head];
      // Cycles closed from here on have length >= 2 dist(x).
      if (2 * static_cast<std::size_t>(dist[x]) >= best) break;
      for (Vertex y : g.neighbors(x)) {
        if (dist[y] == kUnreached) {
          dist[y] = dist[x] + 1;
          parent[y] = x;
          queue.push_back(y);
        } else if (y != parent[x]) {
          best = std::min(best, static_cast<std::size_t>(dist[x] + dist[y] + 1));
        }
      }
    }
  }
  if (best == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return best;
}

std::size_t diameter(const Graph& g) {
  std::size_t diam = 0;
  for (Vertex s = 0; s < g.vertex_count(); ++s) {
    const auto dist = bfs_distances(g, s);
    for (auto d : dist) {
      if (d == kUnreached) throw Error("diameter: graph is disconnected");
      diam = std::max(diam, static_cast<std::size_t>(d));
    }
  }
  return diam;
}

std::size_t cycle_rank(const Graph& g) {
  return g.edge_count() + component_count(g) - g.vertex_count();
}

std::optional<std::uint64_t> count_simple_cycles(std::span<const Edge> edges, CycleBudget budget) {
  if (edges.size() > budget.max_edges || edges.size() > 64) return std::nullopt;

  // Compact vertex ids.
  std::unordered_map<Vertex, std::uint32_t> local;
  for (const auto& e : edges) {
    local.try_emplace(e.u, static_cast<std::uint32_t>(local.size()));
    local.try_emplace(e.v, static_cast<std::uint32_t>(local.size()));
  }
  const std::size_t nv = local.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ends;
  ends.reserve(edges.size());
  for (const auto& e : edges) ends.emplace_back(local.at(e.u), local.at(e.v));

  // Spanning forest by union-find; each non-forest edge closes a fundamental cycle.
  std::vector<std::uint32_t> uf(nv);
  std::iota(uf.begin(), uf.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> forest(nv);
  std::vector<std::size_t> chords;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const auto [a, b] = ends[i];
    const auto ra = find(a), rb = find(b);
    if (ra == rb) {
      chords.push_back(i);
    } else {
      uf[ra] = rb;
      forest[a].emplace_back(b, i);
      forest[b].emplace_back(a, i);
    }
  }
  if (chords.size() > budget.max_rank) return std::nullopt;
  if (chords.empty()) return 0;

  // Forest path between chord endpoints, as an edge mask.
  auto path_mask = [&](std::uint32_t from, std::uint32_t to) {
    std::vector<std::int64_t> via(nv, -1);
    std::vector<std::uint32_t> prev(nv, 0);
    std::vector<std::uint32_t> stack{from};
    via[from] = -2;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (const auto& [y, ei] : forest[x]) {
        if (via[y] == -1) {
          via[y] = static_cast<std::int64_t>(ei);
          prev[y] = x;
          stack.push_back(y);
        }
      }
    }
    std::uint64_t mask = 0;
    for (auto x = to; x != from; x = prev[x]) mask |= std::uint64_t{1} << via[x];
    return mask;
  };
  std::vector<std::uint64_t> basis;
  for (auto c : chords) {
    basis.push_back(path_mask(ends[c].first, ends[c].second) | (std::uint64_t{1} << c));
  }

  // An element of the cycle space is a simple cycle iff its edges form one
  // connected component in which every vertex has degree 2.
  std::vector<std::uint8_t> deg(nv, 0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> comp(nv);
  auto is_simple_cycle = [&](std::uint64_t mask) {
    touched.clear();
    for (auto m = mask; m != 0; m &= m - 1) {
      const auto [a, b] = ends[static_cast<std::size_t>(__builtin_ctzll(m))];
      if (deg[a]++ == 0) touched.push_back(a);
      if (deg[b]++ == 0) touched.push_back(b);
    }
    bool ok = true;
    for (auto v : touched) ok = ok && deg[v] == 2;
    if (ok) {
      for (auto v : touched) comp[v] = v;
      auto root = [&](std::uint32_t x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
      };
      std::size_t merges = 0;
      for (auto m = mask; m != 0; m &= m - 1) {
        const auto [a, b] = ends[static_cast<std::size_t>(__builtin_ctzll(m))];
        const auto ra = root(a), rb = root(b);
        if (ra != rb) {
          comp[ra] = rb;
          ++merges;
        }
      }
      ok = merges + 1 == touched.size();
    }
    for (auto v : touched) deg[v] = 0;
    return ok;
  };

  // Gray-code walk over all nonzero combinations of the fundamental cycles.
  std::uint64_t count = 0;
  std::uint64_t mask = 0;
  const std::uint64_t total = std::uint64_t{1} << basis.size();
  for (std::uint64_t i = 1; i < total; ++i) {
    mask ^= basis[static_cast<std::size_t>(__builtin_ctzll(i))];
    if (is_simple_cycle(mask)) ++count;
  }
  return count;
}

BallStats ball_stats(const Graph& g, Vertex center, std::size_t radius, CycleBudget budget) {
  if (center >= g.vertex_count()) throw Error("ball_stats: vertex out of range");
  const auto dist = bfs_distances(g, center, static_cast<std::int32_t>(radius));
  BallStats s;
  s.center = center;
  s.radius = radius;
  s.levels.assign(radius + 1, 0);
  for (auto d : dist) {
    if (d != kUnreached) ++s.levels[static_cast<std::size_t>(d)];
  }
  s.ball_size = std::accumulate(s.levels.begin(), s.levels.end(), std::size_t{0});

  std::vector<Edge> relevant;
  if (radius > 0) {
    const auto inner = static_cast<std::int32_t>(radius) - 1;
    for (const auto& e : g.edges()) {
      const bool in_u = dist[e.u] != kUnreached && dist[e.u] <= inner;
      const bool in_v = dist[e.v] != kUnreached && dist[e.v] <= inner;
      if (in_u || in_v) relevant.push_back(e);
    }
  }
  s.relevant_edges = relevant.size();
  s.paper_t = static_cast<std::int64_t>(s.relevant_edges) - static_cast<std::int64_t>(s.ball_size);
  // Relevant edges contain the BFS tree of B_k, so the subgraph is connected
  // and its cycle rank is edges - (vertices - 1).
  s.cycle_rank = s.relevant_edges + 1 - s.ball_size;
  s.excess = static_cast<std::size_t>(s.paper_t + 1);
  s.simple_cycle_count = count_simple_cycles(relevant, budget);
  return s;
}

Assumption1Report assumption1_scan(const Graph& g, std::size_t radius, CycleBudget budget) {
  Assumption1Report r;
  r.radius = radius;
  r.graph_cycle_rank = cycle_rank(g);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto s = ball_stats(g, v, radius, budget);
    std::uint64_t cycles = 0;
    if (s.simple_cycle_count) {
      cycles = *s.simple_cycle_count;
    } else {
      r.cycles_exact = false;
      cycles = s.cycle_rank >= 64 ? std::numeric_limits<std::uint64_t>::max()
                                  : (std::uint64_t{1} << s.cycle_rank) - 1;
    }
    if (s.excess > r.max_excess) r.worst_center = v;
    r.max_excess = std::max(r.max_excess, s.excess);
    r.max_cycle_rank = std::max(r.max_cycle_rank, s.cycle_rank);
    r.max_simple_cycles = std::max(r.max_simple_cycles, cycles);
  }
  return r;
}

Graph inflate(const Graph& g, std::size_t k) {
  if (k == 0) throw Error("inflate: k must be at least 1");
  std::vector<Edge> edges;
  LocalBfs bfs(g);
  const auto depth = static_cast<std::int32_t>(k);
  for (Vertex u = 0; u < g.vertex_count(); ++u) {
    for (Vertex v : bfs.run(u, depth)) {
      if (v > u && bfs.distance(v) == depth) edges.push_back({u, v});
    }
  }
  if (edges.empty()) {
    warn("inflate: no vertex pairs at distance " + std::to_string(k) + "; G(k) is edgeless");
  }
  return Graph(g.vertex_count(), std::move(edges), "inflated(k=" + std::to_string(k) + ")");
}

}  // namespace ramcut
