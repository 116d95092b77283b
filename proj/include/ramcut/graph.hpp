#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ramcut {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct DegreeProfile {
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  bool regular = false;
};

/// Immutable undirected simple graph stored as sorted adjacency lists.
///
/// Construction validates the edge list: endpoints in range, no self-loops and
/// no parallel edges. Edges are normalized to u < v and sorted, so two graphs
/// with the same edge set compare equal regardless of input order.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t n, std::vector<Edge> edges, std::string provenance);

  std::size_t vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Vertex> neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  bool adjacent(Vertex a, Vertex b) const;

  const DegreeProfile& degree_profile() const { return profile_; }
  /// The common degree of a regular graph, 0 otherwise.
  std::size_t regular_degree() const { return profile_.regular ? profile_.max_degree : 0; }
  const std::string& provenance() const { return provenance_; }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> targets_;
  DegreeProfile profile_;
  std::string provenance_;
};

inline constexpr std::int32_t kUnreached = -1;
inline constexpr std::int32_t kNoDepthLimit = std::numeric_limits<std::int32_t>::max();

std::vector<std::int32_t> bfs_distances(const Graph& g, Vertex source,
                                        std::int32_t max_depth = kNoDepthLimit);

// Reusable truncated BFS: resets only the vertices it touched, so repeated
// small-ball searches on a large graph cost O(ball) each.
class LocalBfs {
 public:
  explicit LocalBfs(const Graph& g);
  /// Visits every vertex within `max_depth` of `source`; returns them in BFS order.
  std::span<const Vertex> run(Vertex source, std::int32_t max_depth);
  /// Distance found by the last run, or kUnreached.
  std::int32_t distance(Vertex v) const { return dist_[v]; }

 private:
  const Graph* g_;
  std::vector<std::int32_t> dist_;
  std::vector<Vertex> order_;
};

std::vector<std::uint32_t> component_labels(const Graph& g);
std::size_t component_count(const Graph& g);
bool is_connected(const Graph& g);
/// True when every connected component is bipartite.
bool is_bipartite(const Graph& g);
/// Proper 2-colouring (0/1 per vertex) when bipartite.
std::optional<std::vector<std::uint8_t>> bipartition(const Graph& g);
/// Length of the shortest cycle; nullopt for forests.
std::optional<std::size_t> girth(const Graph& g);
std::size_t diameter(const Graph& g);
/// m - n + (number of components).
std::size_t cycle_rank(const Graph& g);

struct CycleBudget {
  std::size_t max_edges = 64;
  std::size_t max_rank = 20;
};

/// Exact number of simple cycles in the graph spanned by `edges`, or nullopt
/// when the edge set exceeds the budget.
std::optional<std::uint64_t> count_simple_cycles(std::span<const Edge> edges, CycleBudget budget = {});

/// Ball of radius k around a vertex, with level sizes and tree-excess data.
///
/// `relevant_edges` are the edges with at least one endpoint in B_{k-1}: the
/// edges a walk started at the center can traverse before first reaching the
/// sphere D_k. `paper_t` = relevant_edges - |B_k|; `excess` = paper_t + 1 is the
/// number of independent cycles of that subgraph (0 exactly when it is a tree).
struct BallStats {
  Vertex center = 0;
  std::size_t radius = 0;
  std::vector<std::size_t> levels;
  std::size_t ball_size = 0;
  std::size_t relevant_edges = 0;
  std::int64_t paper_t = 0;
  std::size_t excess = 0;
  std::size_t cycle_rank = 0;
  std::optional<std::uint64_t> simple_cycle_count;
};

BallStats ball_stats(const Graph& g, Vertex center, std::size_t radius, CycleBudget budget = {});

struct Assumption1Report {
  std::size_t radius = 0;
  std::size_t max_excess = 0;
  std::size_t max_cycle_rank = 0;
  /// Max over centers of the exact simple-cycle count, or of 2^rank - 1 where
  /// the ball exceeded the enumeration budget.
  std::uint64_t max_simple_cycles = 0;
  bool cycles_exact = true;
  Vertex worst_center = 0;
  std::size_t graph_cycle_rank = 0;
};

Assumption1Report assumption1_scan(const Graph& g, std::size_t radius, CycleBudget budget = {});

/// G(k): same vertices, u ~ v iff dist(u, v) == k. Warns when the result has no edges.
Graph inflate(const Graph& g, std::size_t k);

// Builders.
Graph complete_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph hypercube_graph(std::size_t dim);
Graph petersen_graph();
/// C_m x K_2; the default m = 3 is the triangular prism.
Graph prism_graph(std::size_t m = 3);
/// Named family lookup: complete, cycle, hypercube, petersen, prism.
Graph build_named(std::string_view name, std::size_t size = 0);

/// Simple d-regular graph from the pairing model, restarting on loops or
/// multi-edges (at most 10n attempts). With `min_girth`, short cycles are then
/// removed by double-edge switches that never create a new short cycle.
Graph build_random_regular(std::size_t n, std::size_t d, std::uint64_t seed,
                           std::optional<std::size_t> min_girth = std::nullopt);

bool is_prime(std::uint64_t x);
/// Legendre symbol (a | p) for an odd prime p: -1, 0 or 1.
int legendre_symbol(std::int64_t a, std::uint64_t p);

/// Lubotzky-Phillips-Sarnak Cayley graph X^{p,q}.
Graph build_lps(std::uint64_t p, std::uint64_t q);

// Edge-list text format: "n m" header, then one "u v" pair per line (0-indexed).
Graph read_edge_list(std::istream& in, std::string provenance = "file");
Graph read_edge_list_file(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::filesystem::path& path, const Graph& g);

}  // namespace ramcut
