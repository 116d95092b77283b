#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ramcut/graph.hpp"
#include "ramcut/hitting.hpp"

namespace ramcut {

/// Regeneration structure of a trajectory: T_0 = 0 and T_{i+1} is the first
/// time at distance exactly k from the anchor X_{T_i}. A time j in block i is
/// good when X_j is the anchor or has at least deg(X_j) - 1 neighbours strictly
/// farther from the anchor than X_j. u[i] counts non-good times of complete block i.
struct Regenerations {
  std::vector<std::size_t> times;
  std::vector<std::uint8_t> good;
  std::vector<std::size_t> u;
};

struct WalkTrace {
  std::string graph;
  Vertex start = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<Vertex> positions;
  Regenerations regen;
};

/// SRW path of `steps` steps from v with regenerations tracked online.
WalkTrace simulate_walk(const Graph& g, Vertex v, std::size_t steps, std::size_t k, std::uint64_t seed,
                        std::uint64_t stream = 0);

/// SRW from v run until `blocks` regenerations have completed (or max_steps).
WalkTrace simulate_blocks(const Graph& g, Vertex v, std::size_t blocks, std::size_t k, std::uint64_t seed,
                          std::uint64_t stream = 0, std::size_t max_steps = 1'000'000'000);

/// Recomputes the regeneration structure from positions alone.
Regenerations rederive(const Graph& g, std::span<const Vertex> positions, std::size_t k);

struct BlockStatistics {
  std::size_t blocks = 0;
  double mean_t1 = 0.0;
  double var_t1 = 0.0;
  double stderr_t1 = 0.0;
  /// survival[l] = empirical P[U_0 > l], l = 0 .. max U.
  std::vector<double> u_survival;
  bool u_identically_zero = false;
  /// Least-squares slope of log survival, as a per-step ratio; 0 when U is degenerate.
  double decay_ratio = 0.0;
  bool monotone = true;
  bool eventually_below_one = true;
};

inline constexpr std::size_t kMinBlocks = 1000;

BlockStatistics block_statistics(std::span<const WalkTrace> traces, std::size_t min_blocks = kMinBlocks);

struct YKernelRow {
  Vertex anchor = 0;
  std::size_t trials = 0;
  std::vector<Vertex> sphere;
  std::vector<double> exact;
  std::vector<double> empirical;
  double tv = 0.0;
  /// max over sphere vertices of |empirical - exact| / standard error.
  double max_z = 0.0;
};

std::vector<YKernelRow> empirical_y_kernel(const Graph& g, std::size_t k, std::size_t trials, std::uint64_t seed,
                                           std::span<const Vertex> anchors);

/// ceil((d-2) t / (d k)).
std::size_t tau(std::size_t t, std::size_t d, std::size_t k);

struct EscapeRow {
  std::size_t set_index = 0;
  Vertex start = 0;
  /// P_a[T_{A^c} > t + s] for SRW.
  double lhs = 0.0;
  /// P_a[Y_1..Y_tau in A] for the Y-chain.
  double y_term = 0.0;
  /// Same for the G(k) walk kernel K.
  double k_term = 0.0;
  /// Monte Carlo P_a[T_tau > t + s] and its standard error.
  double mc_term = 0.0;
  double mc_stderr = 0.0;
  bool pass = false;
};

struct EscapeTransfer {
  std::size_t k = 0;
  double alpha = 0.0;
  std::size_t t = 0;
  std::size_t s = 0;
  std::size_t tau = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<StateSet> sets;
  std::vector<EscapeRow> rows;
  double max_lhs = 0.0;
  double max_y = 0.0;
  double max_mc = 0.0;
  /// max_{A,a} P_a[T_{A^c} > t], the right side of the Y-chain comparison.
  double max_escape_t = 0.0;
  /// max_y / max_escape_t and its t-th root.
  double y_ratio = 0.0;
  double y_ratio_per_step = 0.0;
  /// max |y_term - k_term| (zero when all radius-k balls are trees).
  double y_k_defect = 0.0;
  bool pass = true;
};

inline constexpr double kMonteCarloSigmas = 4.0;

/// Uses the `max_sets` candidate sets with the largest SRW survival at t + s.
EscapeTransfer escape_transfer_experiment(const Graph& g, std::size_t k, double alpha, std::size_t t, std::size_t s,
                                          std::size_t trials, std::uint64_t seed, std::size_t max_sets = 16,
                                          const HitOptions& options = {});

}  // namespace ramcut
