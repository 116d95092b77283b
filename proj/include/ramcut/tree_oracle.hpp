#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ramcut/graph.hpp"

namespace ramcut {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::size_t kLevelHorizon = 10000;

/// Law of the level (distance from the root) of SRW on the d-regular tree
/// after t steps from the root, as a vector over levels 0..t. With
/// `no_return`, paths that revisit level 0 after time 0 are removed, so the
/// vector then carries mass P[T_0^+ > t].
std::vector<double> level_law(std::size_t d, std::size_t t, bool no_return);

/// Entry k of level_law; 0 when k > t.
double level_distribution(std::size_t d, std::size_t t, std::size_t k, bool no_return);

/// |L_k|: number of tree vertices at distance k from the root.
double level_size(std::size_t d, std::size_t k);

/// P^t(o, v) on the d-regular tree for a vertex v at distance k.
double tree_kernel(std::size_t d, std::size_t t, std::size_t k);

/// Expected time for the level chain to first reach level k from 0.
double tree_regeneration_time(std::size_t d, std::size_t k);

struct Td1Check {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t steps = 0;  // k + 2k^2
  double lhs = 0.0;
  double c0 = 0.0;
  double rhs = 0.0;
  /// Largest c0 for which lhs >= rhs.
  double max_c0 = 0.0;
  bool pass = false;
};

inline constexpr double kTreeSlack = 1e-12;
inline constexpr std::size_t kTd1MaxK = 6;

/// P_0[level at time k+2k^2 is k, no return to 0] against
/// c0 k^-2 2^{k+2k^2} (d-1)^{k^2+k-1} d^{-(k+2k^2)+1}.
Td1Check td1_bound_check(std::size_t d, std::size_t k, double c0 = 0.125);

/// Number of +-1 sequences of length k+2k^2 from 0 to k whose partial sums
/// stay positive after time 0 (dynamic programming).
BigInt count_z_paths(std::size_t k);
/// The same count from the ballot formula C(m-1, j) - C(m-1, j+1), m = k+2k^2, j = (m+k-2)/2.
BigInt ballot_z_paths(std::size_t k);
BigInt binomial(std::size_t n, std::size_t r);
/// M(k) k^2 / 2^{k+2k^2}.
double z_path_ratio(std::size_t k);
/// P_0[T_0^+ > T_k] for simple symmetric walk on Z, by solving the harmonic recurrence.
double z_escape_probability(std::size_t k);

/// 2 sqrt(d(d-1)) / (d-2)^{3/2}.
double diameter_constant(std::size_t d);
/// d/(d-2) log_{d-1} n + c_d Phi^{-1}(eps) sqrt(log_{d-1} n). Not clamped.
double diameter_lower_bound(std::size_t n, std::size_t d, double eps);

/// Standard normal quantile, Wichura's AS241 (PPND16).
double inv_normal_cdf(double p);

struct KernelDomination {
  std::size_t distance = 0;
  double graph_kernel = 0.0;
  double tree_kernel = 0.0;
  bool pass = false;
};

/// P^t(x, y) on a d-regular graph against the tree kernel at distance dist(x, y).
KernelDomination kernel_domination_check(const Graph& g, Vertex x, Vertex y, std::size_t t);

struct TailRow {
  double z = 0.0;
  /// P[level <= mean - z sqrt(t)].
  double lower = 0.0;
  /// P[level >= mean + z sqrt(t)].
  double upper = 0.0;
};

struct Concentration {
  std::size_t d = 0;
  std::size_t t = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> law;
  std::vector<TailRow> tails;
};

Concentration tree_distance_concentration(std::size_t d, std::size_t t);

/// Monte Carlo histogram of the tree level after t steps (walks samples).
std::vector<std::uint64_t> sample_level_histogram(std::size_t d, std::size_t t, std::uint64_t walks,
                                                  std::uint64_t seed);

}  // namespace ramcut
