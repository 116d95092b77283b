#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ramcut/chain.hpp"
#include "ramcut/graph.hpp"

namespace ramcut {

enum class SpectrumMode { dense_full, iterative_extremal };

const char* to_string(SpectrumMode m);

struct SpectrumOptions {
  std::size_t dense_budget = 3000;
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
  std::uint64_t seed = 0x5eed;
  /// Degree of the underlying regular graph, when known; enables rho_d.
  std::optional<std::size_t> degree;
};

struct SpectrumSummary {
  SpectrumMode method = SpectrumMode::dense_full;
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  /// Smallest eigenvalue that is not -1 (within 1e-9).
  double lambda_min_nontrivial = 0.0;
  /// max{|a| : a eigenvalue other than the top one}.
  double lambda_star = 0.0;
  /// 1 / (1 - lambda_star); +inf when lambda_star = 1.
  double t_rel = 0.0;
  std::optional<std::size_t> degree;
  std::optional<double> rho_d;
  /// Full spectrum in descending order (dense mode only).
  std::vector<double> eigenvalues;
  /// Dense mode: max of |sum(a) - tr P| and |sum(a^2) - tr P^2|.
  double trace_defect = 0.0;
  /// Iterative mode: ||S v - a v|| for the lambda2 / lambda_min eigenpairs.
  double residual_lambda2 = 0.0;
  double residual_lambda_min = 0.0;
  std::size_t iterations = 0;
};

/// 2 sqrt(d-1) / d, the spectral radius of simple random walk on the d-regular tree.
double rho(std::size_t d);

/// Eigenvalues of a reversible chain, computed on the symmetrization
/// D^{1/2} P D^{-1/2} (D = diag(pi)). Dense mode diagonalizes fully; iterative
/// mode runs deflated power iteration for lambda2 and lambda_min.
SpectrumSummary spectrum(const ReversibleChain& c, SpectrumMode mode, const SpectrumOptions& options = {});

/// Convenience: SRW chain of g with the degree filled in when g is regular.
SpectrumSummary graph_spectrum(const Graph& g, SpectrumMode mode, SpectrumOptions options = {});

enum class RamanujanClass { ramanujan, one_sided_at_margin, neither };

const char* to_string(RamanujanClass c);

struct RamanujanReport {
  RamanujanClass classification = RamanujanClass::neither;
  std::size_t degree = 0;
  double rho_d = 0.0;
  /// lambda2 / rho_d; <= 1 for one-sided Ramanujan graphs.
  double margin = 0.0;
  double min_nontrivial = 0.0;
  double max_nontrivial_abs = 0.0;
  bool bipartite = false;
};

inline constexpr double kRamanujanTolerance = 1e-9;

RamanujanReport classify_ramanujan(const Graph& g, const SpectrumSummary& s);

/// Upper bound (1/2) log(n / eps^2) / log(1/lambda) on t_mix(eps) from the
/// L2 / Poincare estimate. Returns 0 for lambda = 0 (the chain mixes in one step).
double poincare_bound(std::size_t n, double lambda_star, double eps);

using StateSet = std::vector<std::size_t>;

/// Sorted, duplicate-free copy; throws if empty, out of range, or all states.
StateSet normalize_set(const ReversibleChain& c, StateSet a);
double set_mass(const ReversibleChain& c, const StateSet& a);

struct RestrictedEig {
  double lambda_a = 0.0;
  double pi_a = 0.0;
  std::size_t iterations = 0;
  /// Perron vector on A (same order as the set), max-normalized.
  std::vector<double> perron;
  /// lambda(A) <= lambda2 + pi(A): asserted only when lambda2 >= 0.
  std::optional<double> lambda2;
  double paper_rhs = 0.0;
  bool paper_applicable = false;
  bool paper_pass = true;
  /// lambda(A) <= lambda2 + (1 - lambda2) pi(A): asserted always.
  double refined_rhs = 0.0;
  bool refined_pass = true;
};

inline constexpr double kRestrictedTolerance = 1e-9;

/// Perron root of the killed kernel P_A by power iteration on (I + P_A)/2 with
/// nonnegative iterates. When lambda2 is given the two upper bounds in terms
/// of lambda2 and pi(A) are evaluated as well.
RestrictedEig restricted_top_eig(const ReversibleChain& c, const StateSet& a,
                                 std::optional<double> lambda2 = std::nullopt);

struct ComparisonReport {
  double c1 = 0.0;
  double c2 = 0.0;
  double lambda_first = 0.0;
  double lambda_second = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// lambda_{P1}(A) <= C1 C2^2 lambda_{P2}(A), with C1 = max P1/P2 over the
/// support of P1 and C2 the largest ratio of stationary masses either way.
ComparisonReport compare_restricted(const ReversibleChain& first, const ReversibleChain& second,
                                    const StateSet& a);

}  // namespace ramcut
