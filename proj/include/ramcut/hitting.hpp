#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ramcut/chain.hpp"
#include "ramcut/graph.hpp"
#include "ramcut/spectral.hpp"

namespace ramcut {

/// (K_A^t 1)(b) for every b in A, where K_A is `kernel` killed outside A.
/// Entries follow the order of the (sorted) set.
std::vector<double> killed_survival(const ReversibleChain::Kernel& kernel, const StateSet& a, std::size_t t);

/// P_a[T_{A^c} > t]: probability of staying inside A for t steps.
double survival_probability(const ReversibleChain& c, const StateSet& a, std::size_t start, std::size_t t);

/// Survival curve from `start` for t = 0 .. t_max.
std::vector<double> survival_curve(const ReversibleChain& c, const StateSet& a, std::size_t start,
                                   std::size_t t_max);

enum class HitSearch { exact, candidate_family };

const char* to_string(HitSearch s);

struct HitOptions {
  std::size_t max_t = 100000;
  /// Exact search enumerates subsets only up to this many states.
  std::size_t exact_state_limit = 20;
  /// Candidate family: number of seed vertices (farthest-point sample beyond this).
  std::size_t max_centers = 256;
  /// verify_spectral_hit: also run the two quantile-based checks (costly on large chains).
  bool quantile_checks = true;
};

struct HitQuantile {
  std::size_t time = 0;
  HitSearch search = HitSearch::exact;
  /// Candidate-family results only bound the true quantile from below.
  bool lower_bound = false;
  StateSet worst_set;
  std::size_t worst_start = 0;
  std::size_t sets_examined = 0;
};

/// hit_{1-alpha}(eps): least t with max over starts a and sets A with
/// pi(A) <= alpha of P_a[T_{A^c} > t] <= eps. Exact search visits the
/// inclusion-maximal sets only (survival is monotone in A). Returns 0 when no
/// set qualifies.
HitQuantile hit_quantile(const ReversibleChain& c, double alpha, double eps, HitSearch search,
                         const HitOptions& options = {});

/// Small sets of mass <= alpha: balls, greedily grown connected sets, and
/// sets cut from Perron vectors of neighbourhoods of those.
std::vector<StateSet> candidate_small_sets(const ReversibleChain& c, double alpha,
                                           const HitOptions& options = {});

struct SpectralHitRow {
  std::size_t t = 0;
  /// max over a in A of pi_A(a) P_a[T > t]^2.
  double left = 0.0;
  /// ||P_A^t 1||^2 in L2(pi_A), from the backward iterate.
  double middle = 0.0;
  /// Same quantity summed from forward (row) evolutions started at each b.
  double middle_forward = 0.0;
  /// lambda(A)^{2t}.
  double right = 0.0;
  bool left_pass = false;
  bool right_pass = false;
  bool two_way_pass = false;
};

struct LogBoundCheck {
  bool applicable = false;
  std::string skip_reason;
  double rhs = 0.0;
  std::size_t hit = 0;
  bool hit_lower_bound = false;
  bool pass = true;
};

struct ImpliedConstant {
  bool applicable = false;
  std::string skip_reason;
  std::optional<std::size_t> t_mix;
  std::size_t hit = 0;
  double t_rel = 0.0;
  double constant = 0.0;
};

struct HitReport {
  StateSet set;
  double pi_a = 0.0;
  /// Start maximizing the survival at the first listed time, and its curve.
  std::size_t start = 0;
  std::vector<double> survival;
  RestrictedEig restricted;
  std::vector<SpectralHitRow> rows;
  /// hit_{1-alpha}(sqrt(alpha)) <= (1/2)|log_{1/(2 lambda2)} min pi|.
  LogBoundCheck log_bound;
  /// (t_mix(eps + alpha) - hit_{1-alpha}(eps)) / (t_rel log(1/alpha)).
  ImpliedConstant implied;
  bool pass = true;
};

inline constexpr double kSpectralHitTolerance = 1e-10;
inline constexpr double kTwoWayTolerance = 1e-12;

HitReport verify_spectral_hit(const ReversibleChain& c, const StateSet& a, std::span<const std::size_t> t_list,
                              double alpha, double eps, const SpectrumSummary& s,
                              const HitOptions& options = {});

/// Regular degree of g, or an error naming the caller.
std::size_t require_regular(const Graph& g, const char* who);

/// 1 / (d (d-1)^{k-1}), the tree value of a sphere-hitting probability.
double sphere_tree_probability(std::size_t d, std::size_t k);

struct SphereHit {
  Vertex center = 0;
  std::size_t radius = 0;
  std::vector<Vertex> sphere;
  std::vector<double> probability;
  double lower_bound = 0.0;
  double min_probability = 0.0;
  double max_probability = 0.0;
  /// max_u P_v[T_{D_k} = T_u] d (d-1)^{k-1}.
  double c_hat = 0.0;
  double total = 0.0;
  std::size_t excess = 0;
  bool lower_pass = false;
  /// Largest deviation from the tree value.
  double uniform_defect = 0.0;
};

inline constexpr double kSphereLowerSlack = 1e-12;

/// Exact law of the first sphere vertex hit by SRW from v, via the absorbing
/// system on B_{k-1} with D_k absorbing.
SphereHit sphere_hit_distribution(const Graph& g, Vertex v, std::size_t k);

/// E_v[T_1]: expected time for SRW from v to reach distance k.
double expected_regeneration_time(const Graph& g, Vertex v, std::size_t k);

/// Y-chain kernel W: row x is the sphere-hitting law from x at radius k.
ReversibleChain::Kernel y_kernel(const Graph& g, std::size_t k);

struct WvsK {
  std::size_t radius = 0;
  std::size_t degree = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// Extremes of K(x,y) d (d-1)^{k-1} over inflated edges.
  double min_k_scaled = 0.0;
  double max_k_scaled = 0.0;
  double min_w = 0.0;
  bool k_scaled_pass = false;
  bool w_lower_pass = false;
};

WvsK w_vs_k_report(const Graph& g, std::size_t k);

}  // namespace ramcut
