#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ramcut/graph.hpp"

namespace ramcut {

enum class Periodicity { aperiodic, bipartite_periodic };

const char* to_string(Periodicity p);

/// Finite reversible Markov chain: row-stochastic kernel plus stationary law.
///
/// The constructor checks that every row sums to 1 (within 1e-12) and that
/// the stationary vector is a probability vector, and records the largest
/// detailed-balance defect |pi(x)P(x,y) - pi(y)P(y,x)|. Periodicity is read
/// off the support: period 2 iff some component of the support graph is
/// bipartite (a positive diagonal entry rules this out for its component).
class ReversibleChain {
 public:
  using Kernel = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  static constexpr double kRowSumTolerance = 1e-12;
  static constexpr double kBalanceTolerance = 1e-12;

  ReversibleChain(Kernel kernel, std::vector<double> stationary, std::string source);

  std::size_t size() const { return stationary_.size(); }
  const Kernel& kernel() const { return kernel_; }
  std::span<const double> stationary() const { return stationary_; }
  double entry(std::size_t x, std::size_t y) const { return kernel_.coeff(static_cast<int>(x), static_cast<int>(y)); }
  bool reversible() const { return balance_defect_ <= kBalanceTolerance; }
  double balance_defect() const { return balance_defect_; }
  Periodicity periodicity() const { return periodicity_; }
  std::size_t component_count() const { return components_; }
  const std::string& source() const { return source_; }

 private:
  Kernel kernel_;
  std::vector<double> stationary_;
  double balance_defect_ = 0.0;
  Periodicity periodicity_ = Periodicity::aperiodic;
  std::size_t components_ = 1;
  std::string source_;
};

/// Simple random walk: P(x,y) = 1/deg(x) on edges, pi proportional to degree.
ReversibleChain srw_chain(const Graph& g);

/// One step mu -> mu P.
void step(const ReversibleChain& c, std::span<const double> mu, std::span<double> out);
/// mu0 P^t.
std::vector<double> evolve(const ReversibleChain& c, std::span<const double> mu0, std::size_t t);
std::vector<double> point_mass(std::size_t n, std::size_t x);

struct Distances {
  double tv = 0.0;
  double l2sq = 0.0;
};

/// TV and squared L2(pi) distance of mu from pi.
Distances distances_to_stationary(const ReversibleChain& c, std::span<const double> mu);
/// Distances of P^t(x, .) from pi.
Distances distances(const ReversibleChain& c, std::size_t x, std::size_t t);

struct MixingOptions {
  std::size_t max_steps = 100000;
  /// All starts are used up to this many states; beyond it a farthest-point sample.
  std::size_t exact_start_limit = 5000;
  std::size_t sampled_starts = 64;
  /// Keep per-start TV/L2 curves for this many starts (CSV output).
  std::size_t curves_kept = 0;
  bool parallel = false;
};

struct StartCurve {
  std::size_t start = 0;
  std::vector<double> tv;
  std::vector<double> l2sq;
};

struct CutoffRatio {
  double eps = 0.0;
  std::size_t t_eps = 0;
  std::size_t t_complement = 0;
  double ratio = 0.0;
};

struct MixingProfile {
  std::vector<double> eps;
  /// Least t with worst-start TV <= eps; nullopt if not reached within max_steps.
  std::vector<std::optional<std::size_t>> t_mix;
  /// Worst-start TV d(t), for t = 0 .. (last computed step).
  std::vector<double> worst_tv;
  std::vector<std::size_t> starts;
  /// True when only a sample of starts was examined (the profile then bounds from below).
  bool lower_bound_profile = false;
  /// For each eps < 1/2 in the grid: t_mix(eps) / t_mix(1 - eps).
  std::vector<CutoffRatio> cutoff_ratios;
  /// TV and L2 were nonincreasing in t along every examined start.
  bool monotone = true;
  std::vector<StartCurve> curves;

  std::optional<std::size_t> t_mix_at(double e) const;
};

/// Worst-start total-variation mixing times. Throws on periodic chains.
MixingProfile mixing_profile(const ReversibleChain& c, std::span<const double> eps_grid,
                             const MixingOptions& options = {});

/// t_mix for an arbitrary eps, using the same machinery (single-eps grid).
std::optional<std::size_t> mixing_time(const ReversibleChain& c, double eps, const MixingOptions& options = {});

/// Starts chosen by farthest-point sampling on the support graph, beginning at state 0.
std::vector<std::size_t> farthest_point_starts(const ReversibleChain& c, std::size_t count);

/// P^t as a chain with the same stationary law. Dense product; refuses n > max_states.
ReversibleChain power_chain(const ReversibleChain& c, std::size_t t, std::size_t max_states = 4000);

}  // namespace ramcut
