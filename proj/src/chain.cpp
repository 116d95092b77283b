#include "ramcut/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "ramcut/error.hpp"

namespace ramcut {

const char* to_string(Periodicity p) {
  return p == Periodicity::aperiodic ? "aperiodic" : "bipartite-periodic";
}

ReversibleChain::ReversibleChain(Kernel kernel, std::vector<double> stationary, std::string source)
    : kernel_(std::move(kernel)), stationary_(std::move(stationary)), source_(std::move(source)) {
  const auto n = static_cast<int>(stationary_.size());
  if (kernel_.rows() != n || kernel_.cols() != n) {
    throw Error("chain: kernel is " + std::to_string(kernel_.rows()) + "x" +
                std::to_string(kernel_.cols()) + " but stationary vector has " +
                std::to_string(n) + " entries");
  }
  kernel_.makeCompressed();
  double mass = 0.0;
  for (double p : stationary_) {
    if (!(p >= 0.0)) throw Error("chain: stationary vector has a negative entry");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw Error("chain: stationary vector does not sum to 1");

  for (int x = 0; x < n; ++x) {
    double row = 0.0;
    for (Kernel::InnerIterator it(kernel_, x); it; ++it) {
      if (it.value() < 0.0) throw Error("chain: negative kernel entry in row " + std::to_string(x));
      row += it.value();
      const double back = kernel_.coeff(static_cast<int>(it.col()), x);
      balance_defect_ = std::max(
          balance_defect_, std::abs(stationary_[x] * it.value() - stationary_[it.col()] * back));
    }
    if (std::abs(row - 1.0) > kRowSumTolerance) {
      throw Error("chain: row " + std::to_string(x) + " sums to " + std::to_string(row));
    }
  }

  // Two-colour the support graph; a diagonal entry or an odd cycle makes a component aperiodic.
  std::vector<int> colour(static_cast<std::size_t>(n), -1);
  std::vector<int> stack;
  components_ = 0;
  for (int s = 0; s < n; ++s) {
    if (colour[s] != -1) continue;
    ++components_;
    bool bipartite = true;
    colour[s] = 0;
    stack.push_back(s);
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (Kernel::InnerIterator it(kernel_, x); it; ++it) {
        if (it.value() == 0.0) continue;
        const auto y = static_cast<int>(it.col());
        if (colour[y] == -1) {
          colour[y] = 1 - colour[x];
          stack.push_back(y);
        } else if (colour[y] == colour[x]) {
          bipartite = false;
        }
      }
    }
    if (bipartite) periodicity_ = Periodicity::bipartite_periodic;
  }
}

ReversibleChain srw_chain(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<Vertex> isolated;
  for (Vertex v = 0; v < n; ++v) {
    if (g.degree(v) == 0) isolated.push_back(v);
  }
  if (!isolated.empty()) {
    std::string names;
    for (std::size_t i = 0; i < isolated.size() && i < 10; ++i) {
      names += (i ? "," : "") + std::to_string(isolated[i]);
    }
    if (isolated.size() > 10) names += ",...";
    throw Error("srw_chain: isolated vertices have no walk: " + names);
  }
  ReversibleChain::Kernel kernel(static_cast<int>(n), static_cast<int>(n));
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * g.edge_count());
  std::vector<double> pi(n);
  const double total = 2.0 * static_cast<double>(g.edge_count());
  for (Vertex x = 0; x < n; ++x) {
    const double w = 1.0 / static_cast<double>(g.degree(x));
    for (Vertex y : g.neighbors(x)) entries.emplace_back(static_cast<int>(x), static_cast<int>(y), w);
    pi[x] = static_cast<double>(g.degree(x)) / total;
  }
  kernel.setFromTriplets(entries.begin(), entries.end());
  return ReversibleChain(std::move(kernel), std::move(pi), "srw:" + g.provenance());
}

void step(const ReversibleChain& c, std::span<const double> mu, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto& P = c.kernel();
  for (int x = 0; x < P.outerSize(); ++x) {
    const double m = mu[static_cast<std::size_t>(x)];
    if (m == 0.0) continue;
    for (ReversibleChain::Kernel::InnerIterator it(P, x); it; ++it) {
      out[static_cast<std::size_t>(it.col())] += m * it.value();
    }
  }
}

std::vector<double> evolve(const ReversibleChain& c, std::span<const double> mu0, std::size_t t) {
  if (mu0.size() != c.size()) {
    throw Error("evolve: distribution has " + std::to_string(mu0.size()) + " entries, chain has " +
                std::to_string(c.size()) + " states");
  }
  std::vector<double> mu(mu0.begin(), mu0.end());
  std::vector<double> next(mu.size());
  for (std::size_t s = 0; s < t; ++s) {
    step(c, mu, next);
    mu.swap(next);
  }
  return mu;
}

std::vector<double> point_mass(std::size_t n, std::size_t x) {
  if (x >= n) throw Error("point_mass: state " + std::to_string(x) + " out of range");
  std::vector<double> mu(n, 0.0);
  mu[x] = 1.0;
  return mu;
}

Distances distances_to_stationary(const ReversibleChain& c, std::span<const double> mu) {
  const auto pi = c.stationary();
  double abs_sum = 0.0;
  double chi = 0.0;
  for (std::size_t y = 0; y < pi.size(); ++y) {
    abs_sum += std::abs(mu[y] - pi[y]);
    if (pi[y] > 0.0) chi += mu[y] * mu[y] / pi[y];
  }
  return {0.5 * abs_sum, chi - 1.0};
}

Distances distances(const ReversibleChain& c, std::size_t x, std::size_t t) {
  return distances_to_stationary(c, evolve(c, point_mass(c.size(), x), t));
}

std::optional<std::size_t> MixingProfile::t_mix_at(double e) const {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] == e) return t_mix[i];
  }
  return std::nullopt;
}

std::vector<std::size_t> farthest_point_starts(const ReversibleChain& c, std::size_t count) {
  const std::size_t n = c.size();
  count = std::min(count, n);
  const auto& P = c.kernel();
  constexpr auto kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nearest(n, kFar);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> queue;
  std::size_t next = 0;
  while (chosen.size() < count) {
    chosen.push_back(next);
    // Multi-source distances shrink monotonically; BFS from the new start only.
    queue.assign(1, next);
    nearest[next] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto x = queue[head];
      for (ReversibleChain::Kernel::InnerIterator it(P, static_cast<int>(x)); it; ++it) {
        const auto y = static_cast<std::size_t>(it.col());
        if (nearest[x] + 1 < nearest[y]) {
          nearest[y] = nearest[x] + 1;
          queue.push_back(y);
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (nearest[v] > nearest[best]) best = v;
    }
    if (nearest[best] == 0) break;
    next = best;
  }
  return chosen;
}

namespace {

struct StartResult {
  std::vector<double> tv;
  std::vector<double> l2sq;
  bool monotone = true;
};

StartResult run_start(const ReversibleChain& c, std::size_t x, double stop_tv, std::size_t max_steps) {
  StartResult r;
  std::vector<double> mu = point_mass(c.size(), x);
  std::vector<double> next(mu.size());
  for (std::size_t t = 0;; ++t) {
    const auto d = distances_to_stationary(c, mu);
    if (t > 0 && (d.tv > r.tv.back() + 1e-12 || d.l2sq > r.l2sq.back() + 1e-12)) r.monotone = false;
    r.tv.push_back(d.tv);
    r.l2sq.push_back(d.l2sq);
    if (d.tv <= stop_tv || t == max_steps) break;
    step(c, mu, next);
    mu.swap(next);
  }
  return r;
}

}  // namespace

MixingProfile mixing_profile(const ReversibleChain& c, std::span<const double> eps_grid,
                             const MixingOptions& options) {
  if (c.periodicity() == Periodicity::bipartite_periodic) {
    throw Error("mixing_profile: chain is bipartite (periodic); total variation does not converge");
  }
  if (eps_grid.empty()) throw Error("mixing_profile: empty eps grid");
  for (double e : eps_grid) {
    if (!(e > 0.0 && e < 1.0)) throw Error("mixing_profile: eps must lie in (0,1)");
  }
  MixingProfile prof;
  prof.eps.assign(eps_grid.begin(), eps_grid.end());
  std::vector<double> all_eps = prof.eps;
  for (double e : prof.eps) {
    if (e < 0.5) all_eps.push_back(1.0 - e);
  }
  const double stop_tv = *std::min_element(all_eps.begin(), all_eps.end());

  if (c.size() <= options.exact_start_limit) {
    prof.starts.resize(c.size());
    std::iota(prof.starts.begin(), prof.starts.end(), std::size_t{0});
  } else {
    prof.starts = farthest_point_starts(c, options.sampled_starts);
    prof.lower_bound_profile = true;
  }

  std::vector<StartResult> results(prof.starts.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < results.size(); i += stride) {
      results[i] = run_start(c, prof.starts[i], stop_tv, options.max_steps);
    }
  };
  if (options.parallel) {
    const std::size_t threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work, k, threads);
  } else {
    work(0, 1);
  }

  std::size_t horizon = 0;
  for (const auto& r : results) horizon = std::max(horizon, r.tv.size());
  prof.worst_tv.assign(horizon, 0.0);
  for (const auto& r : results) {
    prof.monotone = prof.monotone && r.monotone;
    // Past its last entry a start is below every eps and never the maximizer.
    for (std::size_t t = 0; t < r.tv.size(); ++t) prof.worst_tv[t] = std::max(prof.worst_tv[t], r.tv[t]);
  }
  auto t_mix_for = [&](double e) -> std::optional<std::size_t> {
    for (std::size_t t = 0; t < prof.worst_tv.size(); ++t) {
      if (prof.worst_tv[t] <= e) return t;
    }
    return std::nullopt;
  };
  for (double e : prof.eps) prof.t_mix.push_back(t_mix_for(e));
  for (double e : prof.eps) {
    if (e >= 0.5) continue;
    const auto lo = t_mix_for(e);
    const auto hi = t_mix_for(1.0 - e);
    if (lo && hi && *hi > 0) {
      prof.cutoff_ratios.push_back({e, *lo, *hi, static_cast<double>(*lo) / static_cast<double>(*hi)});
    }
  }
  for (std::size_t i = 0; i < results.size() && i < options.curves_kept; ++i) {
    prof.curves.push_back({prof.starts[i], results[i].tv, results[i].l2sq});
  }
  return prof;
}

std::optional<std::size_t> mixing_time(const ReversibleChain& c, double eps, const MixingOptions& options) {
  const double grid[] = {eps};
  return mixing_profile(c, grid, options).t_mix.front();
}

ReversibleChain power_chain(const ReversibleChain& c, std::size_t t, std::size_t max_states) {
  if (t == 0) throw Error("power_chain: exponent must be at least 1");
  const std::size_t n = c.size();
  if (n > max_states) {
    throw BudgetError("power_chain: dense power of a " + std::to_string(n) +
                      "-state chain exceeds the budget of " + std::to_string(max_states) + " states");
  }
  if (t == 1) return c;
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = evolve(c, point_mass(n, x), t);
    for (std::size_t y = 0; y < n; ++y) {
      if (row[y] != 0.0) entries.emplace_back(static_cast<int>(x), static_cast<int>(y), row[y]);
    }
  }
  ReversibleChain::Kernel kernel(static_cast<int>(n), static_cast<int>(n));
  kernel.setFromTriplets(entries.begin(), entries.end());
  std::vector<double> pi(c.stationary().begin(), c.stationary().end());
  return ReversibleChain(std::move(kernel), std::move(pi),
                         "power(" + std::to_string(t) + "):" + c.source());
}

}  // namespace ramcut
