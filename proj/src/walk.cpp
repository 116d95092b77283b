#include "ramcut/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ramcut/error.hpp"
#include "ramcut/rng.hpp"

namespace ramcut {

namespace {

// Maintains the anchor, its distance field, and the per-block good counts.
class RegenerationTracker {
 public:
  RegenerationTracker(const Graph& g, std::size_t k) : g_(g), k_(static_cast<std::int32_t>(k)), bfs_(g) {
    if (k == 0) throw Error("regeneration: need k >= 1");
  }

  std::int32_t distance(Vertex x) const { return bfs_.distance(x); }

  // Feeds X_t; returns true when t is a regeneration time (t = 0 included).
  bool observe(Vertex x, std::size_t t) {
    bool regenerated = false;
    if (t == 0) {
      anchor(x, t);
      regenerated = true;
    } else if (bfs_.distance(x) == k_) {
      out.u.push_back((t - block_start_) - good_in_block_);
      anchor(x, t);
      regenerated = true;
    }
    const bool good = is_good(x);
    out.good.push_back(good ? 1 : 0);
    if (good) ++good_in_block_;
    return regenerated;
  }

  Regenerations out;

 private:
  void anchor(Vertex a, std::size_t t) {
    const auto order = bfs_.run(a, k_);
    if (bfs_.distance(order.back()) != k_) {
      throw Error("regeneration: no vertex at distance " + std::to_string(k_) + " from vertex " +
                  std::to_string(a));
    }
    anchor_ = a;
    block_start_ = t;
    good_in_block_ = 0;
    out.times.push_back(t);
  }

  bool is_good(Vertex x) const {
    if (x == anchor_) return true;
    const auto dx = bfs_.distance(x);
    std::size_t farther = 0;
    for (Vertex y : g_.neighbors(x)) {
      const auto dy = bfs_.distance(y);
      if (dy == kUnreached || dy > dx) ++farther;
    }
    return farther + 1 >= g_.degree(x);
  }

  const Graph& g_;
  std::int32_t k_;
  LocalBfs bfs_;
  Vertex anchor_ = 0;
  std::size_t block_start_ = 0;
  std::size_t good_in_block_ = 0;
};

Vertex random_neighbor(const Graph& g, Vertex x, CounterRng& rng) {
  const auto nb = g.neighbors(x);
  if (nb.empty()) throw Error("walk: vertex " + std::to_string(x) + " is isolated");
  return nb[static_cast<std::size_t>(rng.below(nb.size()))];
}

WalkTrace new_trace(const Graph& g, Vertex v, std::size_t k, std::uint64_t seed, std::uint64_t stream) {
  if (v >= g.vertex_count()) throw Error("walk: start vertex out of range");
  WalkTrace trace;
  trace.graph = g.provenance();
  trace.start = v;
  trace.k = k;
  trace.seed = seed;
  trace.stream = stream;
  return trace;
}

}  // namespace

WalkTrace simulate_walk(const Graph& g, Vertex v, std::size_t steps, std::size_t k, std::uint64_t seed,
                        std::uint64_t stream) {
  auto trace = new_trace(g, v, k, seed, stream);
  RegenerationTracker tracker(g, k);
  CounterRng rng(seed, stream);
  trace.positions.reserve(steps + 1);
  Vertex x = v;
  for (std::size_t t = 0; t <= steps; ++t) {
    if (t > 0) x = random_neighbor(g, x, rng);
    trace.positions.push_back(x);
    tracker.observe(x, t);
  }
  trace.regen = std::move(tracker.out);
  return trace;
}

WalkTrace simulate_blocks(const Graph& g, Vertex v, std::size_t blocks, std::size_t k, std::uint64_t seed,
                          std::uint64_t stream, std::size_t max_steps) {
  auto trace = new_trace(g, v, k, seed, stream);
  RegenerationTracker tracker(g, k);
  CounterRng rng(seed, stream);
  Vertex x = v;
  trace.positions.push_back(x);
  tracker.observe(x, 0);
  for (std::size_t t = 1; tracker.out.u.size() < blocks; ++t) {
    if (t > max_steps) {
      throw BudgetError("simulate_blocks: " + std::to_string(blocks) + " blocks not completed within " +
                        std::to_string(max_steps) + " steps");
    }
    x = random_neighbor(g, x, rng);
    trace.positions.push_back(x);
    tracker.observe(x, t);
  }
  trace.regen = std::move(tracker.out);
  return trace;
}

Regenerations rederive(const Graph& g, std::span<const Vertex> positions, std::size_t k) {
  RegenerationTracker tracker(g, k);
  for (std::size_t t = 0; t < positions.size(); ++t) {
    if (positions[t] >= g.vertex_count()) throw Error("rederive: vertex out of range at t = " + std::to_string(t));
    tracker.observe(positions[t], t);
  }
  return std::move(tracker.out);
}

BlockStatistics block_statistics(std::span<const WalkTrace> traces, std::size_t min_blocks) {
  std::vector<double> durations;
  std::vector<std::size_t> us;
  for (const auto& tr : traces) {
    const auto& times = tr.regen.times;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      durations.push_back(static_cast<double>(times[i + 1] - times[i]));
      us.push_back(tr.regen.u[i]);
    }
  }
  if (durations.size() < min_blocks) {
    throw Error("block_statistics: need at least " + std::to_string(min_blocks) + " blocks, got " +
                std::to_string(durations.size()));
  }
  BlockStatistics st;
  st.blocks = durations.size();
  const auto n = static_cast<double>(st.blocks);
  double sum = 0.0;
  for (double v : durations) sum += v;
  st.mean_t1 = sum / n;
  double sq = 0.0;
  for (double v : durations) sq += (v - st.mean_t1) * (v - st.mean_t1);
  st.var_t1 = sq / (n - 1.0);
  st.stderr_t1 = std::sqrt(st.var_t1 / n);

  const std::size_t max_u = *std::max_element(us.begin(), us.end());
  std::vector<std::size_t> counts(max_u + 1, 0);
  for (auto u : us) ++counts[u];
  std::size_t above = st.blocks;
  for (std::size_t l = 0; l <= max_u; ++l) {
    above -= counts[l];
    st.u_survival.push_back(static_cast<double>(above) / n);
  }
  st.u_identically_zero = max_u == 0;
  for (std::size_t l = 1; l < st.u_survival.size(); ++l) {
    if (st.u_survival[l] > st.u_survival[l - 1]) st.monotone = false;
  }
  st.eventually_below_one = st.u_survival.back() < 1.0;

  // log S(l) = a + b l over the positive part of the survival table.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t l = 0; l < st.u_survival.size(); ++l) {
    if (st.u_survival[l] <= 0.0) break;
    const auto x = static_cast<double>(l);
    const double y = std::log(st.u_survival[l]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    m += 1.0;
  }
  if (m >= 2.0) st.decay_ratio = std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
  return st;
}

std::vector<YKernelRow> empirical_y_kernel(const Graph& g, std::size_t k, std::size_t trials, std::uint64_t seed,
                                           std::span<const Vertex> anchors) {
  if (trials == 0) throw Error("empirical_y_kernel: need trials >= 1");
  std::vector<YKernelRow> rows;
  LocalBfs bfs(g);
  for (Vertex x : anchors) {
    const auto exact = sphere_hit_distribution(g, x, k);
    YKernelRow row;
    row.anchor = x;
    row.trials = trials;
    row.sphere = exact.sphere;
    row.exact = exact.probability;
    std::vector<std::size_t> hits(row.sphere.size(), 0);
    bfs.run(x, static_cast<std::int32_t>(k));
    CounterRng rng(seed, 0x594b000000000000ULL | x);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Vertex y = x;
      while (static_cast<std::size_t>(bfs.distance(y)) != k) y = random_neighbor(g, y, rng);
      const auto it = std::lower_bound(row.sphere.begin(), row.sphere.end(), y);
      ++hits[static_cast<std::size_t>(it - row.sphere.begin())];
    }
    const auto n = static_cast<double>(trials);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      const double p = static_cast<double>(hits[i]) / n;
      row.empirical.push_back(p);
      const double diff = std::abs(p - row.exact[i]);
      row.tv += 0.5 * diff;
      const double se = std::sqrt(row.exact[i] * (1.0 - row.exact[i]) / n);
      if (se > 0.0) {
        row.max_z = std::max(row.max_z, diff / se);
      } else if (diff > 0.0) {
        row.max_z = std::numeric_limits<double>::infinity();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t tau(std::size_t t, std::size_t d, std::size_t k) {
  if (d < 3) throw Error("tau: need d >= 3");
  if (k < 1) throw Error("tau: need k >= 1");
  return ((d - 2) * t + d * k - 1) / (d * k);
}

namespace {

// Kernel of SRW on G(k); isolated vertices keep an empty row.
ReversibleChain::Kernel inflated_kernel(const Graph& gk) {
  std::vector<Eigen::Triplet<double>> trip;
  for (Vertex x = 0; x < gk.vertex_count(); ++x) {
    const double p = 1.0 / static_cast<double>(std::max<std::size_t>(gk.degree(x), 1));
    for (Vertex y : gk.neighbors(x)) trip.emplace_back(static_cast<int>(x), static_cast<int>(y), p);
  }
  ReversibleChain::Kernel k(static_cast<int>(gk.vertex_count()), static_cast<int>(gk.vertex_count()));
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

// Monte Carlo P_a[T_tau > horizon] with Agresti-Coull adjusted standard error.
std::pair<double, double> late_regeneration(const Graph& g, Vertex a, std::size_t k, std::size_t tau_value,
                                            std::size_t horizon, std::size_t trials, std::uint64_t seed) {
  if (tau_value == 0) return {0.0, 0.0};
  LocalBfs bfs(g);
  CounterRng rng(seed, 0x4553000000000000ULL | a);
  std::size_t late = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Vertex x = a;
    bfs.run(x, static_cast<std::int32_t>(k));
    std::size_t regenerations = 0;
    for (std::size_t t = 1; t <= horizon && regenerations < tau_value; ++t) {
      x = random_neighbor(g, x, rng);
      if (static_cast<std::size_t>(bfs.distance(x)) == k) {
        ++regenerations;
        bfs.run(x, static_cast<std::int32_t>(k));
      }
    }
    if (regenerations < tau_value) ++late;
  }
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(late) / n;
  const double adjusted = (static_cast<double>(late) + 2.0) / (n + 4.0);
  return {p, std::sqrt(adjusted * (1.0 - adjusted) / (n + 4.0))};
}

}  // namespace

EscapeTransfer escape_transfer_experiment(const Graph& g, std::size_t k, double alpha, std::size_t t, std::size_t s,
                                          std::size_t trials, std::uint64_t seed, std::size_t max_sets,
                                          const HitOptions& options) {
  const auto d = require_regular(g, "escape_transfer_experiment");
  if (trials == 0) throw Error("escape_transfer_experiment: need trials >= 1");
  const auto chain = srw_chain(g);
  const double min_pi = *std::min_element(chain.stationary().begin(), chain.stationary().end());
  if (alpha < min_pi) throw Error("escape_transfer_experiment: alpha is below min pi, no candidate sets");

  EscapeTransfer r;
  r.k = k;
  r.alpha = alpha;
  r.t = t;
  r.s = s;
  r.tau = tau(t, d, k);
  r.trials = trials;
  r.seed = seed;
  r.sets = candidate_small_sets(chain, alpha, options);
  if (r.sets.empty()) throw Error("escape_transfer_experiment: no candidate sets");
  if (r.sets.size() > max_sets) {
    std::vector<std::pair<double, std::size_t>> score;
    for (std::size_t i = 0; i < r.sets.size(); ++i) {
      const auto surv = killed_survival(chain.kernel(), r.sets[i], t + s);
      score.emplace_back(-*std::max_element(surv.begin(), surv.end()), i);
    }
    std::stable_sort(score.begin(), score.end());
    std::vector<StateSet> kept;
    for (std::size_t i = 0; i < max_sets; ++i) kept.push_back(r.sets[score[i].second]);
    r.sets = std::move(kept);
  }

  const auto w = y_kernel(g, k);
  const auto kk = inflated_kernel(inflate(g, k));
  std::vector<std::pair<double, double>> late(g.vertex_count(), {-1.0, 0.0});

  for (std::size_t i = 0; i < r.sets.size(); ++i) {
    const auto& a = r.sets[i];
    const auto lhs = killed_survival(chain.kernel(), a, t + s);
    const auto at_t = killed_survival(chain.kernel(), a, t);
    const auto y = killed_survival(w, a, r.tau);
    const auto kt = killed_survival(kk, a, r.tau);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const auto v = static_cast<Vertex>(a[j]);
      if (late[v].first < 0.0) late[v] = late_regeneration(g, v, k, r.tau, t + s, trials, seed);
      EscapeRow row;
      row.set_index = i;
      row.start = v;
      row.lhs = lhs[j];
      row.y_term = y[j];
      row.k_term = kt[j];
      row.mc_term = late[v].first;
      row.mc_stderr = late[v].second;
      row.pass = row.lhs <= row.y_term + row.mc_term + kMonteCarloSigmas * row.mc_stderr + 1e-12;
      r.pass = r.pass && row.pass;
      r.max_lhs = std::max(r.max_lhs, row.lhs);
      r.max_y = std::max(r.max_y, row.y_term);
      r.max_mc = std::max(r.max_mc, row.mc_term);
      r.max_escape_t = std::max(r.max_escape_t, at_t[j]);
      r.y_k_defect = std::max(r.y_k_defect, std::abs(row.y_term - row.k_term));
      r.rows.push_back(row);
    }
  }
  if (r.max_escape_t > 0.0) {
    r.y_ratio = r.max_y / r.max_escape_t;
    if (t > 0) r.y_ratio_per_step = std::pow(r.y_ratio, 1.0 / static_cast<double>(t));
  }
  return r;
}

}  // namespace ramcut
