#include "ramcut/hitting.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ramcut/error.hpp"

namespace ramcut {

using Kernel = ReversibleChain::Kernel;

const char* to_string(HitSearch s) { return s == HitSearch::exact ? "exact" : "candidate-family"; }

namespace {

constexpr double kMassTolerance = 1e-12;

// Kernel rows restricted to A, in local indices.
struct RestrictedRows {
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;

  RestrictedRows(const Kernel& k, const StateSet& a) {
    std::vector<std::int64_t> local(static_cast<std::size_t>(k.rows()), -1);
    for (std::size_t i = 0; i < a.size(); ++i) local[a[i]] = static_cast<std::int64_t>(i);
    for (auto x : a) {
      for (Kernel::InnerIterator it(k, static_cast<int>(x)); it; ++it) {
        const auto j = local[static_cast<std::size_t>(it.col())];
        if (j >= 0) {
          cols.push_back(static_cast<std::size_t>(j));
          vals.push_back(it.value());
        }
      }
      start.push_back(cols.size());
    }
  }

  std::size_t size() const { return start.size() - 1; }

  // out = K_A u
  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    for (std::size_t i = 0; i < size(); ++i) {
      double acc = 0.0;
      for (std::size_t e = start[i]; e < start[i + 1]; ++e) acc += vals[e] * u[cols[e]];
      out[i] = acc;
    }
  }

  // out = mu K_A
  void apply_left(const std::vector<double>& mu, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      if (mu[i] == 0.0) continue;
      for (std::size_t e = start[i]; e < start[i + 1]; ++e) out[cols[e]] += mu[i] * vals[e];
    }
  }
};

StateSet checked_set(std::size_t n, StateSet a) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (a.empty()) throw Error("state set is empty");
  if (a.back() >= n) throw Error("state " + std::to_string(a.back()) + " out of range");
  return a;
}

std::size_t position_in(const StateSet& a, std::size_t x) {
  const auto it = std::lower_bound(a.begin(), a.end(), x);
  if (it == a.end() || *it != x) throw Error("start state " + std::to_string(x) + " is not in the set");
  return static_cast<std::size_t>(it - a.begin());
}

struct SetHit {
  std::size_t time = 0;
  std::size_t start = 0;
};

// First t at which every start in A has survival <= eps.
SetHit first_escape_time(const Kernel& k, const StateSet& a, double eps, std::size_t max_t) {
  const RestrictedRows rows(k, a);
  std::vector<double> u(a.size(), 1.0), next(a.size());
  std::size_t worst = 0;
  for (std::size_t t = 0; t <= max_t; ++t) {
    const auto peak = std::max_element(u.begin(), u.end());
    if (t == 0 || *peak > eps) worst = a[static_cast<std::size_t>(peak - u.begin())];
    if (*peak <= eps) return {t, worst};
    rows.apply(u, next);
    u.swap(next);
  }
  throw Error("hit_quantile: survival stays above eps beyond t = " + std::to_string(max_t));
}

std::vector<std::vector<std::size_t>> support_adjacency(const ReversibleChain& c) {
  std::vector<std::vector<std::size_t>> adj(c.size());
  const auto& k = c.kernel();
  for (int x = 0; x < k.outerSize(); ++x) {
    for (Kernel::InnerIterator it(k, x); it; ++it) {
      if (it.value() > 0.0 && it.col() != x) adj[static_cast<std::size_t>(x)].push_back(static_cast<std::size_t>(it.col()));
    }
  }
  return adj;
}

}  // namespace

std::vector<double> killed_survival(const Kernel& kernel, const StateSet& set, std::size_t t) {
  const StateSet a = checked_set(static_cast<std::size_t>(kernel.rows()), set);
  const RestrictedRows rows(kernel, a);
  std::vector<double> u(a.size(), 1.0), next(a.size());
  for (std::size_t s = 0; s < t; ++s) {
    rows.apply(u, next);
    u.swap(next);
  }
  return u;
}

double survival_probability(const ReversibleChain& c, const StateSet& set, std::size_t start, std::size_t t) {
  const StateSet a = checked_set(c.size(), set);
  const auto i = position_in(a, start);
  return killed_survival(c.kernel(), a, t)[i];
}

std::vector<double> survival_curve(const ReversibleChain& c, const StateSet& set, std::size_t start,
                                   std::size_t t_max) {
  const StateSet a = checked_set(c.size(), set);
  const auto i = position_in(a, start);
  // Forward evolution of the killed law started at `start`; its mass is the survival.
  const RestrictedRows rows(c.kernel(), a);
  std::vector<double> mu(a.size(), 0.0), next(a.size());
  mu[i] = 1.0;
  std::vector<double> curve{1.0};
  for (std::size_t t = 1; t <= t_max; ++t) {
    rows.apply_left(mu, next);
    mu.swap(next);
    curve.push_back(std::accumulate(mu.begin(), mu.end(), 0.0));
  }
  return curve;
}

std::vector<StateSet> candidate_small_sets(const ReversibleChain& c, double alpha, const HitOptions& options) {
  const auto n = c.size();
  const auto pi = c.stationary();
  const auto adj = support_adjacency(c);
  const double cap = alpha + kMassTolerance;

  std::vector<std::size_t> centers;
  if (n <= options.max_centers) {
    centers.resize(n);
    std::iota(centers.begin(), centers.end(), std::size_t{0});
  } else {
    centers = farthest_point_starts(c, options.max_centers);
  }

  std::vector<StateSet> sets;
  std::vector<std::int64_t> dist(n, -1);
  std::vector<std::uint8_t> in_set(n, 0);
  for (auto v : centers) {
    if (pi[v] > cap) continue;

    // Balls of increasing radius.
    {
      std::vector<std::size_t> order{v};
      std::fill(dist.begin(), dist.end(), -1);
      dist[v] = 0;
      double mass = pi[v];
      std::size_t layer_begin = 0;
      sets.push_back({v});
      while (true) {
        const std::size_t layer_end = order.size();
        for (std::size_t h = layer_begin; h < layer_end; ++h) {
          for (auto y : adj[order[h]]) {
            if (dist[y] < 0) {
              dist[y] = dist[order[h]] + 1;
              order.push_back(y);
            }
          }
        }
        if (order.size() == layer_end) break;
        for (std::size_t h = layer_end; h < order.size(); ++h) mass += pi[order[h]];
        if (mass > cap || order.size() == n) break;
        sets.emplace_back(order.begin(), order.end());
        layer_begin = layer_end;
      }
    }

    // Greedy growth: add the frontier state with the largest kernel weight into the set.
    StateSet greedy{v};
    in_set[v] = 1;
    double mass = pi[v];
    while (true) {
      std::size_t best = n;
      double best_weight = -1.0;
      for (auto x : greedy) {
        for (auto y : adj[x]) {
          if (in_set[y] || mass + pi[y] > cap) continue;
          double weight = 0.0;
          for (Kernel::InnerIterator it(c.kernel(), static_cast<int>(y)); it; ++it) {
            if (in_set[static_cast<std::size_t>(it.col())]) weight += it.value();
          }
          if (weight > best_weight || (weight == best_weight && y < best)) {
            best = y;
            best_weight = weight;
          }
        }
      }
      if (best == n || greedy.size() + 1 == n) break;
      greedy.push_back(best);
      in_set[best] = 1;
      mass += pi[best];
    }
    for (auto x : greedy) in_set[x] = 0;
    std::sort(greedy.begin(), greedy.end());
    sets.push_back(greedy);

    // Perron-guided: heaviest Perron weights on the closed neighbourhood of the greedy set.
    StateSet hood = greedy;
    for (auto x : greedy) hood.insert(hood.end(), adj[x].begin(), adj[x].end());
    std::sort(hood.begin(), hood.end());
    hood.erase(std::unique(hood.begin(), hood.end()), hood.end());
    if (hood.size() < n && hood.size() > greedy.size()) {
      const auto eig = restricted_top_eig(c, hood);
      std::vector<std::size_t> idx(hood.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t i, std::size_t j) { return eig.perron[i] > eig.perron[j]; });
      StateSet guided;
      double m = 0.0;
      for (auto i : idx) {
        if (m + pi[hood[i]] > cap) break;
        m += pi[hood[i]];
        guided.push_back(hood[i]);
      }
      if (!guided.empty()) {
        std::sort(guided.begin(), guided.end());
        sets.push_back(std::move(guided));
      }
    }
  }
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

HitQuantile hit_quantile(const ReversibleChain& c, double alpha, double eps, HitSearch search,
                         const HitOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("hit_quantile: alpha must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw Error("hit_quantile: eps must lie in (0, 1)");
  const auto n = c.size();
  const auto pi = c.stationary();
  const double cap = alpha + kMassTolerance;
  HitQuantile out;
  out.search = search;

  const auto consider = [&](const StateSet& a) {
    ++out.sets_examined;
    const auto h = first_escape_time(c.kernel(), a, eps, options.max_t);
    if (out.worst_set.empty() || h.time > out.time) {
      out.time = h.time;
      out.worst_set = a;
      out.worst_start = h.start;
    }
  };

  if (search == HitSearch::exact) {
    if (n > options.exact_state_limit) {
      throw BudgetError("hit_quantile: exact search limited to " + std::to_string(options.exact_state_limit) +
                        " states, chain has " + std::to_string(n));
    }
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    StateSet a;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      double mass = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        if (mask >> x & 1) mass += pi[x];
      }
      if (mass > cap) continue;
      bool maximal = true;
      for (std::size_t x = 0; x < n && maximal; ++x) {
        if (!(mask >> x & 1) && mass + pi[x] <= cap) maximal = false;
      }
      if (!maximal) continue;
      a.clear();
      for (std::size_t x = 0; x < n; ++x) {
        if (mask >> x & 1) a.push_back(x);
      }
      consider(a);
    }
  } else {
    out.lower_bound = true;
    for (const auto& a : candidate_small_sets(c, alpha, options)) consider(a);
  }
  return out;
}

HitReport verify_spectral_hit(const ReversibleChain& c, const StateSet& set, std::span<const std::size_t> t_list,
                              double alpha, double eps, const SpectrumSummary& s, const HitOptions& options) {
  HitReport r;
  r.set = normalize_set(c, set);
  const auto& a = r.set;
  const std::size_t m = a.size();
  r.pi_a = set_mass(c, a);
  r.restricted = restricted_top_eig(c, a, s.lambda2);
  std::vector<double> pi_a(m);
  for (std::size_t i = 0; i < m; ++i) pi_a[i] = c.stationary()[a[i]] / r.pi_a;

  std::vector<std::size_t> times(t_list.begin(), t_list.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::size_t t_max = times.empty() ? 0 : times.back();

  // Forward survival from every start, recorded at the listed times.
  const RestrictedRows rows(c.kernel(), a);
  std::vector<std::vector<double>> forward(times.size(), std::vector<double>(m));
  std::vector<double> mu(m), next(m);
  for (std::size_t b = 0; b < m; ++b) {
    std::fill(mu.begin(), mu.end(), 0.0);
    mu[b] = 1.0;
    std::size_t ti = 0;
    for (std::size_t t = 0; t <= t_max && ti < times.size(); ++t) {
      if (t > 0) {
        rows.apply_left(mu, next);
        mu.swap(next);
      }
      if (times[ti] == t) forward[ti++][b] = std::accumulate(mu.begin(), mu.end(), 0.0);
    }
  }

  std::vector<double> u(m, 1.0), tmp(m);
  std::size_t ti = 0;
  for (std::size_t t = 0; t <= t_max && ti < times.size(); ++t) {
    if (t > 0) {
      rows.apply(u, tmp);
      u.swap(tmp);
    }
    if (times[ti] != t) continue;
    SpectralHitRow row;
    row.t = t;
    for (std::size_t i = 0; i < m; ++i) {
      row.left = std::max(row.left, pi_a[i] * u[i] * u[i]);
      row.middle += pi_a[i] * u[i] * u[i];
      row.middle_forward += pi_a[i] * forward[ti][i] * forward[ti][i];
    }
    row.right = std::pow(r.restricted.lambda_a, 2.0 * static_cast<double>(t));
    row.left_pass = row.left <= row.middle + kSpectralHitTolerance;
    row.right_pass = row.middle <= row.right + kSpectralHitTolerance;
    row.two_way_pass = std::abs(row.middle - row.middle_forward) <= kTwoWayTolerance;
    if (ti == 0) r.start = a[static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin())];
    r.pass = r.pass && row.left_pass && row.right_pass && row.two_way_pass;
    r.rows.push_back(row);
    ++ti;
  }
  if (times.empty()) r.start = a.front();
  r.survival = survival_curve(c, a, r.start, t_max);
  r.pass = r.pass && r.restricted.refined_pass && r.restricted.paper_pass;

  const HitSearch search = c.size() <= options.exact_state_limit ? HitSearch::exact : HitSearch::candidate_family;

  // Logarithmic bound on hit_{1-alpha}(sqrt(alpha)).
  auto& lb = r.log_bound;
  auto& ic = r.implied;
  if (!options.quantile_checks) {
    lb.skip_reason = ic.skip_reason = "quantile checks disabled";
    return r;
  }
  if (!(s.lambda2 > 0.0 && s.lambda2 < 0.5)) {
    lb.skip_reason = "requires lambda2 in (0, 1/2)";
  } else {
    lb.applicable = true;
    const double min_pi = *std::min_element(c.stationary().begin(), c.stationary().end());
    lb.rhs = 0.5 * std::abs(std::log(min_pi) / std::log(1.0 / (2.0 * s.lambda2)));
    const auto h = hit_quantile(c, alpha, std::sqrt(alpha), search, options);
    lb.hit = h.time;
    lb.hit_lower_bound = h.lower_bound;
    lb.pass = static_cast<double>(lb.hit) <= lb.rhs;
    r.pass = r.pass && lb.pass;
  }

  // Implied constant in t_mix(eps + alpha) <= hit_{1-alpha}(eps) + C t_rel log(1/alpha).
  if (c.periodicity() != Periodicity::aperiodic) {
    ic.skip_reason = "chain is periodic";
  } else if (eps + alpha >= 1.0) {
    ic.skip_reason = "eps + alpha >= 1";
  } else if (!std::isfinite(s.t_rel)) {
    ic.skip_reason = "relaxation time is infinite";
  } else {
    ic.t_mix = mixing_time(c, eps + alpha);
    if (!ic.t_mix) {
      ic.skip_reason = "t_mix not reached within the step budget";
    } else {
      ic.applicable = true;
      ic.hit = hit_quantile(c, alpha, eps, search, options).time;
      ic.t_rel = s.t_rel;
      ic.constant = (static_cast<double>(*ic.t_mix) - static_cast<double>(ic.hit)) / (s.t_rel * std::log(1.0 / alpha));
    }
  }
  return r;
}

std::size_t require_regular(const Graph& g, const char* who) {
  const auto d = g.regular_degree();
  if (d == 0) throw Error(std::string(who) + ": graph is not regular");
  return d;
}

double sphere_tree_probability(std::size_t d, std::size_t k) {
  if (k == 0) return 1.0;
  return 1.0 / (static_cast<double>(d) * std::pow(static_cast<double>(d - 1), static_cast<double>(k - 1)));
}

namespace {

// Ball decomposition for the absorbing problems: interior B_{k-1} and sphere D_k.
struct AbsorbingBall {
  std::vector<Vertex> interior;
  std::vector<Vertex> sphere;
};

AbsorbingBall absorbing_ball(LocalBfs& bfs, Vertex v, std::size_t k, std::vector<std::int64_t>& local) {
  AbsorbingBall b;
  const auto order = bfs.run(v, static_cast<std::int32_t>(k));
  for (Vertex x : order) {
    if (static_cast<std::size_t>(bfs.distance(x)) < k) {
      local[x] = static_cast<std::int64_t>(b.interior.size());
      b.interior.push_back(x);
    } else {
      b.sphere.push_back(x);
    }
  }
  std::sort(b.sphere.begin(), b.sphere.end());
  return b;
}

// Solves (I - P_II) x = rhs; the matrix is symmetric because g is regular.
Eigen::VectorXd solve_interior(const Graph& g, const AbsorbingBall& b, const std::vector<std::int64_t>& local,
                               const Eigen::VectorXd& rhs) {
  const auto m = static_cast<Eigen::Index>(b.interior.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vertex x = b.interior[static_cast<std::size_t>(i)];
    const double p = 1.0 / static_cast<double>(g.degree(x));
    trip.emplace_back(i, i, 1.0);
    for (Vertex y : g.neighbors(x)) {
      if (local[y] >= 0) trip.emplace_back(i, local[y], -p);
    }
  }
  Eigen::SparseMatrix<double> mat(m, m);
  mat.setFromTriplets(trip.begin(), trip.end());
  if (m <= 500) {
    return Eigen::MatrixXd(mat).partialPivLu().solve(rhs);
  }
  if (m <= 20000) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(mat);
    if (lu.info() != Eigen::Success) throw Error("absorbing solve: singular interior system");
    return lu.solve(rhs);
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.compute(mat);
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) throw ConvergenceError("absorbing solve: conjugate gradient failed", cg.error());
  return x;
}

SphereHit sphere_hit_with(const Graph& g, LocalBfs& bfs, std::vector<std::int64_t>& local, Vertex v,
                          std::size_t k, std::size_t d) {
  if (k == 0) throw Error("sphere_hit_distribution: need k >= 1");
  const auto ball = absorbing_ball(bfs, v, k, local);
  if (ball.sphere.empty()) {
    for (Vertex x : ball.interior) local[x] = -1;
    throw Error("sphere_hit_distribution: sphere of radius " + std::to_string(k) + " around vertex " +
                std::to_string(v) + " is empty");
  }
  // Expected visits z to interior states: (I - P_II)^T z = e_v.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ball.interior.size()));
  rhs[local[v]] = 1.0;
  const Eigen::VectorXd z = solve_interior(g, ball, local, rhs);

  SphereHit h;
  h.center = v;
  h.radius = k;
  h.sphere = ball.sphere;
  h.probability.assign(ball.sphere.size(), 0.0);
  for (std::size_t i = 0; i < ball.sphere.size(); ++i) {
    const Vertex u = ball.sphere[i];
    double acc = 0.0;
    for (Vertex x : g.neighbors(u)) {
      if (local[x] >= 0) acc += z[local[x]] / static_cast<double>(g.degree(x));
    }
    h.probability[i] = acc;
  }
  for (Vertex x : ball.interior) local[x] = -1;

  h.lower_bound = sphere_tree_probability(d, k);
  h.min_probability = *std::min_element(h.probability.begin(), h.probability.end());
  h.max_probability = *std::max_element(h.probability.begin(), h.probability.end());
  h.total = std::accumulate(h.probability.begin(), h.probability.end(), 0.0);
  h.c_hat = h.max_probability / h.lower_bound;
  h.lower_pass = h.min_probability >= h.lower_bound - kSphereLowerSlack;
  for (double p : h.probability) h.uniform_defect = std::max(h.uniform_defect, std::abs(p - h.lower_bound));
  h.excess = ball_stats(g, v, k, CycleBudget{0, 0}).excess;
  return h;
}

}  // namespace

SphereHit sphere_hit_distribution(const Graph& g, Vertex v, std::size_t k) {
  const auto d = require_regular(g, "sphere_hit_distribution");
  if (v >= g.vertex_count()) throw Error("sphere_hit_distribution: vertex out of range");
  LocalBfs bfs(g);
  std::vector<std::int64_t> local(g.vertex_count(), -1);
  return sphere_hit_with(g, bfs, local, v, k, d);
}

double expected_regeneration_time(const Graph& g, Vertex v, std::size_t k) {
  if (k == 0) return 0.0;
  if (v >= g.vertex_count()) throw Error("expected_regeneration_time: vertex out of range");
  LocalBfs bfs(g);
  std::vector<std::int64_t> local(g.vertex_count(), -1);
  const auto ball = absorbing_ball(bfs, v, k, local);
  if (ball.sphere.empty()) {
    throw Error("expected_regeneration_time: sphere of radius " + std::to_string(k) + " around vertex " +
                std::to_string(v) + " is empty");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ball.interior.size()));
  const Eigen::VectorXd h = solve_interior(g, ball, local, ones);
  return h[local[v]];
}

Kernel y_kernel(const Graph& g, std::size_t k) {
  const auto d = require_regular(g, "y_kernel");
  const auto n = g.vertex_count();
  LocalBfs bfs(g);
  std::vector<std::int64_t> local(n, -1);
  std::vector<Eigen::Triplet<double>> trip;
  for (Vertex x = 0; x < n; ++x) {
    const auto h = sphere_hit_with(g, bfs, local, x, k, d);
    for (std::size_t i = 0; i < h.sphere.size(); ++i) {
      trip.emplace_back(static_cast<int>(x), static_cast<int>(h.sphere[i]), h.probability[i]);
    }
  }
  Kernel w(static_cast<int>(n), static_cast<int>(n));
  w.setFromTriplets(trip.begin(), trip.end());
  return w;
}

WvsK w_vs_k_report(const Graph& g, std::size_t k) {
  const auto d = require_regular(g, "w_vs_k_report");
  const auto n = g.vertex_count();
  const Graph gk = inflate(g, k);
  LocalBfs bfs(g);
  std::vector<std::int64_t> local(n, -1);
  WvsK r;
  r.radius = k;
  r.degree = d;
  const double scale = 1.0 / sphere_tree_probability(d, k);
  bool first = true;
  for (Vertex x = 0; x < n; ++x) {
    const auto h = sphere_hit_with(g, bfs, local, x, k, d);
    const double kxy = 1.0 / static_cast<double>(gk.degree(x));
    for (double w : h.probability) {
      const double ratio = w / kxy;
      if (first) {
        r.min_ratio = r.max_ratio = ratio;
        r.min_k_scaled = r.max_k_scaled = kxy * scale;
        r.min_w = w;
        first = false;
      }
      r.min_ratio = std::min(r.min_ratio, ratio);
      r.max_ratio = std::max(r.max_ratio, ratio);
      r.min_k_scaled = std::min(r.min_k_scaled, kxy * scale);
      r.max_k_scaled = std::max(r.max_k_scaled, kxy * scale);
      r.min_w = std::min(r.min_w, w);
    }
  }
  r.k_scaled_pass = r.min_k_scaled >= 1.0 - kSphereLowerSlack;
  r.w_lower_pass = r.min_w >= 1.0 / scale - kSphereLowerSlack;
  return r;
}

}  // namespace ramcut
