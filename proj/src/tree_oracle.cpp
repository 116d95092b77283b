#include "ramcut/tree_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ramcut/chain.hpp"
#include "ramcut/error.hpp"
#include "ramcut/rng.hpp"

namespace ramcut {

namespace {

void require_tree_degree(std::size_t d) {
  if (d < 3) throw Error("tree oracle: need d >= 3, got " + std::to_string(d));
}

}  // namespace

std::vector<double> level_law(std::size_t d, std::size_t t, bool no_return) {
  require_tree_degree(d);
  if (t > kLevelHorizon) {
    throw BudgetError("level DP limited to t <= " + std::to_string(kLevelHorizon) + ", got " + std::to_string(t));
  }
  const double up = static_cast<double>(d - 1) / static_cast<double>(d);
  const double down = 1.0 / static_cast<double>(d);
  std::vector<double> p(t + 2, 0.0), next(t + 2, 0.0);
  p[0] = 1.0;
  for (std::size_t s = 0; s < t; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    next[1] += p[0];
    for (std::size_t l = 1; l <= s; ++l) {
      next[l + 1] += up * p[l];
      next[l - 1] += down * p[l];
    }
    if (no_return) next[0] = 0.0;
    p.swap(next);
  }
  p.resize(t + 1);
  return p;
}

double level_distribution(std::size_t d, std::size_t t, std::size_t k, bool no_return) {
  if (k > t) {
    require_tree_degree(d);
    return 0.0;
  }
  return level_law(d, t, no_return)[k];
}

double level_size(std::size_t d, std::size_t k) {
  if (k == 0) return 1.0;
  return static_cast<double>(d) * std::pow(static_cast<double>(d - 1), static_cast<double>(k - 1));
}

double tree_kernel(std::size_t d, std::size_t t, std::size_t k) {
  return level_distribution(d, t, k, false) / level_size(d, k);
}

double tree_regeneration_time(std::size_t d, std::size_t k) {
  require_tree_degree(d);
  // e = expected time to step from level j to j + 1: e_0 = 1, e_j = (d + e_{j-1}) / (d - 1).
  const auto dd = static_cast<double>(d);
  double e = 1.0, total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) e = (dd + e) / (dd - 1.0);
    total += e;
  }
  return total;
}

Td1Check td1_bound_check(std::size_t d, std::size_t k, double c0) {
  require_tree_degree(d);
  if (k < 1) throw Error("td1_bound_check: need k >= 1");
  if (k > kTd1MaxK) {
    throw BudgetError("td1_bound_check: k limited to " + std::to_string(kTd1MaxK) + ", got " + std::to_string(k));
  }
  Td1Check r;
  r.d = d;
  r.k = k;
  r.steps = k + 2 * k * k;
  r.c0 = c0;
  r.lhs = level_distribution(d, r.steps, k, true);
  const auto kd = static_cast<double>(k);
  const double unit = std::ldexp(1.0, static_cast<int>(r.steps)) / (kd * kd) *
                      std::pow(static_cast<double>(d - 1), kd * kd + kd - 1.0) *
                      std::pow(static_cast<double>(d), -static_cast<double>(r.steps) + 1.0);
  r.rhs = c0 * unit;
  r.max_c0 = r.lhs / unit;
  r.pass = r.lhs >= r.rhs - kTreeSlack;
  return r;
}

BigInt count_z_paths(std::size_t k) {
  if (k < 1) throw Error("count_z_paths: need k >= 1");
  const std::size_t m = k + 2 * k * k;
  // cnt[x]: paths at position x >= 1 that have not returned to 0. First step is +1.
  std::vector<BigInt> cnt(m + 2), next(m + 2);
  cnt[1] = 1;
  for (std::size_t s = 1; s < m; ++s) {
    for (auto& v : next) v = 0;
    for (std::size_t x = 1; x <= s; ++x) {
      if (cnt[x] == 0) continue;
      next[x + 1] += cnt[x];
      if (x > 1) next[x - 1] += cnt[x];
    }
    cnt.swap(next);
  }
  return cnt[k];
}

BigInt binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt b = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    b *= n - r + i;
    b /= i;
  }
  return b;
}

BigInt ballot_z_paths(std::size_t k) {
  if (k < 1) throw Error("ballot_z_paths: need k >= 1");
  const std::size_t m = k + 2 * k * k;
  const std::size_t j = (m + k - 2) / 2;
  return binomial(m - 1, j) - binomial(m - 1, j + 1);
}

double z_path_ratio(std::size_t k) {
  const auto m = k + 2 * k * k;
  const BigInt scaled = count_z_paths(k) * k * k;
  return std::ldexp(scaled.convert_to<double>(), -static_cast<int>(m));
}

double z_escape_probability(std::size_t k) {
  if (k < 1) throw Error("z_escape_probability: need k >= 1");
  // h(x) = P_x[T_k < T_0] is harmonic on 1..k-1 with h(0) = 0, h(k) = 1;
  // forward substitution with h(1) = s gives h(x) = x s.
  std::vector<double> h(k + 1, 0.0);
  h[1] = 1.0;
  for (std::size_t x = 1; x < k; ++x) h[x + 1] = 2.0 * h[x] - h[x - 1];
  const double s = 1.0 / h[k];
  return 0.5 * s;
}

double diameter_constant(std::size_t d) {
  require_tree_degree(d);
  const auto dd = static_cast<double>(d);
  return 2.0 * std::sqrt(dd * (dd - 1.0)) / std::pow(dd - 2.0, 1.5);
}

double diameter_lower_bound(std::size_t n, std::size_t d, double eps) {
  require_tree_degree(d);
  if (n < 2) throw Error("diameter_lower_bound: need n >= 2");
  const auto dd = static_cast<double>(d);
  const double l = std::log(static_cast<double>(n)) / std::log(dd - 1.0);
  return dd / (dd - 2.0) * l + diameter_constant(d) * inv_normal_cdf(eps) * std::sqrt(l);
}

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("inv_normal_cdf: p must lie in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                 1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                 7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

KernelDomination kernel_domination_check(const Graph& g, Vertex x, Vertex y, std::size_t t) {
  const auto d = g.regular_degree();
  if (d == 0) throw Error("kernel_domination_check: graph is not regular");
  if (x >= g.vertex_count() || y >= g.vertex_count()) throw Error("kernel_domination_check: vertex out of range");
  const auto dist = bfs_distances(g, x, kNoDepthLimit)[y];
  if (dist == kUnreached) throw Error("kernel_domination_check: vertices lie in different components");
  KernelDomination r;
  r.distance = static_cast<std::size_t>(dist);
  const auto c = srw_chain(g);
  r.graph_kernel = evolve(c, point_mass(g.vertex_count(), x), t)[y];
  r.tree_kernel = tree_kernel(d, t, r.distance);
  r.pass = r.graph_kernel >= r.tree_kernel - kTreeSlack;
  return r;
}

Concentration tree_distance_concentration(std::size_t d, std::size_t t) {
  if (t < 1) throw Error("tree_distance_concentration: need t >= 1");
  Concentration c;
  c.d = d;
  c.t = t;
  c.law = level_law(d, t, false);
  double second = 0.0;
  for (std::size_t l = 0; l < c.law.size(); ++l) {
    c.mean += static_cast<double>(l) * c.law[l];
    second += static_cast<double>(l) * static_cast<double>(l) * c.law[l];
  }
  c.stddev = std::sqrt(std::max(0.0, second - c.mean * c.mean));
  const double root_t = std::sqrt(static_cast<double>(t));
  for (double z = 1.0; z <= 5.0; z += 1.0) {
    TailRow row{z, 0.0, 0.0};
    for (std::size_t l = 0; l < c.law.size(); ++l) {
      const auto level = static_cast<double>(l);
      if (level <= c.mean - z * root_t) row.lower += c.law[l];
      if (level >= c.mean + z * root_t) row.upper += c.law[l];
    }
    c.tails.push_back(row);
  }
  return c;
}

std::vector<std::uint64_t> sample_level_histogram(std::size_t d, std::size_t t, std::uint64_t walks,
                                                  std::uint64_t seed) {
  require_tree_degree(d);
  std::vector<std::uint64_t> hist(t + 1, 0);
  CounterRng rng(seed, 0x4c6576656cULL);
  for (std::uint64_t w = 0; w < walks; ++w) {
    std::size_t level = 0;
    for (std::size_t s = 0; s < t; ++s) {
      if (level == 0 || rng.below(d) != 0) {
        ++level;
      } else {
        --level;
      }
    }
    ++hist[level];
  }
  return hist;
}

}  // namespace ramcut
