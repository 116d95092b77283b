#include "ramcut/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ramcut/error.hpp"
#include "ramcut/rng.hpp"

namespace ramcut {

const char* to_string(SpectrumMode m) {
  return m == SpectrumMode::dense_full ? "dense-full" : "iterative-extremal";
}

const char* to_string(RamanujanClass c) {
  switch (c) {
    case RamanujanClass::ramanujan: return "ramanujan";
    case RamanujanClass::one_sided_at_margin: return "one-sided-at-margin";
    case RamanujanClass::neither: return "neither";
  }
  return "neither";
}

double rho(std::size_t d) {
  if (d < 2) throw Error("rho: need d >= 2, got " + std::to_string(d));
  return 2.0 * std::sqrt(static_cast<double>(d - 1)) / static_cast<double>(d);
}

namespace {

using Kernel = ReversibleChain::Kernel;
constexpr double kUnitTolerance = 1e-9;

// S = D^{1/2} P D^{-1/2}, symmetric for a reversible chain.
Kernel symmetrize(const ReversibleChain& c) {
  const auto pi = c.stationary();
  Kernel s = c.kernel();
  for (int x = 0; x < s.outerSize(); ++x) {
    for (Kernel::InnerIterator it(s, x); it; ++it) {
      it.valueRef() *= std::sqrt(pi[x] / pi[static_cast<std::size_t>(it.col())]);
    }
  }
  return s;
}

struct PowerResult {
  double eigenvalue = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

void orthogonalize(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
  for (const auto& b : basis) v -= b.dot(v) * b;
}

// Extremal eigenvalue of S on the orthogonal complement of `deflate`, by power
// iteration on (I + sign S)/2, whose spectrum lies in [0, 1].
PowerResult deflated_power(const Kernel& s, double sign, const std::vector<Eigen::VectorXd>& deflate,
                           const SpectrumOptions& options, std::uint64_t stream) {
  const auto n = static_cast<Eigen::Index>(s.rows());
  CounterRng rng(options.seed, stream);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
  orthogonalize(v, deflate);
  if (v.norm() == 0.0) return {};
  v.normalize();
  Eigen::VectorXd w(n);
  PowerResult out;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    w = 0.5 * (v + sign * (s * v));
    orthogonalize(w, deflate);
    const double theta = v.dot(w);
    out.eigenvalue = sign * (2.0 * theta - 1.0);
    out.residual = 2.0 * (w - theta * v).norm();
    out.iterations = it;
    if (out.residual <= options.tolerance) return out;
    const double norm = w.norm();
    if (norm == 0.0) {
      // The complement is annihilated: the extremal eigenvalue there is -sign.
      out.eigenvalue = -sign;
      out.residual = 0.0;
      return out;
    }
    v = w / norm;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(options.max_iterations) +
                             " iterations",
                         out.residual);
}

// Signed sqrt(pi) on the two colour classes, if the support is connected and bipartite.
std::optional<Eigen::VectorXd> alternating_vector(const ReversibleChain& c) {
  if (c.periodicity() != Periodicity::bipartite_periodic || c.component_count() != 1) return std::nullopt;
  const auto n = c.size();
  const auto& k = c.kernel();
  std::vector<int> colour(n, -1);
  std::vector<std::size_t> queue{0};
  colour[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto x = queue[head];
    for (Kernel::InnerIterator it(k, static_cast<int>(x)); it; ++it) {
      const auto y = static_cast<std::size_t>(it.col());
      if (it.value() > 0.0 && colour[y] < 0) {
        colour[y] = 1 - colour[x];
        queue.push_back(y);
      }
    }
  }
  Eigen::VectorXd psi(static_cast<Eigen::Index>(n));
  const auto pi = c.stationary();
  for (std::size_t x = 0; x < n; ++x) {
    psi[static_cast<Eigen::Index>(x)] = (colour[x] == 0 ? 1.0 : -1.0) * std::sqrt(pi[x]);
  }
  return psi.normalized();
}

void finish(SpectrumSummary& s) {
  s.lambda_star = std::max(std::abs(s.lambda2), std::abs(s.lambda_min));
  s.lambda_star = std::clamp(s.lambda_star, 0.0, 1.0);
  s.t_rel = s.lambda_star >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - s.lambda_star);
  if (s.degree && *s.degree >= 2) s.rho_d = rho(*s.degree);
}

SpectrumSummary dense_spectrum(const ReversibleChain& c, const SpectrumOptions& options) {
  const auto n = c.size();
  if (n > options.dense_budget) {
    throw BudgetError("spectrum: dense mode limited to " + std::to_string(options.dense_budget) +
                      " states, chain has " + std::to_string(n));
  }
  const Kernel s = symmetrize(c);
  Eigen::MatrixXd dense = Eigen::MatrixXd(s);
  dense = 0.5 * (dense + dense.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("spectrum: dense eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending

  SpectrumSummary out;
  out.method = SpectrumMode::dense_full;
  out.degree = options.degree;
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::reverse(out.eigenvalues.begin(), out.eigenvalues.end());
  out.lambda2 = n >= 2 ? out.eigenvalues[1] : out.eigenvalues[0];
  out.lambda_min = out.eigenvalues.back();
  // Structural eigenvalues are exact; rounding must not make t_rel finite.
  if (c.periodicity() == Periodicity::bipartite_periodic) out.lambda_min = -1.0;
  if (c.component_count() > 1) out.lambda2 = 1.0;
  out.lambda_min_nontrivial = out.lambda_min;
  for (auto it = out.eigenvalues.rbegin(); it != out.eigenvalues.rend(); ++it) {
    if (*it > -1.0 + kUnitTolerance) {
      out.lambda_min_nontrivial = *it;
      break;
    }
  }

  double trace1 = 0.0, trace2 = 0.0;
  const auto& k = c.kernel();
  for (int x = 0; x < k.outerSize(); ++x) {
    for (Kernel::InnerIterator it(k, x); it; ++it) {
      if (it.col() == x) trace1 += it.value();
      trace2 += it.value() * k.coeff(static_cast<int>(it.col()), x);
    }
  }
  double sum1 = 0.0, sum2 = 0.0;
  for (double a : out.eigenvalues) {
    sum1 += a;
    sum2 += a * a;
  }
  out.trace_defect = std::max(std::abs(sum1 - trace1), std::abs(sum2 - trace2));
  finish(out);
  return out;
}

SpectrumSummary iterative_spectrum(const ReversibleChain& c, const SpectrumOptions& options) {
  const auto n = c.size();
  const Kernel s = symmetrize(c);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) phi[static_cast<Eigen::Index>(x)] = std::sqrt(c.stationary()[x]);
  phi.normalize();

  SpectrumSummary out;
  out.method = SpectrumMode::iterative_extremal;
  out.degree = options.degree;
  const auto top = deflated_power(s, 1.0, {phi}, options, 1);
  out.lambda2 = top.eigenvalue;
  out.residual_lambda2 = top.residual;
  out.iterations = top.iterations;

  if (auto psi = alternating_vector(c)) {
    out.lambda_min = -1.0;
    const auto low = deflated_power(s, -1.0, {phi, *psi}, options, 2);
    out.lambda_min_nontrivial = low.eigenvalue;
    out.residual_lambda_min = low.residual;
    out.iterations += low.iterations;
  } else {
    const auto low = deflated_power(s, -1.0, {phi}, options, 2);
    out.lambda_min = low.eigenvalue;
    out.lambda_min_nontrivial = low.eigenvalue;
    out.residual_lambda_min = low.residual;
    out.iterations += low.iterations;
  }
  finish(out);
  return out;
}

}  // namespace

SpectrumSummary spectrum(const ReversibleChain& c, SpectrumMode mode, const SpectrumOptions& options) {
  if (!c.reversible()) throw Error("spectrum: chain is not reversible (" + c.source() + ")");
  if (c.size() < 2) throw Error("spectrum: need at least two states");
  return mode == SpectrumMode::dense_full ? dense_spectrum(c, options) : iterative_spectrum(c, options);
}

SpectrumSummary graph_spectrum(const Graph& g, SpectrumMode mode, SpectrumOptions options) {
  if (g.regular_degree() > 0) options.degree = g.regular_degree();
  return spectrum(srw_chain(g), mode, options);
}

RamanujanReport classify_ramanujan(const Graph& g, const SpectrumSummary& s) {
  const auto d = g.regular_degree();
  if (d == 0) throw Error("classify_ramanujan: graph is not regular");
  if (d < 3) throw Error("classify_ramanujan: need d >= 3, got d = " + std::to_string(d));
  RamanujanReport r;
  r.degree = d;
  r.rho_d = rho(d);
  r.bipartite = is_bipartite(g);
  r.margin = s.lambda2 / r.rho_d;
  r.min_nontrivial = s.lambda_min_nontrivial;

  const auto trivial = [](double a) { return std::abs(std::abs(a) - 1.0) <= kUnitTolerance; };
  if (!s.eigenvalues.empty()) {
    bool first = true;
    for (double a : s.eigenvalues) {
      if (trivial(a)) continue;
      r.max_nontrivial_abs = first ? std::abs(a) : std::max(r.max_nontrivial_abs, std::abs(a));
      r.min_nontrivial = first ? a : std::min(r.min_nontrivial, a);
      first = false;
    }
  } else {
    if (!trivial(s.lambda2)) r.max_nontrivial_abs = std::abs(s.lambda2);
    if (!trivial(s.lambda_min_nontrivial)) {
      r.max_nontrivial_abs = std::max(r.max_nontrivial_abs, std::abs(s.lambda_min_nontrivial));
    }
  }
  const double limit = r.rho_d + kRamanujanTolerance;
  if (r.max_nontrivial_abs <= limit) {
    r.classification = RamanujanClass::ramanujan;
  } else if ((trivial(s.lambda2) || s.lambda2 <= limit) && r.min_nontrivial < -limit) {
    r.classification = RamanujanClass::one_sided_at_margin;
  } else {
    r.classification = RamanujanClass::neither;
  }
  return r;
}

double poincare_bound(std::size_t n, double lambda_star, double eps) {
  if (n < 2) throw Error("poincare_bound: need n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw Error("poincare_bound: eps must lie in (0, 1)");
  if (lambda_star < 0.0) throw Error("poincare_bound: lambda must be nonnegative");
  if (lambda_star >= 1.0) throw Error("poincare_bound: lambda >= 1 gives no bound");
  if (lambda_star == 0.0) return 0.0;
  return 0.5 * std::log(static_cast<double>(n) / (eps * eps)) / std::log(1.0 / lambda_star);
}

StateSet normalize_set(const ReversibleChain& c, StateSet a) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (a.empty()) throw Error("state set is empty");
  if (a.back() >= c.size()) throw Error("state " + std::to_string(a.back()) + " out of range");
  if (a.size() == c.size()) throw Error("state set is the whole state space");
  return a;
}

double set_mass(const ReversibleChain& c, const StateSet& a) {
  double m = 0.0;
  for (auto x : a) m += c.stationary()[x];
  return m;
}

RestrictedEig restricted_top_eig(const ReversibleChain& c, const StateSet& set, std::optional<double> lambda2) {
  const StateSet a = normalize_set(c, set);
  const std::size_t m = a.size();
  std::vector<std::int64_t> local(c.size(), -1);
  for (std::size_t i = 0; i < m; ++i) local[a[i]] = static_cast<std::int64_t>(i);

  // Restricted rows in local indices.
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  const auto& k = c.kernel();
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
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = c.stationary()[a[i]];

  const auto pi_norm = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w[i] * f[i] * f[i];
    return std::sqrt(s);
  };

  std::vector<double> f(m, 1.0), g(m);
  {
    const double norm = pi_norm(f);
    for (auto& v : f) v /= norm;
  }
  double theta = 0.0, prev_delta = 0.0;
  std::size_t iter = 0;
  constexpr std::size_t kMaxIterations = 100000;
  for (iter = 1; iter <= kMaxIterations; ++iter) {
    // g = (f + P_A f) / 2
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t e = start[i]; e < start[i + 1]; ++e) acc += vals[e] * f[cols[e]];
      g[i] = 0.5 * (f[i] + acc);
    }
    double next = 0.0;
    for (std::size_t i = 0; i < m; ++i) next += w[i] * f[i] * g[i];
    const double norm = pi_norm(g);
    for (std::size_t i = 0; i < m; ++i) f[i] = g[i] / norm;
    const double delta = std::abs(next - theta);
    theta = next;
    if (iter > 1 && delta < 1e-12) {
      // Geometric tail estimate of the remaining movement.
      const double ratio = prev_delta > 0.0 ? delta / prev_delta : 0.0;
      if (ratio >= 1.0 || delta * ratio / (1.0 - ratio) < 1e-11) break;
    }
    prev_delta = delta;
  }

  RestrictedEig out;
  out.lambda_a = std::max(0.0, 2.0 * theta - 1.0);
  out.pi_a = set_mass(c, a);
  out.iterations = std::min(iter, kMaxIterations);
  const double peak = *std::max_element(f.begin(), f.end());
  out.perron.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.perron[i] = peak > 0.0 ? f[i] / peak : 0.0;
  if (lambda2) {
    const double l2 = *lambda2;
    out.lambda2 = l2;
    out.paper_rhs = l2 + out.pi_a;
    out.paper_applicable = l2 >= 0.0;
    out.paper_pass = !out.paper_applicable || out.lambda_a <= out.paper_rhs + kRestrictedTolerance;
    out.refined_rhs = l2 + (1.0 - l2) * out.pi_a;
    out.refined_pass = out.lambda_a <= out.refined_rhs + kRestrictedTolerance;
  }
  return out;
}

ComparisonReport compare_restricted(const ReversibleChain& first, const ReversibleChain& second,
                                    const StateSet& a) {
  if (first.size() != second.size()) throw Error("compare_restricted: chains have different state counts");
  ComparisonReport r;
  const auto& k1 = first.kernel();
  for (int x = 0; x < k1.outerSize(); ++x) {
    for (Kernel::InnerIterator it(k1, x); it; ++it) {
      if (it.value() <= 0.0) continue;
      const double p2 = second.entry(static_cast<std::size_t>(x), static_cast<std::size_t>(it.col()));
      if (p2 <= 0.0) {
        throw Error("compare_restricted: first kernel is positive at (" + std::to_string(x) + ", " +
                    std::to_string(it.col()) + ") where the second vanishes");
      }
      r.c1 = std::max(r.c1, it.value() / p2);
    }
  }
  for (std::size_t x = 0; x < first.size(); ++x) {
    const double p1 = first.stationary()[x], p2 = second.stationary()[x];
    if (p1 <= 0.0 || p2 <= 0.0) {
      throw Error("compare_restricted: stationary mass vanishes at state " + std::to_string(x));
    }
    r.c2 = std::max({r.c2, p1 / p2, p2 / p1});
  }
  r.lambda_first = restricted_top_eig(first, a).lambda_a;
  r.lambda_second = restricted_top_eig(second, a).lambda_a;
  r.rhs = r.c1 * r.c2 * r.c2 * r.lambda_second;
  r.pass = r.lambda_first <= r.rhs + kRestrictedTolerance;
  return r;
}

}  // namespace ramcut
