#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "ramcut/chain.hpp"
#include "ramcut/harness.hpp"
#include "ramcut/hitting.hpp"
#include "ramcut/log.hpp"
#include "ramcut/spectral.hpp"
#include "ramcut/tree_oracle.hpp"
#include "ramcut/walk.hpp"

using namespace ramcut;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= limit_seconds) out.require(false, "runtime " + fmt(secs) + " s exceeds " + fmt(limit_seconds) + " s");
  if (!out.pass) ++failures;
  std::printf("criterion %2d %s %s (%.2f s)%s%s\n", id, out.pass ? "PASS" : "FAIL", name, secs,
              out.detail.empty() ? "" : ": ", out.detail.c_str());
  std::fflush(stdout);
}

// 4 tv^2 <= l2sq <= lambda^{2t} / pi(x) for all starts and t <= horizon.
void poincare_chain(const ReversibleChain& c, double lambda, std::size_t horizon, double slack, Outcome& out,
                    const std::string& label) {
  const auto n = c.size();
  std::size_t bad = 0;
  for (std::size_t x = 0; x < n; ++x) {
    auto mu = point_mass(n, x);
    std::vector<double> next(n);
    for (std::size_t t = 0; t <= horizon; ++t) {
      if (t > 0) {
        step(c, mu, next);
        mu.swap(next);
      }
      const auto d = distances_to_stationary(c, mu);
      const double rhs = std::pow(lambda, 2.0 * static_cast<double>(t)) / c.stationary()[x];
      if (4.0 * d.tv * d.tv > d.l2sq + slack || d.l2sq > rhs + slack) ++bad;
    }
  }
  out.require(bad == 0, label + ": " + std::to_string(bad) + " violations");
}

// The two parity classes of a bipartite graph as chains of P^2.
std::vector<ReversibleChain> parity_chains(const Graph& g) {
  const auto side = *bipartition(g);
  const auto full = power_chain(srw_chain(g), 2);
  std::vector<ReversibleChain> out;
  for (std::uint8_t s : {0, 1}) {
    std::vector<std::size_t> states;
    for (std::size_t x = 0; x < g.vertex_count(); ++x) {
      if (side[x] == s) states.push_back(x);
    }
    const auto m = states.size();
    ReversibleChain::Kernel k(static_cast<int>(m), static_cast<int>(m));
    std::vector<Eigen::Triplet<double>> trips;
    double mass = 0.0;
    for (auto x : states) mass += full.stationary()[x];
    std::vector<double> pi;
    for (std::size_t i = 0; i < m; ++i) {
      pi.push_back(full.stationary()[states[i]] / mass);
      for (std::size_t j = 0; j < m; ++j) {
        const double v = full.entry(states[i], states[j]);
        if (v != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
      }
    }
    k.setFromTriplets(trips.begin(), trips.end());
    out.emplace_back(std::move(k), std::move(pi), "parity class of P^2");
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  set_warning_sink([](std::string_view) {});

  criterion(1, "Petersen fixture", 1.0, [] {
    Outcome out;
    const auto g = petersen_graph();
    const auto s = graph_spectrum(g, SpectrumMode::dense_full);
    const double expect[] = {1, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, -2.0 / 3, -2.0 / 3, -2.0 / 3, -2.0 / 3};
    double dev = 0.0;
    for (std::size_t i = 0; i < 10; ++i) dev = std::max(dev, std::abs(s.eigenvalues[i] - expect[i]));
    out.require(dev <= 1e-9, "spectrum deviation " + fmt(dev));
    out.require(std::abs(rho(3) - 0.9428090415820634) <= 1e-12, "rho_3");
    out.require(classify_ramanujan(g, s).classification == RamanujanClass::ramanujan, "not classified Ramanujan");
    const auto c = srw_chain(g);
    const double eps[] = {0.25};
    const auto prof = mixing_profile(c, eps);
    out.require(prof.t_mix[0] == 4u, "t_mix(1/4) != 4");
    const double tv[] = {0.9, 0.7, 0.3, 23.0 / 90, 41.0 / 270};
    double tv_dev = 0.0;
    for (std::size_t t = 0; t < 5; ++t) tv_dev = std::max(tv_dev, std::abs(prof.worst_tv[t] - tv[t]));
    out.require(tv_dev <= 1e-10, "TV deviation " + fmt(tv_dev));
    out.note("max spectrum deviation " + fmt(dev) + ", TV deviation " + fmt(tv_dev));
    return out;
  });

  criterion(2, "L2 / Poincare chain", 10.0, [] {
    Outcome out;
    constexpr double slack = 1e-10;
    for (const auto& [label, g] : {std::pair<std::string, Graph>{"petersen", petersen_graph()},
                                   std::pair<std::string, Graph>{"K4", complete_graph(4)}}) {
      const auto c = srw_chain(g);
      poincare_chain(c, spectrum(c, SpectrumMode::dense_full).lambda_star, 100, slack, out, label);
    }
    for (const auto& c : parity_chains(hypercube_graph(3))) {
      poincare_chain(c, spectrum(c, SpectrumMode::dense_full).lambda_star, 100, slack, out, "Q3 parity class");
    }
    std::size_t graphs = 0;
    for (std::uint64_t seed = 1; graphs < 10; ++seed) {
      const auto g = build_random_regular(200, 3, seed);
      if (!is_connected(g) || is_bipartite(g)) continue;
      const auto c = srw_chain(g);
      poincare_chain(c, spectrum(c, SpectrumMode::dense_full).lambda_star, 100, slack, out,
                     "random n=200 seed " + std::to_string(seed));
      ++graphs;
    }
    out.note("13 chains plus 2 parity classes, t <= 100, slack 1e-10");
    return out;
  });

  criterion(3, "restricted Perron root bounds", 30.0, [] {
    Outcome out;
    CounterRng rng(0xacce5503);
    std::size_t refined_bad = 0, literal_bad = 0, literal_checked = 0;
    for (int pair = 0; pair < 200; ++pair) {
      Graph g;
      if (pair % 2 == 0) {
        const std::size_t d = 3 + rng.below(3);
        std::size_t n = 20 + rng.below(180);
        if ((n * d) % 2) ++n;
        g = testgen::random_regular(rng, n, d);
        if (!is_connected(g)) g = testgen::connected_graph(rng, n, n);
      } else {
        g = testgen::connected_graph(rng, 5 + rng.below(100), rng.below(120));
      }
      const auto c = srw_chain(g);
      const auto s = spectrum(c, SpectrumMode::dense_full);
      const auto a = testgen::random_set(rng, c.size(), std::max<std::size_t>(1, c.size() / 3));
      const auto e = restricted_top_eig(c, a, s.lambda2);
      if (e.lambda_a > s.lambda2 + (1.0 - s.lambda2) * e.pi_a + 1e-9) ++refined_bad;
      if (s.lambda2 >= 0.0) {
        ++literal_checked;
        if (e.lambda_a > s.lambda2 + e.pi_a + 1e-9) ++literal_bad;
      }
    }
    out.require(refined_bad == 0, std::to_string(refined_bad) + " refined violations");
    out.require(literal_bad == 0, std::to_string(literal_bad) + " literal violations");
    const auto k4 = srw_chain(complete_graph(4));
    const auto single = restricted_top_eig(k4, {0}, spectrum(k4, SpectrumMode::dense_full).lambda2);
    out.require(std::abs(single.lambda_a) <= 1e-12, "K4 singleton lambda = " + fmt(single.lambda_a));
    out.require(std::abs(single.refined_rhs) <= 1e-12 && single.lambda_a <= single.refined_rhs + 1e-9,
                "K4 singleton refined rhs = " + fmt(single.refined_rhs));
    out.note("200 pairs, literal form on " + std::to_string(literal_checked) + " with lambda2 >= 0");
    return out;
  });

  criterion(4, "survival / L2 / Perron chain", 30.0, [] {
    Outcome out;
    std::vector<std::size_t> ts(101);
    std::iota(ts.begin(), ts.end(), std::size_t{0});
    HitOptions o;
    o.quantile_checks = false;
    const auto k4 = srw_chain(complete_graph(4));
    const auto h = verify_spectral_hit(k4, {0, 1}, ts, 0.5, 0.1, spectrum(k4, SpectrumMode::dense_full), o);
    double closed = 0.0, right_gap = 0.0;
    for (std::size_t t = 0; t <= 100; ++t) {
      const double expect = std::pow(3.0, -static_cast<double>(t));
      closed = std::max(closed, std::abs(h.survival[t] - expect) / expect);
    }
    for (const auto& row : h.rows) {
      right_gap = std::max(right_gap, std::abs(row.right - row.middle));
      out.require(row.left_pass && row.right_pass && row.two_way_pass, "K4 row t=" + std::to_string(row.t));
    }
    out.require(closed <= 1e-9, "K4 survival vs 3^-t relative " + fmt(closed));
    out.require(right_gap <= 1e-10, "K4 right-side equality gap " + fmt(right_gap));

    CounterRng rng(0xacce5504);
    std::size_t bad = 0;
    for (int pair = 0; pair < 100; ++pair) {
      const auto g = testgen::connected_graph(rng, 5 + rng.below(80), rng.below(100));
      const auto c = srw_chain(g);
      const auto s = spectrum(c, SpectrumMode::dense_full);
      const auto a = testgen::random_set(rng, c.size(), std::max<std::size_t>(1, c.size() / 2));
      const auto r = verify_spectral_hit(c, a, ts, 0.3, 0.1, s, o);
      for (const auto& row : r.rows) {
        if (row.left > row.middle + 1e-10 || row.middle > row.right + 1e-10 || !row.two_way_pass) ++bad;
      }
    }
    out.require(bad == 0, std::to_string(bad) + " violating rows over 100 random pairs");
    out.note("K4 right gap " + fmt(right_gap) + ", 100 random pairs, t = 0..100");
    return out;
  });

  const auto fixtures = [] {
    std::vector<std::pair<std::string, Graph>> f;
    f.emplace_back("petersen", petersen_graph());
    f.emplace_back("K4", complete_graph(4));
    f.emplace_back("Q3", hypercube_graph(3));
    f.emplace_back("prism", prism_graph());
    f.emplace_back("random n=2000 girth>=7", build_random_regular(2000, 3, 2000, 7));
    f.emplace_back("lps(13,17)", build_lps(13, 17));
    return f;
  };

  criterion(5, "sphere-hitting lower bound", 60.0, [&] {
    Outcome out;
    std::map<std::size_t, double> c_hat;
    std::size_t solves = 0;
    for (const auto& [label, g] : fixtures()) {
      const auto d = g.regular_degree();
      for (std::size_t k = 1; k <= 3; ++k) {
        bool any = false;
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
          const auto dist = bfs_distances(g, v, static_cast<std::int32_t>(k));
          if (std::none_of(dist.begin(), dist.end(), [&](std::int32_t x) { return x == static_cast<std::int32_t>(k); })) {
            continue;
          }
          any = true;
          const auto h = sphere_hit_distribution(g, v, k);
          ++solves;
          const double lb = sphere_tree_probability(d, k);
          if (h.min_probability < lb - 1e-12) out.require(false, label + " k=" + std::to_string(k) + " below bound");
          if (h.excess == 0 && h.uniform_defect > 1e-12) {
            out.require(false, label + " k=" + std::to_string(k) + " tree ball not uniform");
          }
          auto& slot = c_hat[h.excess];
          slot = std::max(slot, h.c_hat);
        }
        if (!any) break;
      }
    }
    const auto p = sphere_hit_distribution(petersen_graph(), 0, 2);
    for (double q : p.probability) out.require(std::abs(q - 1.0 / 6) <= 1e-12, "Petersen k=2 not 1/6");
    const auto big = sphere_hit_distribution(build_random_regular(2000, 3, 2000, 7), 0, 3);
    for (double q : big.probability) out.require(std::abs(q - 1.0 / 12) <= 1e-12, "random k=3 not 1/12");
    std::string table;
    for (const auto& [excess, v] : c_hat) {
      out.require(std::isfinite(v), "C-hat infinite at excess " + std::to_string(excess));
      table += (table.empty() ? "" : ", ") + std::to_string(excess) + ":" + fmt(v);
    }
    out.note(std::to_string(solves) + " solves; max C-hat by excess {" + table + "}");
    return out;
  });

  criterion(6, "W against K", 30.0, [&] {
    Outcome out;
    for (const auto& [label, g] : fixtures()) {
      const auto gi = girth(g);
      for (std::size_t k = 1; k <= 3; ++k) {
        if (!gi || *gi <= 2 * k) continue;
        const auto w = w_vs_k_report(g, k);
        const double dev = std::max(std::abs(w.min_ratio - 1.0), std::abs(w.max_ratio - 1.0));
        out.require(dev <= 1e-10, label + " k=" + std::to_string(k) + " W/K deviation " + fmt(dev));
        out.require(w.min_k_scaled >= 1.0 - 1e-12, label + " k=" + std::to_string(k) + " scaled K " + fmt(w.min_k_scaled));
      }
    }
    const auto prism = w_vs_k_report(prism_graph(), 2);
    out.require(std::abs(prism.min_w - 0.5) <= 1e-10, "prism W = " + fmt(prism.min_w));
    out.require(std::abs(prism.min_k_scaled / 6.0 - 0.5) <= 1e-10 && std::abs(prism.max_k_scaled / 6.0 - 0.5) <= 1e-10,
                "prism K != 1/2");
    out.require(std::abs(prism.min_ratio - 1.0) <= 1e-10 && std::abs(prism.max_ratio - 1.0) <= 1e-10, "prism W != K");
    return out;
  });

  criterion(7, "Z-path counts", 5.0, [] {
    Outcome out;
    out.require(count_z_paths(1) == 1 && count_z_paths(2) == 42 && count_z_paths(3) == 41990, "M(1..3)");
    for (std::size_t k = 1; k <= 6; ++k) out.require(count_z_paths(k) == ballot_z_paths(k), "DP != ballot at k=" + std::to_string(k));
    for (std::size_t k = 1; k <= 4; ++k) out.require(z_path_ratio(k) >= 0.12, "ratio below 0.12 at k=" + std::to_string(k));
    out.note("ratio(1..4) = " + fmt(z_path_ratio(1)) + ", " + fmt(z_path_ratio(2)) + ", " + fmt(z_path_ratio(3)) + ", " +
             fmt(z_path_ratio(4)));
    return out;
  });

  criterion(8, "no-return bound and kernel domination", 10.0, [] {
    Outcome out;
    for (std::size_t d : {3, 4, 5}) {
      for (std::size_t k : {1, 2}) {
        const auto c = td1_bound_check(d, k, 0.125);
        out.require(c.pass, "td1 fails at d=" + std::to_string(d) + " k=" + std::to_string(k));
      }
    }
    const auto p = kernel_domination_check(petersen_graph(), 0, 1, 3);
    out.require(std::abs(p.graph_kernel - 5.0 / 27) <= 1e-12 && std::abs(p.tree_kernel - 5.0 / 27) <= 1e-12,
                "Petersen t=3 adjacent not 5/27 on both sides");
    const auto k4 = kernel_domination_check(complete_graph(4), 0, 1, 2);
    out.require(std::abs(k4.graph_kernel - 2.0 / 9) <= 1e-12 && k4.tree_kernel == 0.0 && k4.graph_kernel > k4.tree_kernel + 1e-12,
                "K4 t=2 not strictly 2/9 > 0");
    return out;
  });

  criterion(9, "diameter and Poincare bounds on random cubic graphs", 300.0, [] {
    Outcome out;
    constexpr double eps = 0.25;
    for (std::size_t n : {128, 512, 2048}) {
      const auto g = build_random_regular(n, 3, n);
      const auto c = srw_chain(g);
      const double grid[] = {eps, 1.0 - eps};
      const auto prof = mixing_profile(c, grid);
      const auto s = spectrum(c, SpectrumMode::dense_full);
      const double lower = diameter_lower_bound(n, 3, eps);
      const double upper = poincare_bound(n, s.lambda_star, eps);
      const auto t_lo = prof.t_mix[1], t_hi = prof.t_mix[0];
      out.require(t_lo && static_cast<double>(*t_lo) >= lower - 1.0,
                  "n=" + std::to_string(n) + " t_mix(0.75)=" + std::to_string(t_lo.value_or(0)) + " < " + fmt(lower) + " - 1");
      out.require(t_hi && static_cast<double>(*t_hi) <= upper,
                  "n=" + std::to_string(n) + " t_mix(0.25)=" + std::to_string(t_hi.value_or(0)) + " > " + fmt(upper));
      out.note("n=" + std::to_string(n) + ": t_mix(0.75)=" + std::to_string(t_lo.value_or(0)) + " vs " + fmt(lower) +
               ", t_mix(0.25)=" + std::to_string(t_hi.value_or(0)) + " vs " + fmt(upper));
    }
    return out;
  });

  criterion(10, "regeneration statistics", 120.0, [] {
    Outcome out;
    const auto p = petersen_graph();
    const double exact = expected_regeneration_time(p, 0, 2);
    out.require(std::abs(exact - 3.0) <= 1e-12, "E[T1] = " + fmt(exact));
    const auto trace = simulate_blocks(p, 0, 100000, 2, 0x5eed);
    const auto st = block_statistics(std::span<const WalkTrace>(&trace, 1), 100000);
    const double z = (st.mean_t1 - exact) / st.stderr_t1;
    out.require(std::abs(z) <= 4.0, "Monte Carlo z = " + fmt(z));
    out.require(st.u_identically_zero, "U not identically zero on Petersen");
    const Vertex anchors[] = {0, 3, 7};
    double worst_tv = 0.0;
    for (const auto& row : empirical_y_kernel(p, 2, 100000, 0x5eed, anchors)) worst_tv = std::max(worst_tv, row.tv);
    out.require(worst_tv <= 0.02, "Y-kernel TV " + fmt(worst_tv));
    const auto prism = simulate_blocks(prism_graph(), 0, 100000, 2, 0x5eed);
    const auto ps = block_statistics(std::span<const WalkTrace>(&prism, 1), 100000);
    const double u_pos = ps.u_survival.empty() ? 0.0 : ps.u_survival[0];
    out.require(u_pos > 0.0, "prism P[U0 >= 1] = 0");
    out.note("mean T1 " + fmt(st.mean_t1) + " (z " + fmt(z) + "), Y TV " + fmt(worst_tv) + ", prism P[U0>=1] " + fmt(u_pos));
    return out;
  });

  criterion(11, "LPS(13,17)", 300.0, [] {
    Outcome out;
    const auto g = build_lps(13, 17);
    out.require(g.vertex_count() == 2448, "n = " + std::to_string(g.vertex_count()));
    out.require(g.regular_degree() == 14, "not 14-regular");
    out.require(is_connected(g), "disconnected");
    out.require(!is_bipartite(g), "bipartite");
    const auto s = graph_spectrum(g, SpectrumMode::iterative_extremal);
    const double rho14 = 2.0 * std::sqrt(13.0) / 14.0;
    out.require(s.lambda2 <= rho14 + 1e-6, "lambda2 " + fmt(s.lambda2) + " > rho_14");
    out.note("lambda2 " + fmt(s.lambda2) + " <= rho_14 " + fmt(rho14) + " (" + std::to_string(s.iterations) + " iterations)");
    return out;
  });

  criterion(12, "determinism", 120.0, [] {
    Outcome out;
    const auto base = std::filesystem::temp_directory_path() / "ramcut-acceptance";
    std::vector<ExperimentConfig> configs(2);
    configs[1].graph.kind = "random-regular";
    configs[1].graph.n = 200;
    configs[1].graph.d = 3;
    configs[1].graph.seed = 4;
    configs[1].trials = 5000;
    configs[1].blocks = 5000;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const auto a = base / ("a" + std::to_string(i)), b = base / ("b" + std::to_string(i));
      std::filesystem::remove_all(a);
      std::filesystem::remove_all(b);
      write_report(run_suite(configs[i]), a);
      write_report(run_suite(configs[i]), b);
      std::size_t files = 0;
      for (const auto& entry : std::filesystem::directory_iterator(a)) {
        const auto name = entry.path().filename();
        if (name == "timing.json") continue;
        ++files;
        out.require(slurp(entry.path()) == slurp(b / name), configs[i].graph.kind + ": " + name.string() + " differs");
      }
      out.note(std::to_string(files) + " files identical for config " + std::to_string(i));
    }
    std::filesystem::remove_all(base);
    return out;
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
