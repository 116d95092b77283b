#include "ramcut/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numeric>

#include "ramcut/chain.hpp"
#include "ramcut/hitting.hpp"
#include "ramcut/log.hpp"
#include "ramcut/rng.hpp"
#include "ramcut/spectral.hpp"
#include "ramcut/tree_oracle.hpp"
#include "ramcut/walk.hpp"

namespace ramcut {

const char* to_string(Suite s) {
  switch (s) {
    case Suite::spectral: return "spectral";
    case Suite::mixing: return "mixing";
    case Suite::hitting: return "hitting";
    case Suite::inflation: return "inflation";
    case Suite::tree: return "tree";
    case Suite::walk: return "walk";
  }
  return "spectral";
}

std::vector<Suite> all_suites() {
  return {Suite::spectral, Suite::mixing, Suite::hitting, Suite::inflation, Suite::tree, Suite::walk};
}

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

std::size_t get_size(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) config_fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::uint64_t get_u64(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_fail(path, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double get_unit(const Json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0 && x < 1.0)) config_fail(path, "must lie in (0, 1)");
  return x;
}

std::string get_string(const Json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) config_fail(path, "expected true or false");
  return v.get<bool>();
}

Suite parse_suite(const std::string& name, const std::string& path) {
  for (auto s : all_suites()) {
    if (name == to_string(s)) return s;
  }
  config_fail(path, "unknown suite '" + name + "'");
}

GraphSpec parse_graph(const Json& j, GraphSpec g) {
  if (!j.is_object()) config_fail("graph", "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string path = "graph." + key;
    if (key == "kind") {
      g.kind = get_string(v, path);
      if (g.kind != "named" && g.kind != "random-regular" && g.kind != "lps" && g.kind != "file") {
        config_fail(path, "unknown kind '" + g.kind + "' (named, random-regular, lps, file)");
      }
    } else if (key == "name") {
      g.name = get_string(v, path);
    } else if (key == "size") {
      g.size = get_size(v, path);
    } else if (key == "n") {
      g.n = get_size(v, path);
    } else if (key == "d") {
      g.d = get_size(v, path);
    } else if (key == "seed") {
      g.seed = get_u64(v, path);
    } else if (key == "min_girth") {
      if (v.is_null()) {
        g.min_girth.reset();
      } else {
        g.min_girth = get_size(v, path);
      }
    } else if (key == "p") {
      g.p = get_u64(v, path);
    } else if (key == "q") {
      g.q = get_u64(v, path);
    } else if (key == "path") {
      g.path = get_string(v, path);
    } else {
      config_fail(path, "unknown field");
    }
  }
  if (g.kind == "random-regular" && (g.n == 0 || g.d == 0)) config_fail("graph.n", "random-regular needs n and d");
  if (g.kind == "lps" && (g.p == 0 || g.q == 0)) config_fail("graph.p", "lps needs p and q");
  if (g.kind == "file" && g.path.empty()) config_fail("graph.path", "file graphs need a path");
  return g;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j, ExperimentConfig cfg) {
  if (!j.is_object()) config_fail("<root>", "expected an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "graph") {
      cfg.graph = parse_graph(v, cfg.graph);
    } else if (key == "suites") {
      cfg.suites.clear();
      if (v.is_string() && v.get<std::string>() == "all") {
        cfg.suites = all_suites();
      } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          const auto path = "suites[" + std::to_string(i) + "]";
          const auto name = get_string(v[i], path);
          if (name == "all") {
            cfg.suites = all_suites();
            break;
          }
          const auto s = parse_suite(name, path);
          if (std::find(cfg.suites.begin(), cfg.suites.end(), s) == cfg.suites.end()) cfg.suites.push_back(s);
        }
        std::sort(cfg.suites.begin(), cfg.suites.end());
      } else {
        config_fail("suites", "expected \"all\" or an array of suite names");
      }
    } else if (key == "k") {
      cfg.k = get_size(v, "k");
      if (cfg.k < 1) config_fail("k", "must be at least 1");
    } else if (key == "alpha") {
      if (v.is_null()) {
        cfg.alpha.reset();
      } else {
        cfg.alpha = get_unit(v, "alpha");
      }
    } else if (key == "eps") {
      if (!v.is_array() || v.empty()) config_fail("eps", "expected a nonempty array");
      cfg.eps.clear();
      for (std::size_t i = 0; i < v.size(); ++i) cfg.eps.push_back(get_unit(v[i], "eps[" + std::to_string(i) + "]"));
    } else if (key == "eps_hit") {
      cfg.eps_hit = get_unit(v, "eps_hit");
    } else if (key == "t_grid") {
      if (!v.is_array()) config_fail("t_grid", "expected an array");
      cfg.t_grid.clear();
      for (std::size_t i = 0; i < v.size(); ++i) cfg.t_grid.push_back(get_size(v[i], "t_grid[" + std::to_string(i) + "]"));
    } else if (key == "trials") {
      cfg.trials = get_size(v, "trials");
      if (cfg.trials < 1) config_fail("trials", "must be at least 1");
    } else if (key == "blocks") {
      cfg.blocks = get_size(v, "blocks");
    } else if (key == "steps") {
      cfg.steps = get_size(v, "steps");
    } else if (key == "seed") {
      cfg.seed = get_u64(v, "seed");
    } else if (key == "output_dir") {
      cfg.output_dir = get_string(v, "output_dir");
    } else if (key == "parallel") {
      cfg.parallel = get_bool(v, "parallel");
    } else if (key == "spectrum_mode") {
      cfg.spectrum_mode = get_string(v, "spectrum_mode");
      if (cfg.spectrum_mode != "auto" && cfg.spectrum_mode != "dense" && cfg.spectrum_mode != "iterative") {
        config_fail("spectrum_mode", "expected auto, dense or iterative");
      }
    } else if (key == "random_sets") {
      cfg.random_sets = get_size(v, "random_sets");
    } else if (key == "poincare_horizon") {
      cfg.poincare_horizon = get_size(v, "poincare_horizon");
    } else if (key == "escape_t") {
      cfg.escape_t = get_size(v, "escape_t");
    } else if (key == "escape_s") {
      cfg.escape_s = get_size(v, "escape_s");
    } else if (key == "escape_sets") {
      cfg.escape_sets = get_size(v, "escape_sets");
    } else if (key == "curves") {
      cfg.curves = get_size(v, "curves");
    } else {
      config_fail(key, "unknown field");
    }
  }
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json g = Json::object();
  g["kind"] = cfg.graph.kind;
  if (cfg.graph.kind == "named") {
    g["name"] = cfg.graph.name;
    g["size"] = cfg.graph.size;
  } else if (cfg.graph.kind == "random-regular") {
    g["n"] = cfg.graph.n;
    g["d"] = cfg.graph.d;
    g["seed"] = cfg.graph.seed;
    g["min_girth"] = cfg.graph.min_girth ? Json(*cfg.graph.min_girth) : Json(nullptr);
  } else if (cfg.graph.kind == "lps") {
    g["p"] = cfg.graph.p;
    g["q"] = cfg.graph.q;
  } else {
    g["path"] = cfg.graph.path;
  }
  Json j = Json::object();
  j["graph"] = g;
  Json suites = Json::array();
  for (auto s : cfg.suites) suites.push_back(to_string(s));
  j["suites"] = suites;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha ? Json(*cfg.alpha) : Json(nullptr);
  j["eps"] = cfg.eps;
  j["eps_hit"] = cfg.eps_hit;
  j["t_grid"] = cfg.t_grid;
  j["trials"] = cfg.trials;
  j["blocks"] = cfg.blocks;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["parallel"] = cfg.parallel;
  j["spectrum_mode"] = cfg.spectrum_mode;
  j["random_sets"] = cfg.random_sets;
  j["poincare_horizon"] = cfg.poincare_horizon;
  j["escape_t"] = cfg.escape_t;
  j["escape_s"] = cfg.escape_s;
  j["escape_sets"] = cfg.escape_sets;
  j["curves"] = cfg.curves;
  return j;
}

ExperimentConfig read_config_file(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

Graph build_graph(const GraphSpec& spec) {
  if (spec.kind == "named") return build_named(spec.name, spec.size);
  if (spec.kind == "random-regular") return build_random_regular(spec.n, spec.d, spec.seed, spec.min_girth);
  if (spec.kind == "lps") return build_lps(spec.p, spec.q);
  if (spec.kind == "file") return read_edge_list_file(spec.path);
  throw ConfigError("config: graph.kind: unknown kind '" + spec.kind + "'");
}

double default_alpha(std::size_t n, std::size_t d, std::size_t k) {
  const double small = d >= 3 ? std::pow(static_cast<double>(d - 1), -3.0 * static_cast<double>(k * k)) : 0.0;
  return std::max(1.0 / static_cast<double>(n), small);
}

bool SuiteResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.pass; });
}

bool Report::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto& s : suites) {
    for (const auto& c : s.checks) {
      if (c.asserted && !c.pass) out.push_back(std::string(to_string(s.suite)) + "." + c.name);
    }
  }
  return out;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  const Graph& g;
  std::optional<ReversibleChain> chain;
  std::optional<SpectrumSummary> spectrum;
  std::string spectrum_error;
  std::size_t degree = 0;
  double alpha = 0.0;
  bool alpha_default = false;
};

Check& add_check(SuiteResult& r, std::string name, bool pass, Json detail = Json::object(), bool asserted = true) {
  r.checks.push_back({std::move(name), asserted, pass, std::move(detail)});
  return r.checks.back();
}

Json optional_size(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string str(std::size_t v) { return std::to_string(v); }

// Spectrum is needed by several suites; a failure is reported by each of them.
bool require_spectrum(const Context& ctx, SuiteResult& r) {
  if (ctx.spectrum) return true;
  add_check(r, "spectrum", false, {{"error", ctx.spectrum_error}});
  return false;
}

std::size_t min_eccentricity_at_least(const Graph& g, std::size_t k) {
  LocalBfs bfs(g);
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto order = bfs.run(v, static_cast<std::int32_t>(k));
    if (static_cast<std::size_t>(bfs.distance(order.back())) < k) return v;
  }
  return g.vertex_count();
}

// Spectral suite: eigenvalue summary, consistency checks, Ramanujan status.
SuiteResult spectral_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::spectral;
  if (!require_spectrum(ctx, r)) return r;
  const auto& s = *ctx.spectrum;
  auto& d = r.data;
  d["method"] = to_string(s.method);
  d["lambda2"] = s.lambda2;
  d["lambda_min"] = s.lambda_min;
  d["lambda_min_nontrivial"] = s.lambda_min_nontrivial;
  d["lambda_star"] = s.lambda_star;
  d["t_rel"] = finite_or_null(s.t_rel);
  d["rho_d"] = s.rho_d ? Json(*s.rho_d) : Json(nullptr);
  if (s.method == SpectrumMode::dense_full) {
    d["trace_defect"] = s.trace_defect;
  } else {
    d["residual_lambda2"] = s.residual_lambda2;
    d["residual_lambda_min"] = s.residual_lambda_min;
    d["iterations"] = s.iterations;
  }

  constexpr double tol = 1e-9;
  const bool ordered = s.lambda2 <= 1.0 + tol && s.lambda2 >= s.lambda_min - tol && s.lambda_min >= -1.0 - tol &&
                       s.lambda_star >= 0.0 && s.lambda_star <= 1.0 && s.t_rel >= 1.0;
  add_check(r, "eigenvalue_range", ordered,
            {{"lambda2", s.lambda2}, {"lambda_min", s.lambda_min}, {"t_rel", finite_or_null(s.t_rel)}});
  if (s.method == SpectrumMode::dense_full) {
    add_check(r, "trace_identities", s.trace_defect <= 1e-8, {{"defect", s.trace_defect}, {"tolerance", 1e-8}});
    CsvTable t{"eigenvalues.csv", {"index", "eigenvalue"}, {}};
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) t.rows.push_back({str(i), csv_number(s.eigenvalues[i])});
    r.tables.push_back(std::move(t));
  }

  if (ctx.degree >= 3) {
    const auto rc = classify_ramanujan(ctx.g, s);
    d["ramanujan"] = {{"class", to_string(rc.classification)},
                      {"rho_d", rc.rho_d},
                      {"margin", rc.margin},
                      {"min_nontrivial", rc.min_nontrivial},
                      {"max_nontrivial_abs", rc.max_nontrivial_abs},
                      {"bipartite", rc.bipartite},
                      {"exact", s.method == SpectrumMode::dense_full}};
  } else {
    d["ramanujan"] = nullptr;
  }
  if (s.lambda_star < 1.0) {
    Json rows = Json::array();
    for (double e : ctx.cfg.eps) {
      rows.push_back({{"eps", e}, {"bound", poincare_bound(ctx.g.vertex_count(), s.lambda_star, e)}});
    }
    d["poincare"] = rows;
  }
  return r;
}

std::optional<std::size_t> first_below(const std::vector<double>& curve, double e) {
  for (std::size_t t = 0; t < curve.size(); ++t) {
    if (curve[t] <= e) return t;
  }
  return std::nullopt;
}

// Mixing suite: worst-start profile, cutoff ratios, L2 / Poincare chain.
SuiteResult mixing_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::mixing;
  const auto& c = *ctx.chain;
  if (c.periodicity() != Periodicity::aperiodic) {
    r.skipped = true;
    r.skip_reason = "chain is periodic (bipartite component)";
    return r;
  }
  if (!require_spectrum(ctx, r)) return r;
  const auto& s = *ctx.spectrum;
  const auto n = c.size();
  MixingOptions mo;
  mo.parallel = ctx.cfg.parallel;
  mo.curves_kept = ctx.cfg.curves;
  const auto prof = mixing_profile(c, ctx.cfg.eps, mo);

  auto& d = r.data;
  d["eps"] = prof.eps;
  Json tm = Json::array();
  for (const auto& t : prof.t_mix) tm.push_back(optional_size(t));
  d["t_mix"] = tm;
  d["starts"] = prof.starts.size();
  d["lower_bound_profile"] = prof.lower_bound_profile;
  Json ratios = Json::array();
  for (const auto& cr : prof.cutoff_ratios) {
    ratios.push_back({{"eps", cr.eps}, {"t_eps", cr.t_eps}, {"t_complement", cr.t_complement}, {"ratio", cr.ratio}});
  }
  d["cutoff_ratios"] = ratios;
  d["worst_tv"] = prof.worst_tv;
  add_check(r, "monotone", prof.monotone);

  // 4 tv^2 <= l2sq <= lambda^{2t} / pi(x) along every examined start.
  const auto starts = n <= 64 ? [&] {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }()
                              : farthest_point_starts(c, 16);
  double jensen_gap = -INFINITY, poincare_gap = -INFINITY;
  std::size_t jensen_bad = 0, poincare_bad = 0;
  for (auto x : starts) {
    auto mu = point_mass(n, x);
    std::vector<double> next(n);
    for (std::size_t t = 0; t <= ctx.cfg.poincare_horizon; ++t) {
      if (t > 0) {
        step(c, mu, next);
        mu.swap(next);
      }
      const auto dist = distances_to_stationary(c, mu);
      const double lhs = 4.0 * dist.tv * dist.tv;
      const double rhs = std::pow(s.lambda_star, 2.0 * static_cast<double>(t)) / c.stationary()[x];
      jensen_gap = std::max(jensen_gap, lhs - dist.l2sq);
      poincare_gap = std::max(poincare_gap, dist.l2sq - rhs);
      if (lhs > dist.l2sq + 1e-12) ++jensen_bad;
      if (dist.l2sq > rhs + 1e-10) ++poincare_bad;
    }
  }
  add_check(r, "jensen", jensen_bad == 0,
            {{"starts", starts.size()}, {"horizon", ctx.cfg.poincare_horizon}, {"max_gap", jensen_gap},
             {"violations", jensen_bad}, {"slack", 1e-12}});
  add_check(r, "l2_decay", poincare_bad == 0,
            {{"starts", starts.size()}, {"horizon", ctx.cfg.poincare_horizon}, {"max_gap", poincare_gap},
             {"violations", poincare_bad}, {"slack", 1e-10}});

  if (ctx.degree > 0 && s.lambda_star < 1.0) {
    Json rows = Json::array();
    bool ok = true;
    for (std::size_t i = 0; i < prof.eps.size(); ++i) {
      const double bound = poincare_bound(n, s.lambda_star, prof.eps[i]);
      const auto limit = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound)));
      const bool pass = prof.t_mix[i] && *prof.t_mix[i] <= limit;
      ok = ok && pass;
      rows.push_back({{"eps", prof.eps[i]}, {"t_mix", optional_size(prof.t_mix[i])}, {"bound", bound}, {"pass", pass}});
    }
    add_check(r, "poincare_bound", ok, {{"rows", rows}});
  }

  if (ctx.degree >= 3) {
    Json rows = Json::array();
    bool all = true;
    for (double e : prof.eps) {
      const auto t = first_below(prof.worst_tv, 1.0 - e);
      if (!t) continue;
      const double bound = diameter_lower_bound(n, ctx.degree, e);
      const bool pass = static_cast<double>(*t) >= bound - 1.0;
      all = all && pass;
      rows.push_back({{"eps", e}, {"t_mix_complement", *t}, {"bound", bound}, {"pass", pass}});
    }
    d["diameter_lower_bound"] = rows;
    add_check(r, "diameter_lower_bound", all, {{"rows", rows}, {"note", "finite-n comparison, not asserted"}}, false);
  }

  CsvTable prof_table{"mixing_profile.csv", {"t", "worst_tv"}, {}};
  for (std::size_t t = 0; t < prof.worst_tv.size(); ++t) prof_table.rows.push_back({str(t), csv_number(prof.worst_tv[t])});
  r.tables.push_back(std::move(prof_table));
  CsvTable curves{"mixing_curves.csv", {"t", "start", "tv", "l2sq"}, {}};
  for (const auto& cv : prof.curves) {
    for (std::size_t t = 0; t < cv.tv.size(); ++t) {
      curves.rows.push_back({str(t), str(cv.start), csv_number(cv.tv[t]), csv_number(cv.l2sq[t])});
    }
  }
  r.tables.push_back(std::move(curves));
  return r;
}

std::vector<StateSet> random_sets(std::size_t n, std::size_t count, std::size_t max_size, CounterRng& rng) {
  std::vector<StateSet> out;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < count; ++i) {
    const auto size = 1 + static_cast<std::size_t>(rng.below(std::min(max_size, n - 1)));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t j = 0; j < size; ++j) {
      std::swap(perm[j], perm[j + static_cast<std::size_t>(rng.below(n - j))]);
    }
    StateSet a(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(a.begin(), a.end());
    out.push_back(std::move(a));
  }
  return out;
}

Json hit_report_json(const HitReport& h) {
  bool rows_ok = true;
  for (const auto& row : h.rows) rows_ok = rows_ok && row.left_pass && row.right_pass && row.two_way_pass;
  Json j = {{"size", h.set.size()},
            {"pi_a", h.pi_a},
            {"lambda_a", h.restricted.lambda_a},
            {"start", h.start},
            {"rows_pass", rows_ok}};
  Json rows = Json::array();
  for (const auto& row : h.rows) {
    rows.push_back({{"t", row.t},
                    {"left", row.left},
                    {"middle", row.middle},
                    {"middle_forward", row.middle_forward},
                    {"right", row.right}});
  }
  j["rows"] = rows;
  const auto& lb = h.log_bound;
  j["log_bound"] = lb.applicable ? Json{{"rhs", lb.rhs}, {"hit", lb.hit}, {"lower_bound", lb.hit_lower_bound}, {"pass", lb.pass}}
                                 : Json{{"skipped", lb.skip_reason}};
  const auto& ic = h.implied;
  j["implied_constant"] = ic.applicable ? Json{{"t_mix", optional_size(ic.t_mix)}, {"hit", ic.hit}, {"t_rel", ic.t_rel}, {"constant", ic.constant}}
                                        : Json{{"skipped", ic.skip_reason}};
  return j;
}

// Hitting suite: restricted Perron roots, the survival chain, hit quantiles.
SuiteResult hitting_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::hitting;
  if (!require_spectrum(ctx, r)) return r;
  const auto& c = *ctx.chain;
  const auto& s = *ctx.spectrum;
  const auto n = c.size();
  const double alpha = ctx.alpha;
  const double min_pi = *std::min_element(c.stationary().begin(), c.stationary().end());
  auto& d = r.data;
  d["alpha"] = alpha;
  d["alpha_default"] = ctx.alpha_default;
  d["lambda2"] = s.lambda2;

  HitOptions ho;
  const auto candidates = alpha >= min_pi ? candidate_small_sets(c, alpha, ho) : std::vector<StateSet>{};
  CounterRng rng(ctx.cfg.seed, 0x53657473ULL);
  const auto random = random_sets(n, ctx.cfg.random_sets, n, rng);

  // Restricted Perron roots against both forms of the lambda2 + pi(A) bound, plus nesting.
  std::size_t refined_bad = 0, literal_bad = 0, literal_checked = 0, nested_bad = 0, examined = 0;
  double refined_gap = -INFINITY;
  const auto examine = [&](const StateSet& a) {
    const auto e = restricted_top_eig(c, a, s.lambda2);
    ++examined;
    refined_gap = std::max(refined_gap, e.lambda_a - e.refined_rhs);
    if (!e.refined_pass) ++refined_bad;
    if (e.paper_applicable) {
      ++literal_checked;
      if (!e.paper_pass) ++literal_bad;
    }
    return e.lambda_a;
  };
  for (const auto& a : candidates) examine(a);
  for (const auto& b : random) {
    const double lb = examine(b);
    StateSet half(b.begin(), b.begin() + static_cast<std::ptrdiff_t>((b.size() + 1) / 2));
    const double la = examine(half);
    if (la > lb + kRestrictedTolerance) ++nested_bad;
  }
  add_check(r, "restricted_refined", refined_bad == 0,
            {{"sets", examined}, {"violations", refined_bad}, {"max_gap", finite_or_null(refined_gap)}, {"slack", kRestrictedTolerance}});
  add_check(r, "restricted_literal", literal_bad == 0,
            {{"sets", literal_checked}, {"violations", literal_bad}, {"applies_when", "lambda2 >= 0"}});
  add_check(r, "restricted_nesting", nested_bad == 0, {{"pairs", random.size()}, {"violations", nested_bad}});

  // The survival / norm / Perron chain on a few small sets.
  std::vector<StateSet> verify;
  for (std::size_t i = 0; i < candidates.size() && verify.size() < 3; ++i) verify.push_back(candidates[i]);
  CounterRng small_rng(ctx.cfg.seed, 0x536d616c6cULL);
  for (auto& a : random_sets(n, 3, 64, small_rng)) verify.push_back(std::move(a));
  Json verified = Json::array();
  bool chain_ok = true;
  std::optional<double> max_implied;
  for (std::size_t i = 0; i < verify.size(); ++i) {
    HitOptions vo;
    vo.quantile_checks = i == 0;
    const auto h = verify_spectral_hit(c, verify[i], ctx.cfg.t_grid, alpha, ctx.cfg.eps_hit, s, vo);
    for (const auto& row : h.rows) chain_ok = chain_ok && row.left_pass && row.right_pass && row.two_way_pass;
    if (h.log_bound.applicable) {
      add_check(r, "log_bound", h.log_bound.pass,
                {{"rhs", h.log_bound.rhs}, {"hit", h.log_bound.hit}, {"hit_lower_bound", h.log_bound.hit_lower_bound}});
    } else if (i == 0) {
      add_check(r, "log_bound", true, {{"skipped", h.log_bound.skip_reason}}, false);
    }
    if (h.implied.applicable) max_implied = std::max(max_implied.value_or(-INFINITY), h.implied.constant);
    verified.push_back(hit_report_json(h));
    if (i == 0) {
      CsvTable t{"survival.csv", {"t", "survival"}, {}};
      for (std::size_t k = 0; k < h.survival.size(); ++k) t.rows.push_back({str(k), csv_number(h.survival[k])});
      r.tables.push_back(std::move(t));
    }
  }
  d["verified"] = verified;
  d["max_implied_constant"] = max_implied ? Json(*max_implied) : Json(nullptr);
  add_check(r, "survival_chain", chain_ok, {{"sets", verify.size()}, {"slack", kSpectralHitTolerance}});

  const auto search = n <= ho.exact_state_limit ? HitSearch::exact : HitSearch::candidate_family;
  const auto hq = hit_quantile(c, alpha, ctx.cfg.eps_hit, search, ho);
  d["hit_quantile"] = {{"alpha", alpha},
                       {"eps", ctx.cfg.eps_hit},
                       {"search", to_string(hq.search)},
                       {"time", hq.time},
                       {"lower_bound", hq.lower_bound},
                       {"sets_examined", hq.sets_examined},
                       {"worst_set_size", hq.worst_set.size()}};
  return r;
}

// Inflation suite: G(k), sphere hitting, W against K, kernel domination, comparison.
SuiteResult inflation_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::inflation;
  const auto& g = ctx.g;
  const auto k = ctx.cfg.k;
  const auto dd = ctx.degree;
  if (dd < 3) {
    r.skipped = true;
    r.skip_reason = "needs a d-regular graph with d >= 3";
    return r;
  }
  if (const auto v = min_eccentricity_at_least(g, k); v < g.vertex_count()) {
    r.skipped = true;
    r.skip_reason = "vertex " + str(v) + " has an empty sphere of radius " + str(k);
    return r;
  }
  const auto& c = *ctx.chain;
  const auto n = g.vertex_count();
  const Graph gk = inflate(g, k);
  const auto prof = gk.degree_profile();
  auto& d = r.data;
  d["k"] = k;
  d["inflated"] = {{"edges", gk.edge_count()},
                   {"min_degree", prof.min_degree},
                   {"max_degree", prof.max_degree},
                   {"regular", prof.regular},
                   {"components", component_count(gk)}};
  const auto scan = assumption1_scan(g, k);
  d["assumption1"] = {{"radius", scan.radius},
                      {"max_excess", scan.max_excess},
                      {"max_cycle_rank", scan.max_cycle_rank},
                      {"max_simple_cycles", scan.max_simple_cycles},
                      {"cycles_exact", scan.cycles_exact},
                      {"worst_center", scan.worst_center},
                      {"graph_cycle_rank", scan.graph_cycle_rank}};

  std::vector<std::size_t> centers;
  if (n <= 5000) {
    centers.resize(n);
    std::iota(centers.begin(), centers.end(), std::size_t{0});
  } else {
    centers = farthest_point_starts(c, 256);
  }
  std::size_t lower_bad = 0, tree_balls = 0;
  double total_defect = 0.0, uniform_defect = 0.0, min_prob = INFINITY;
  std::map<std::size_t, double> c_hat;
  for (auto v : centers) {
    const auto h = sphere_hit_distribution(g, static_cast<Vertex>(v), k);
    if (!h.lower_pass) ++lower_bad;
    min_prob = std::min(min_prob, h.min_probability);
    total_defect = std::max(total_defect, std::abs(h.total - 1.0));
    if (h.excess == 0) {
      ++tree_balls;
      uniform_defect = std::max(uniform_defect, h.uniform_defect);
    }
    auto& slot = c_hat[h.excess];
    slot = std::max(slot, h.c_hat);
  }
  const double lower = sphere_tree_probability(dd, k);
  add_check(r, "sphere_lower_bound", lower_bad == 0,
            {{"centers", centers.size()}, {"bound", lower}, {"min_probability", min_prob}, {"violations", lower_bad}, {"slack", kSphereLowerSlack}});
  add_check(r, "sphere_total", total_defect <= 1e-10, {{"max_defect", total_defect}, {"tolerance", 1e-10}});
  if (tree_balls > 0) {
    add_check(r, "sphere_uniform_on_tree_balls", uniform_defect <= 1e-10,
              {{"tree_balls", tree_balls}, {"max_defect", uniform_defect}, {"tolerance", 1e-10}});
  }
  Json ch = Json::object();
  bool finite = true;
  for (const auto& [excess, value] : c_hat) {
    ch[str(excess)] = value;
    finite = finite && std::isfinite(value);
  }
  d["c_hat_by_excess"] = ch;
  add_check(r, "c_hat_finite", finite, {{"c_hat_by_excess", ch}});

  const auto wk = w_vs_k_report(g, k);
  d["w_vs_k"] = {{"min_ratio", wk.min_ratio},
                 {"max_ratio", wk.max_ratio},
                 {"min_k_scaled", wk.min_k_scaled},
                 {"max_k_scaled", wk.max_k_scaled},
                 {"min_w", wk.min_w}};
  add_check(r, "k_scaled_lower", wk.k_scaled_pass, {{"min_k_scaled", wk.min_k_scaled}, {"slack", kSphereLowerSlack}});
  add_check(r, "w_lower", wk.w_lower_pass, {{"min_w", wk.min_w}, {"bound", lower}, {"slack", kSphereLowerSlack}});
  if (scan.max_excess == 0) {
    const double dev = std::max(std::abs(wk.min_ratio - 1.0), std::abs(wk.max_ratio - 1.0));
    add_check(r, "w_equals_k", dev <= 1e-10, {{"max_deviation", dev}, {"tolerance", 1e-10}});
  }

  const double et1 = expected_regeneration_time(g, 0, k);
  const auto ball0 = ball_stats(g, 0, k, CycleBudget{0, 0});
  d["expected_t1"] = {{"vertex", 0}, {"value", et1}, {"excess", ball0.excess}};
  if (ball0.excess == 0) {
    const double tree = tree_regeneration_time(dd, k);
    add_check(r, "expected_t1_tree", std::abs(et1 - tree) <= 1e-9, {{"exact", et1}, {"tree", tree}, {"tolerance", 1e-9}});
  }

  // Q = P^{k+2k^2} dominates the tree kernel at distance k.
  const std::size_t m = k + 2 * k * k;
  const double tree_value = tree_kernel(dd, m, k);
  double dom_gap = INFINITY;
  std::size_t pairs = 0;
  const auto starts = farthest_point_starts(c, std::min<std::size_t>(n, 16));
  for (auto x : starts) {
    const auto row = evolve(c, point_mass(n, x), m);
    const auto dist = bfs_distances(g, static_cast<Vertex>(x), static_cast<std::int32_t>(k));
    for (std::size_t y = 0; y < n; ++y) {
      if (dist[y] == static_cast<std::int32_t>(k)) {
        ++pairs;
        dom_gap = std::min(dom_gap, row[y] - tree_value);
      }
    }
  }
  add_check(r, "kernel_domination", dom_gap >= -kTreeSlack,
            {{"steps", m}, {"tree_kernel", tree_value}, {"pairs", pairs}, {"min_gap", finite_or_null(dom_gap)}, {"slack", kTreeSlack}});

  // Two-chain comparison of restricted Perron roots.
  if (n <= 1000 && prof.min_degree > 0) {
    const auto kc = srw_chain(gk);
    const auto qc = power_chain(c, m);
    const double a_cmp = std::max(ctx.alpha, 0.1);
    auto sets = candidate_small_sets(c, a_cmp);
    if (sets.size() > 5) sets.resize(5);
    Json rows = Json::array();
    bool ok = true;
    for (const auto& a : sets) {
      const auto cr = compare_restricted(kc, qc, a);
      ok = ok && cr.pass;
      rows.push_back({{"size", a.size()}, {"c1", cr.c1}, {"c2", cr.c2}, {"lambda_k", cr.lambda_first}, {"lambda_q", cr.lambda_second}, {"rhs", cr.rhs}});
    }
    add_check(r, "comparison_k_vs_q", ok, {{"rows", rows}});
    if (scan.max_excess == 0) {
      const ReversibleChain wc(y_kernel(g, k), std::vector<double>(kc.stationary().begin(), kc.stationary().end()), "y-chain");
      Json wrows = Json::array();
      bool wok = true;
      for (const auto& a : sets) {
        const auto cr = compare_restricted(kc, wc, a);
        const bool equal = std::abs(cr.c1 - 1.0) <= 1e-10 && std::abs(cr.c2 - 1.0) <= 1e-10 &&
                           std::abs(cr.lambda_first - cr.lambda_second) <= 1e-9;
        wok = wok && cr.pass && equal;
        wrows.push_back({{"size", a.size()}, {"c1", cr.c1}, {"c2", cr.c2}, {"lambda_k", cr.lambda_first}, {"lambda_w", cr.lambda_second}});
      }
      add_check(r, "comparison_k_vs_w", wok, {{"rows", wrows}});
    }
  } else {
    d["comparison"] = {{"skipped", n > 1000 ? "dense power limited to 1000 states" : "G(k) has isolated vertices"}};
  }
  return r;
}

// Tree suite: level chain, the no-return bound, Z-path counts, concentration.
SuiteResult tree_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::tree;
  const auto dd = ctx.degree;
  if (dd < 3) {
    r.skipped = true;
    r.skip_reason = "needs a d-regular graph with d >= 3";
    return r;
  }
  auto& d = r.data;
  d["d"] = dd;
  const std::size_t k_max = std::min<std::size_t>(std::max<std::size_t>(ctx.cfg.k, 2), kTd1MaxK);
  Json td = Json::array();
  bool td_ok = true;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto chk = td1_bound_check(dd, k);
    td_ok = td_ok && chk.pass && chk.lhs > 0.0;
    td.push_back({{"k", k}, {"steps", chk.steps}, {"lhs", chk.lhs}, {"rhs", chk.rhs}, {"c0", chk.c0}, {"max_c0", chk.max_c0}});
  }
  d["td1"] = td;
  add_check(r, "td1_bound", td_ok, {{"c0", 0.125}, {"k_max", k_max}, {"slack", kTreeSlack}});

  Json zp = Json::array();
  bool dp_ok = true, ratio_ok = true;
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto dp = count_z_paths(k);
    const auto ballot = ballot_z_paths(k);
    const double ratio = z_path_ratio(k);
    dp_ok = dp_ok && dp == ballot;
    if (k <= 4) ratio_ok = ratio_ok && ratio >= 0.12;
    zp.push_back({{"k", k}, {"count", dp.str()}, {"ratio", ratio}, {"escape_probability", z_escape_probability(k)}});
  }
  d["z_paths"] = zp;
  add_check(r, "z_paths_ballot", dp_ok);
  add_check(r, "z_path_ratio", ratio_ok, {{"bound", 0.12}, {"k_max", 4}});

  const std::size_t t = std::clamp<std::size_t>(ctx.cfg.steps, 1, kLevelHorizon);
  const auto conc = tree_distance_concentration(dd, t);
  const double mass = std::accumulate(conc.law.begin(), conc.law.end(), 0.0);
  add_check(r, "level_law_mass", std::abs(mass - 1.0) <= 1e-12, {{"t", t}, {"mass", mass}});
  Json tails = Json::array();
  for (const auto& row : conc.tails) tails.push_back({{"z", row.z}, {"lower", row.lower}, {"upper", row.upper}});
  d["concentration"] = {{"t", t}, {"mean", conc.mean}, {"stddev", conc.stddev}, {"drift_mean", (static_cast<double>(dd) - 2.0) / static_cast<double>(dd) * static_cast<double>(t)}, {"tails", tails}};
  CsvTable law{"level_law.csv", {"level", "prob"}, {}};
  for (std::size_t l = 0; l < conc.law.size(); ++l) law.rows.push_back({str(l), csv_number(conc.law[l])});
  r.tables.push_back(std::move(law));
  return r;
}

// Walk suite: regenerations, block statistics, the Y-chain, escape transfer.
SuiteResult walk_suite(Context& ctx) {
  SuiteResult r;
  r.suite = Suite::walk;
  const auto& g = ctx.g;
  const auto k = ctx.cfg.k;
  const auto& cfg = ctx.cfg;
  if (!is_connected(g)) {
    r.skipped = true;
    r.skip_reason = "graph is not connected";
    return r;
  }
  if (const auto v = min_eccentricity_at_least(g, k); v < g.vertex_count()) {
    r.skipped = true;
    r.skip_reason = "vertex " + str(v) + " has an empty sphere of radius " + str(k);
    return r;
  }
  auto& d = r.data;
  d["k"] = k;
  d["seed"] = cfg.seed;
  d["streams"] = {{"trajectory", 1}, {"y_kernel", "0x594b000000000000 | anchor"}, {"escape", "0x4553000000000000 | start"}};

  const auto trace = simulate_blocks(g, 0, cfg.blocks, k, cfg.seed, 1);
  const auto replay = rederive(g, trace.positions, k);
  add_check(r, "replay", replay.times == trace.regen.times && replay.good == trace.regen.good && replay.u == trace.regen.u,
            {{"steps", trace.positions.size() - 1}});

  const auto traces = std::span<const WalkTrace>(&trace, 1);
  const auto st = block_statistics(traces, std::min<std::size_t>(kMinBlocks, cfg.blocks));
  std::map<Vertex, double> exact;
  double expected_sum = 0.0;
  for (std::size_t i = 0; i < st.blocks; ++i) {
    const Vertex anchor = trace.positions[trace.regen.times[i]];
    auto it = exact.find(anchor);
    if (it == exact.end()) it = exact.emplace(anchor, expected_regeneration_time(g, anchor, k)).first;
    expected_sum += it->second;
  }
  const double expected_mean = expected_sum / static_cast<double>(st.blocks);
  const double diff = st.mean_t1 - expected_mean;
  const double z = st.stderr_t1 > 0.0 ? diff / st.stderr_t1 : (std::abs(diff) <= 1e-12 ? 0.0 : INFINITY);
  d["blocks"] = {{"count", st.blocks},
                 {"mean_t1", st.mean_t1},
                 {"var_t1", st.var_t1},
                 {"stderr_t1", st.stderr_t1},
                 {"exact_mean_t1", expected_mean},
                 {"z", finite_or_null(z)},
                 {"u_survival", st.u_survival},
                 {"u_identically_zero", st.u_identically_zero},
                 {"decay_ratio", st.decay_ratio}};
  add_check(r, "t1_mean", std::abs(z) <= kMonteCarloSigmas, {{"z", finite_or_null(z)}, {"sigmas", kMonteCarloSigmas}});
  add_check(r, "u_survival_shape", st.monotone && st.eventually_below_one);

  CsvTable tt{"trace.csv", {"t", "vertex", "anchor", "good"}, {}};
  {
    std::size_t block = 0;
    const std::size_t limit = std::min(cfg.steps + 1, trace.positions.size());
    for (std::size_t t = 0; t < limit; ++t) {
      while (block + 1 < trace.regen.times.size() && trace.regen.times[block + 1] <= t) ++block;
      tt.rows.push_back({str(t), str(trace.positions[t]), str(trace.positions[trace.regen.times[block]]), str(trace.regen.good[t])});
    }
  }
  r.tables.push_back(std::move(tt));

  if (ctx.degree >= 3) {
    const Vertex anchors[] = {0};
    const auto rows = empirical_y_kernel(g, k, cfg.trials, cfg.seed, anchors);
    Json yk = Json::array();
    bool ok = true;
    for (const auto& row : rows) {
      ok = ok && row.max_z <= kMonteCarloSigmas;
      yk.push_back({{"anchor", row.anchor}, {"trials", row.trials}, {"tv", row.tv}, {"max_z", finite_or_null(row.max_z)}});
    }
    d["y_kernel"] = yk;
    add_check(r, "y_kernel_empirical", ok, {{"sigmas", kMonteCarloSigmas}});

    const auto et = escape_transfer_experiment(g, k, ctx.alpha, cfg.escape_t, cfg.escape_s, cfg.trials, cfg.seed, cfg.escape_sets);
    d["escape_transfer"] = {{"alpha", et.alpha},
                            {"t", et.t},
                            {"s", et.s},
                            {"tau", et.tau},
                            {"sets", et.sets.size()},
                            {"max_lhs", et.max_lhs},
                            {"max_y", et.max_y},
                            {"max_mc", et.max_mc},
                            {"max_escape_t", et.max_escape_t},
                            {"y_ratio", et.y_ratio},
                            {"y_ratio_per_step", et.y_ratio_per_step},
                            {"y_k_defect", et.y_k_defect}};
    add_check(r, "escape_transfer", et.pass, {{"rows", et.rows.size()}, {"sigmas", kMonteCarloSigmas}});
    if (assumption1_scan(g, k).max_excess == 0) {
      add_check(r, "y_equals_k_escape", et.y_k_defect <= 1e-10, {{"defect", et.y_k_defect}, {"tolerance", 1e-10}});
    }
  }
  return r;
}

SuiteResult run_one(Suite s, Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    switch (s) {
      case Suite::spectral: r = spectral_suite(ctx); break;
      case Suite::mixing: r = mixing_suite(ctx); break;
      case Suite::hitting: r = hitting_suite(ctx); break;
      case Suite::inflation: r = inflation_suite(ctx); break;
      case Suite::tree: r = tree_suite(ctx); break;
      case Suite::walk: r = walk_suite(ctx); break;
    }
  } catch (const std::exception& e) {
    r = SuiteResult{};
    add_check(r, "error", false, {{"message", e.what()}});
  }
  r.suite = s;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Json graph_info(const Graph& g) {
  const auto p = g.degree_profile();
  Json j = {{"provenance", g.provenance()},
            {"n", g.vertex_count()},
            {"m", g.edge_count()},
            {"min_degree", p.min_degree},
            {"max_degree", p.max_degree},
            {"regular", p.regular},
            {"components", component_count(g)},
            {"bipartite", is_bipartite(g)}};
  const auto gi = girth(g);
  j["girth"] = gi ? Json(*gi) : Json(nullptr);
  j["diameter"] = is_connected(g) ? Json(diameter(g)) : Json(nullptr);
  return j;
}

}  // namespace

Report run_suite(const ExperimentConfig& cfg) {
  const Graph g = build_graph(cfg.graph);
  Report rep;
  rep.config = cfg;
  rep.graph = g.provenance();
  rep.n = g.vertex_count();
  rep.m = g.edge_count();
  rep.graph_info = graph_info(g);

  Context ctx{cfg, g, std::nullopt, std::nullopt, {}, g.regular_degree(), 0.0, false};
  const bool needs_chain = std::any_of(cfg.suites.begin(), cfg.suites.end(), [](Suite s) { return s != Suite::tree; });
  if (needs_chain) ctx.chain = srw_chain(g);
  if (cfg.alpha) {
    ctx.alpha = *cfg.alpha;
  } else {
    ctx.alpha = default_alpha(g.vertex_count(), ctx.degree, cfg.k);
    ctx.alpha_default = true;
    warn("alpha not set; using max(1/n, (d-1)^(-3k^2)) = " + std::to_string(ctx.alpha));
  }
  const bool needs_spectrum = std::any_of(cfg.suites.begin(), cfg.suites.end(), [](Suite s) {
    return s == Suite::spectral || s == Suite::mixing || s == Suite::hitting;
  });
  double spectrum_seconds = 0.0;
  if (needs_spectrum) {
    const auto start = std::chrono::steady_clock::now();
    try {
      SpectrumOptions so;
      if (ctx.degree > 0) so.degree = ctx.degree;
      SpectrumMode mode = g.vertex_count() <= so.dense_budget ? SpectrumMode::dense_full : SpectrumMode::iterative_extremal;
      if (cfg.spectrum_mode == "dense") mode = SpectrumMode::dense_full;
      if (cfg.spectrum_mode == "iterative") mode = SpectrumMode::iterative_extremal;
      ctx.spectrum = spectrum(*ctx.chain, mode, so);
    } catch (const Error& e) {
      ctx.spectrum_error = e.what();
    }
    spectrum_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  if (cfg.parallel) {
    std::vector<std::future<SuiteResult>> futures;
    for (auto s : cfg.suites) futures.push_back(std::async(std::launch::async, [s, &ctx] { return run_one(s, ctx); }));
    for (auto& f : futures) rep.suites.push_back(f.get());
  } else {
    for (auto s : cfg.suites) rep.suites.push_back(run_one(s, ctx));
  }
  for (auto& s : rep.suites) {
    if (s.suite == Suite::spectral) s.seconds += spectrum_seconds;
  }
  return rep;
}

}  // namespace ramcut
