#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ramcut/graph.hpp"
#include "ramcut/harness.hpp"
#include "ramcut/log.hpp"

namespace {

using namespace ramcut;

struct Flags {
  std::string graph = "petersen";
  std::size_t size = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t p = 0;
  std::uint64_t q = 0;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::vector<double> eps;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> min_girth;
  std::string file;
  std::string config;
  bool parallel = false;
};

void add_graph_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--graph", f.graph,
                  "petersen | complete | cycle | hypercube | prism | random-regular | lps | file");
  cmd->add_option("--size", f.size, "size parameter of a named graph");
  cmd->add_option("--n", f.n, "vertex count (random-regular)");
  cmd->add_option("--d", f.d, "degree (random-regular)");
  cmd->add_option("--p", f.p, "LPS generator prime");
  cmd->add_option("--q", f.q, "LPS field prime");
  cmd->add_option("--min-girth", f.min_girth, "girth floor (random-regular)");
  cmd->add_option("--file", f.file, "edge-list file (--graph file)");
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--config", f.config, "JSON config; its fields override flags")->check(CLI::ExistingFile);
}

void add_run_flags(CLI::App* cmd, Flags& f) {
  add_graph_flags(cmd, f);
  cmd->add_option("--k", f.k, "inflation / regeneration radius");
  cmd->add_option("--alpha", f.alpha, "small-set mass scale");
  cmd->add_option("--eps", f.eps, "TV thresholds")->delimiter(',');
  cmd->add_option("--steps", f.steps, "walk / level-chain horizon");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials");
  cmd->add_option("--out", f.out, "output directory (RAMCUT_OUT overrides)");
  cmd->add_flag("--parallel", f.parallel, "run suites concurrently");
}

ExperimentConfig to_config(const Flags& f, std::vector<Suite> suites) {
  ExperimentConfig cfg;
  auto& g = cfg.graph;
  if (f.graph == "random-regular") {
    g.kind = "random-regular";
  } else if (f.graph == "lps") {
    g.kind = "lps";
  } else if (f.graph == "file") {
    g.kind = "file";
  } else {
    g.kind = "named";
    g.name = f.graph;
  }
  g.size = f.size;
  g.n = f.n;
  g.d = f.d;
  g.p = f.p;
  g.q = f.q;
  g.min_girth = f.min_girth;
  g.path = f.file;
  if (f.seed) {
    g.seed = *f.seed;
    cfg.seed = *f.seed;
  }
  cfg.suites = std::move(suites);
  if (f.k) cfg.k = *f.k;
  cfg.alpha = f.alpha;
  if (!f.eps.empty()) cfg.eps = f.eps;
  if (f.steps) cfg.steps = *f.steps;
  if (f.trials) {
    cfg.trials = *f.trials;
    cfg.blocks = *f.trials;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  cfg.parallel = f.parallel;
  // Route flag values through the same validation as config files.
  cfg = config_from_json(config_to_json(cfg));
  if (!f.config.empty()) cfg = read_config_file(f.config, cfg);
  return cfg;
}

int run(const ExperimentConfig& cfg) {
  const auto report = run_suite(cfg);
  const auto dir = output_directory(cfg);
  write_report(report, dir);
  std::cout << report_text(report);
  std::cout << "report: " << (dir / "report.json").string() << "\n";
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  set_warning_sink([](std::string_view m) { std::cerr << "warning: " << m << "\n"; });
  CLI::App app{"ramcut: degree-inflation and cutoff verification for regular graphs"};
  app.require_subcommand(1);
  Flags f;
  std::string gen_out;
  std::vector<std::string> summary_inputs;
  std::string summary_out;

  auto* gen = app.add_subcommand("gen", "build a graph and write its edge list");
  add_graph_flags(gen, f);
  gen->add_option("--out", gen_out, "edge-list path (stdout when omitted)");
  auto* inflate_cmd = app.add_subcommand("inflate", "write the edge list of G(k)");
  add_graph_flags(inflate_cmd, f);
  inflate_cmd->add_option("--k", f.k, "inflation radius");
  inflate_cmd->add_option("--out", gen_out, "edge-list path (stdout when omitted)");

  const std::vector<std::pair<std::string, Suite>> single = {
      {"spectrum", Suite::spectral}, {"mix", Suite::mixing}, {"hit", Suite::hitting},
      {"tree", Suite::tree},         {"walk", Suite::walk},  {"inflation", Suite::inflation}};
  std::vector<CLI::App*> single_cmds;
  for (const auto& [name, suite] : single) {
    auto* cmd = app.add_subcommand(name, std::string("run the ") + to_string(suite) + " suite");
    add_run_flags(cmd, f);
    single_cmds.push_back(cmd);
  }
  auto* verify = app.add_subcommand("verify", "run every suite (or those in --config)");
  add_run_flags(verify, f);
  auto* summary = app.add_subcommand("summary", "aggregate report.json files");
  summary->add_option("reports", summary_inputs, "report.json files")->required()->check(CLI::ExistingFile);
  summary->add_option("--out", summary_out, "write the summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed() || inflate_cmd->parsed()) {
      auto cfg = to_config(f, all_suites());
      Graph g = build_graph(cfg.graph);
      if (inflate_cmd->parsed()) g = inflate(g, cfg.k);
      if (gen_out.empty()) {
        write_edge_list(std::cout, g);
      } else {
        write_edge_list_file(gen_out, g);
      }
      return 0;
    }
    if (summary->parsed()) {
      std::vector<Json> reports;
      for (const auto& path : summary_inputs) {
        std::ifstream in(path);
        reports.push_back(Json::parse(in));
      }
      const auto text = dump_json(emit_summary(reports));
      if (summary_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(summary_out) << text;
      }
      return 0;
    }
    for (std::size_t i = 0; i < single.size(); ++i) {
      if (single_cmds[i]->parsed()) return run(to_config(f, {single[i].second}));
    }
    return run(to_config(f, all_suites()));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
