#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ramcut/error.hpp"
#include "ramcut/graph.hpp"

namespace ramcut {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportVersion = "ramcut-report/1";

/// Invalid configuration; the message names the offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GraphSpec {
  /// named | random-regular | lps | file
  std::string kind = "named";
  std::string name = "petersen";
  std::size_t size = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t seed = 1;
  std::optional<std::size_t> min_girth;
  std::uint64_t p = 0;
  std::uint64_t q = 0;
  std::string path;
};

enum class Suite { spectral, mixing, hitting, inflation, tree, walk };

const char* to_string(Suite s);
std::vector<Suite> all_suites();

struct ExperimentConfig {
  GraphSpec graph;
  std::vector<Suite> suites = all_suites();
  std::size_t k = 2;
  /// Small-set scale; defaults to max(1/n, (d-1)^{-3k^2}).
  std::optional<double> alpha;
  std::vector<double> eps = {0.1, 0.25, 0.5, 0.75, 0.9};
  double eps_hit = 0.1;
  std::vector<std::size_t> t_grid = {0, 1, 2, 4, 8, 16, 32, 64, 100};
  std::size_t trials = 10000;
  std::size_t blocks = 10000;
  std::size_t steps = 300;
  std::uint64_t seed = 1;
  std::string output_dir = "ramcut-out";
  bool parallel = false;
  /// auto | dense | iterative
  std::string spectrum_mode = "auto";
  std::size_t random_sets = 20;
  std::size_t poincare_horizon = 100;
  std::size_t escape_t = 12;
  std::size_t escape_s = 6;
  std::size_t escape_sets = 16;
  std::size_t curves = 4;
};

/// Parses a config object; every field is optional. Unknown fields are errors.
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {});
Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig read_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

Graph build_graph(const GraphSpec& spec);

/// Default small-set scale max(1/n, (d-1)^{-3k^2}); 1/n when d < 3.
double default_alpha(std::size_t n, std::size_t d, std::size_t k);

struct Check {
  std::string name;
  bool asserted = true;
  bool pass = true;
  Json detail = Json::object();
};

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct SuiteResult {
  Suite suite = Suite::spectral;
  bool skipped = false;
  std::string skip_reason;
  std::vector<Check> checks;
  Json data = Json::object();
  std::vector<CsvTable> tables;
  double seconds = 0.0;

  bool pass() const;
};

struct Report {
  ExperimentConfig config;
  std::string graph;
  std::size_t n = 0;
  std::size_t m = 0;
  Json graph_info = Json::object();
  std::vector<SuiteResult> suites;

  bool pass() const;
  /// Names of failing asserted checks, "suite.check".
  std::vector<std::string> failures() const;
};

/// Runs the selected suites. Throws on configuration or construction errors;
/// errors inside a suite become failing checks.
Report run_suite(const ExperimentConfig& cfg);

Json report_to_json(const Report& r);
std::string report_text(const Report& r);

/// Writes report.json, report.txt, CSV tables and the timing sidecar timing.json.
void write_report(const Report& r, const std::filesystem::path& dir);

/// RAMCUT_OUT when set, else the configured directory.
std::filesystem::path output_directory(const ExperimentConfig& cfg);

/// Fixed 17-significant-digit scientific notation used in every CSV.
std::string csv_number(double x);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Cross-report aggregation: max implied hitmix constant, max measured C-hat
/// per excess class, cutoff ratios by graph size.
Json emit_summary(std::span<const Json> reports);

/// Re-serialization used for reports: two-space indent, trailing newline.
std::string dump_json(const Json& j);

}  // namespace ramcut
