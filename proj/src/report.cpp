#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ramcut/harness.hpp"

namespace ramcut {

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

Json report_to_json(const Report& r) {
  Json j = Json::object();
  j["version"] = kReportVersion;
  j["config"] = config_to_json(r.config);
  Json g = r.graph_info;
  g["provenance"] = r.graph;
  j["graph"] = g;
  j["pass"] = r.pass();
  j["failures"] = r.failures();
  Json suites = Json::array();
  for (const auto& s : r.suites) {
    Json sj = Json::object();
    sj["suite"] = to_string(s.suite);
    sj["pass"] = s.pass();
    sj["skipped"] = s.skipped;
    if (s.skipped) sj["skip_reason"] = s.skip_reason;
    Json checks = Json::array();
    for (const auto& c : s.checks) {
      checks.push_back({{"name", c.name}, {"asserted", c.asserted}, {"pass", c.pass}, {"detail", c.detail}});
    }
    sj["checks"] = checks;
    sj["data"] = s.data;
    Json files = Json::array();
    for (const auto& t : s.tables) files.push_back(t.file);
    sj["tables"] = files;
    suites.push_back(sj);
  }
  j["suites"] = suites;
  return j;
}

std::string report_text(const Report& r) {
  std::ostringstream out;
  out << "graph " << r.graph << ": n=" << r.n << " m=" << r.m << "\n";
  for (const auto& s : r.suites) {
    out << "[" << to_string(s.suite) << "] ";
    if (s.skipped) {
      out << "SKIPPED (" << s.skip_reason << ")\n";
      continue;
    }
    out << (s.pass() ? "PASS" : "FAIL") << "\n";
    for (const auto& c : s.checks) {
      const char* status = !c.asserted ? (c.pass ? "info" : "note") : (c.pass ? "pass" : "FAIL");
      out << "  " << status << "  " << c.name;
      if (!c.pass || !c.asserted) out << "  " << c.detail.dump();
      out << "\n";
    }
  }
  out << (r.pass() ? "ALL PASS" : "FAILURES: " + std::to_string(r.failures().size())) << "\n";
  return out.str();
}

std::filesystem::path output_directory(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("RAMCUT_OUT"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void write_report(const Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", dump_json(report_to_json(r)));
  write_text(dir / "report.txt", report_text(r));
  Json timing = Json::object();
  for (const auto& s : r.suites) {
    for (const auto& t : s.tables) write_csv(dir / (std::string(to_string(s.suite)) + "_" + t.file), t);
    timing[to_string(s.suite)] = s.seconds;
  }
  write_text(dir / "timing.json", dump_json(timing));
}

Json emit_summary(std::span<const Json> reports) {
  if (reports.empty()) throw Error("summary: no reports given");
  double max_implied = -1.0;
  bool have_implied = false;
  std::map<std::string, double> c_hat;
  Json cutoff = Json::array();
  Json graphs = Json::array();
  std::size_t passing = 0;
  for (const auto& rep : reports) {
    if (!rep.contains("version") || rep["version"] != kReportVersion) {
      throw Error("summary: report version mismatch (expected " + std::string(kReportVersion) + ")");
    }
    graphs.push_back(rep["graph"].value("provenance", ""));
    if (rep.value("pass", false)) ++passing;
    for (const auto& s : rep["suites"]) {
      const auto name = s.value("suite", "");
      const auto& data = s["data"];
      if (name == "hitting" && data.contains("max_implied_constant") && data["max_implied_constant"].is_number()) {
        max_implied = std::max(max_implied, data["max_implied_constant"].get<double>());
        have_implied = true;
      }
      if (name == "inflation" && data.contains("c_hat_by_excess")) {
        for (const auto& [excess, v] : data["c_hat_by_excess"].items()) {
          auto& slot = c_hat[excess];
          slot = std::max(slot, v.get<double>());
        }
      }
      if (name == "mixing" && data.contains("cutoff_ratios")) {
        Json row = {{"n", rep["graph"].value("n", 0)}, {"graph", rep["graph"].value("provenance", "")}};
        row["ratios"] = data["cutoff_ratios"];
        cutoff.push_back(row);
      }
    }
  }
  std::sort(cutoff.begin(), cutoff.end(), [](const Json& a, const Json& b) { return a["n"] < b["n"]; });
  // t_mix(0.1) / t_mix(0.9) by increasing n; cutoff predicts a nonincreasing sequence.
  Json trend = Json::array();
  for (const auto& row : cutoff) {
    for (const auto& cr : row["ratios"]) {
      if (std::abs(cr.value("eps", 0.0) - 0.1) < 1e-12) trend.push_back({{"n", row["n"]}, {"ratio", cr["ratio"]}});
    }
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < trend.size(); ++i) {
    nonincreasing = nonincreasing && trend[i]["ratio"].get<double>() <= trend[i - 1]["ratio"].get<double>();
  }
  Json out = Json::object();
  out["version"] = kReportVersion;
  out["reports"] = reports.size();
  out["passing"] = passing;
  out["graphs"] = graphs;
  out["max_implied_constant"] = have_implied ? Json(max_implied) : Json(nullptr);
  Json ch = Json::object();
  for (const auto& [excess, v] : c_hat) ch[excess] = v;
  out["max_c_hat_by_excess"] = ch;
  out["cutoff_by_n"] = cutoff;
  out["cutoff_trend"] = trend;
  out["cutoff_nonincreasing"] = trend.size() >= 2 ? Json(nonincreasing) : Json(nullptr);
  return out;
}

}  // namespace ramcut
