#include <fstream>
#include <sstream>

#include "ramcut/error.hpp"
#include "ramcut/graph.hpp"

namespace ramcut {

namespace {

// Parses exactly `count` unsigned integers from a line; anything else is an error.
std::vector<std::uint64_t> parse_fields(const std::string& line, std::size_t count, std::size_t lineno) {
  std::istringstream ss(line);
  std::vector<std::uint64_t> out;
  std::string token;
  while (ss >> token) {
    std::uint64_t value = 0;
    std::size_t used = 0;
    if (token.empty() || token.front() == '-' || token.front() == '+') {
      throw ParseError(lineno, "expected a non-negative integer, got '" + token + "'");
    }
    try {
      value = std::stoull(token, &used);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected a non-negative integer, got '" + token + "'");
    }
    if (used != token.size()) {
      throw ParseError(lineno, "expected a non-negative integer, got '" + token + "'");
    }
    out.push_back(value);
  }
  if (out.size() != count) {
    throw ParseError(lineno, "expected " + std::to_string(count) + " fields, found " +
                                 std::to_string(out.size()));
  }
  return out;
}

}  // namespace

Graph read_edge_list(std::istream& in, std::string provenance) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing \"n m\" header");
  ++lineno;
  const auto header = parse_fields(line, 2, lineno);
  const auto n = header[0];
  const auto m = header[1];
  std::vector<Edge> edges;
  edges.reserve(m);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto uv = parse_fields(line, 2, lineno);
    if (uv[0] >= n || uv[1] >= n) {
      throw ParseError(lineno, "vertex out of range for n=" + std::to_string(n));
    }
    if (uv[0] == uv[1]) throw ParseError(lineno, "self-loop");
    edges.push_back({static_cast<Vertex>(uv[0]), static_cast<Vertex>(uv[1])});
  }
  if (edges.size() != m) {
    throw ParseError(lineno, "header declares " + std::to_string(m) + " edges, found " +
                                 std::to_string(edges.size()));
  }
  try {
    return Graph(n, std::move(edges), std::move(provenance));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(lineno, e.what());
  }
}

Graph read_edge_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file " + path.string());
  return read_edge_list(in, "file:" + path.filename().string());
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list_file(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write graph file " + path.string());
  write_edge_list(out, g);
}

}  // namespace ramcut
