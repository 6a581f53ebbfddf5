#include "sbm/graph_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sbm/error.hpp"

namespace sbm {

namespace {

[[noreturn]] void malformed(int line, const std::string& what) {
  throw Error(ErrorCode::IoError, "edge list line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_edge_list(std::ostream& out, const LabeledGraph& graph) {
  out << graph.n << ' ' << graph.edges.size() << ' ' << (graph.has_labels() ? graph.s : 0) << '\n';
  for (const auto& [u, v] : graph.edges) out << u << ' ' << v << '\n';
  if (graph.has_labels()) {
    for (int l : graph.labels) out << l << '\n';
  }
}

std::string edge_list_string(const LabeledGraph& graph) {
  std::ostringstream out;
  write_edge_list(out, graph);
  return out.str();
}

LabeledGraph read_edge_list(std::istream& in) {
  std::string text;
  int line_no = 0;
  auto next_line = [&](std::istringstream& fields) {
    if (!std::getline(in, text)) malformed(line_no + 1, "unexpected end of file");
    ++line_no;
    fields = std::istringstream(text);
  };
  std::istringstream fields;
  next_line(fields);
  long long n = 0;
  long long m = 0;
  long long s = 0;
  if (!(fields >> n >> m >> s) || n < 0 || m < 0 || s < 0) malformed(line_no, "expected 'n m s'");
  LabeledGraph g;
  g.n = static_cast<int>(n);
  g.s = static_cast<int>(s);
  g.edges.reserve(m);
  for (long long e = 0; e < m; ++e) {
    next_line(fields);
    long long u = 0;
    long long v = 0;
    if (!(fields >> u >> v)) malformed(line_no, "expected 'u v'");
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) malformed(line_no, "vertex out of range or self-loop");
    g.edges.emplace_back(static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v)));
  }
  std::sort(g.edges.begin(), g.edges.end());
  if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end()) {
    throw Error(ErrorCode::IoError, "edge list contains a duplicate edge");
  }
  if (s > 0) {
    g.labels.resize(n);
    for (auto& l : g.labels) {
      next_line(fields);
      if (!(fields >> l) || l < 0 || l >= s) malformed(line_no, "label outside [0, s)");
    }
  }
  return g;
}

LabeledGraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_edge_list(in);
}

}  // namespace sbm
