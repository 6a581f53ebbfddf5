#pragma once

#include <iosfwd>
#include <string>

#include "sbm/sampler.hpp"

namespace sbm {

// Text format: header "n m s" (s = 0 when unlabeled), then m lines "u v",
// then n label lines when s > 0.
void write_edge_list(std::ostream& out, const LabeledGraph& graph);
std::string edge_list_string(const LabeledGraph& graph);

// Throws IoError with the offending line number on malformed input.
LabeledGraph read_edge_list(std::istream& in);
LabeledGraph read_edge_list_file(const std::string& path);

}  // namespace sbm
