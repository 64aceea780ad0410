#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "gml/graphgen.hpp"

namespace gml {

// Text graph-set format:
//
//   GRAPHSET v1 <count>
//   graph <id> <n> <label>
//   <u> <v>            one line per edge, u < v, lexicographic
//   end
//
// Only the graph and its label are stored; group and source are not.

void write_graphset(std::ostream& out, std::span<const LabeledGraph> graphs);
void save_graphset(const std::filesystem::path& path, std::span<const LabeledGraph> graphs);

/// Throws ParseError (with the line number) for malformed lines and
/// ValidationError for out-of-range, self-loop or duplicate edges.
LabeledGraphSet read_graphset(std::istream& in);
LabeledGraphSet load_graphset(const std::filesystem::path& path);

}  // namespace gml
