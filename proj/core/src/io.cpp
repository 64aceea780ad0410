#include "gml/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gml/error.hpp"

namespace gml {

void write_graphset(std::ostream& out, std::span<const LabeledGraph> graphs) {
  out << "GRAPHSET v1 " << graphs.size() << '\n';
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    out << "graph " << i << ' ' << g.graph.node_count() << ' ' << g.label << '\n';
    for (const auto& [u, v] : g.graph.edges()) out << u << ' ' << v << '\n';
    out << "end\n";
  }
}

void save_graphset(const std::filesystem::path& path, std::span<const LabeledGraph> graphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_graphset(out, graphs);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

std::size_t parse_count(std::string_view word, std::size_t line) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size()) {
    throw ParseError("expected a non-negative integer, got '" + std::string(word) + "'", line);
  }
  return value;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // False at end of input.
  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    return true;
  }
  std::size_t number() const noexcept { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

}  // namespace

LabeledGraphSet read_graphset(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("missing GRAPHSET header", 1);
  auto words = split_words(line);
  if (words.size() != 3 || words[0] != "GRAPHSET" || words[1] != "v1") {
    throw ParseError("expected 'GRAPHSET v1 <count>'", reader.number());
  }
  const std::size_t count = parse_count(words[2], reader.number());

  LabeledGraphSet out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!reader.next(line)) {
      throw ParseError("expected " + std::to_string(count) + " graphs, found " +
                           std::to_string(k),
                       reader.number() + 1);
    }
    words = split_words(line);
    if (words.size() != 4 || words[0] != "graph") {
      throw ParseError("expected 'graph <id> <n> <label>'", reader.number());
    }
    const std::size_t header_line = reader.number();
    if (parse_count(words[1], header_line) != k) {
      throw ParseError("graph id must be " + std::to_string(k), header_line);
    }
    const std::size_t n = parse_count(words[2], header_line);
    if (n == 0) throw ValidationError("graph must have at least one node", header_line);
    const std::size_t label = parse_count(words[3], header_line);
    if (label > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
      throw ValidationError("label out of range", header_line);
    }

    Graph g(n);
    bool closed = false;
    while (reader.next(line)) {
      words = split_words(line);
      if (words.size() == 1 && words[0] == "end") {
        closed = true;
        break;
      }
      if (words.size() != 2) throw ParseError("expected '<u> <v>' or 'end'", reader.number());
      const std::size_t u = parse_count(words[0], reader.number());
      const std::size_t v = parse_count(words[1], reader.number());
      if (u >= n || v >= n) {
        throw ValidationError("edge endpoint out of range for n = " + std::to_string(n),
                              reader.number());
      }
      if (u == v) throw ValidationError("self-loop " + std::to_string(u), reader.number());
      if (g.has_edge(u, v)) {
        throw ValidationError(
            "duplicate edge " + std::to_string(u) + " " + std::to_string(v), reader.number());
      }
      g.add_edge(u, v);
    }
    if (!closed) throw ParseError("unterminated graph, expected 'end'", reader.number() + 1);
    out.push_back({std::move(g), static_cast<int>(label), 0, -1});
  }
  while (reader.next(line)) {
    if (!split_words(line).empty()) throw ParseError("unexpected content after last graph", reader.number());
  }
  return out;
}

LabeledGraphSet load_graphset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_graphset(in);
}

}  // namespace gml
