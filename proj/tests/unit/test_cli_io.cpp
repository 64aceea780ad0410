#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gml/cli.hpp"
#include "gml/config.hpp"
#include "gml/error.hpp"
#include "gml/graphgen.hpp"
#include "gml/io.hpp"
#include "helpers.hpp"

using namespace gml;
namespace fs = std::filesystem;

namespace {

std::string write_set(const LabeledGraphSet& set) {
  std::ostringstream out;
  write_graphset(out, set);
  return out.str();
}

LabeledGraphSet read_set(const std::string& text) {
  std::istringstream in(text);
  return read_graphset(in);
}

// Line number carried by the ParseError (or ValidationError) thrown for `text`.
std::size_t error_line(const std::string& text) {
  try {
    read_set(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gml_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("graph-set text format") {
  CHECK(write_set({{complete_graph(3), 0, 0, -1}}) ==
        "GRAPHSET v1 1\ngraph 0 3 0\n0 1\n0 2\n1 2\nend\n");
  CHECK(write_set({}) == "GRAPHSET v1 0\n");
  CHECK(read_set("GRAPHSET v1 0\n").empty());

  const auto two = read_set("GRAPHSET v1 2\ngraph 0 2 1\n0 1\nend\ngraph 1 4 0\n2 3\nend\n");
  REQUIRE(two.size() == 2);
  CHECK(two[0].label == 1);
  CHECK(two[1].graph.node_count() == 4);
  CHECK(two[1].graph.has_edge(3, 2));
  CHECK(two[1].graph.edge_count() == 1);
}

TEST_CASE("graph-set round trip over every generator (property)") {
  Rng rng(2024);
  LabeledGraphSet set;
  for (std::size_t i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng.below(30);
    Graph g;
    switch (i % 5) {
      case 0: g = gen_er(n, rng.uniform(), i); break;
      case 1: g = gen_ba(n, 1 + rng.below(n - 1), i); break;
      case 2: g = swap_rewire(gen_ba(n, 1, i), 5, i); break;
      case 3: g = permute_nodes(gen_er(n, 0.4, i), i); break;
      default: g = gml::testing::random_graph(n, rng); break;
    }
    set.push_back({std::move(g), static_cast<int>(rng.below(5)), 0, -1});
  }
  const std::string text = write_set(set);
  const auto back = read_set(text);
  REQUIRE(back.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(back[i].label == set[i].label);
    CHECK(back[i].graph.node_count() == set[i].graph.node_count());
    CHECK(back[i].graph.edges() == set[i].graph.edges());
  }
  CHECK(write_set(back) == text);

  const auto dir = fresh_dir("roundtrip");
  save_graphset(dir / "set.txt", set);
  CHECK(slurp(dir / "set.txt") == text);
  CHECK(load_graphset(dir / "set.txt").size() == 1000);
}

TEST_CASE("malformed graph-set files report the offending line") {
  CHECK(error_line("") == 1);
  CHECK(error_line("GRAPHSET v2 1\n") == 1);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3\n0 1\nend\n") == 2);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 0\n0 x\nend\n") == 3);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 0\n0 1\n") == 4);
  CHECK(error_line("GRAPHSET v1 2\ngraph 0 3 0\nend\n") == 4);
  CHECK(error_line("GRAPHSET v1 1\ngraph 1 3 0\nend\n") == 2);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 0\nend\nextra\n") == 4);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 -1\nend\n") == 2);
}

TEST_CASE("invalid graphs are validation errors") {
  CHECK_THROWS_AS(read_set("GRAPHSET v1 1\ngraph 0 3 0\n0 3\nend\n"), ValidationError);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 0\n0 1\n3 1\nend\n") == 4);
  CHECK_THROWS_AS(read_set("GRAPHSET v1 1\ngraph 0 3 0\n0 1\n1 0\nend\n"), ValidationError);
  CHECK(error_line("GRAPHSET v1 1\ngraph 0 3 0\n0 1\n0 1\nend\n") == 4);
  CHECK_THROWS_AS(read_set("GRAPHSET v1 1\ngraph 0 3 0\n2 2\nend\n"), ValidationError);
  CHECK_THROWS_AS(read_set("GRAPHSET v1 1\ngraph 0 0 0\nend\n"), ValidationError);
  CHECK_THROWS_AS(load_graphset(fs::temp_directory_path() / "gml_no_such_file.txt"),
                  std::runtime_error);
}

TEST_CASE("config parsing") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream(dir / "empty.cfg") << "";
    std::ofstream(dir / "lr.cfg") << "# comment\n\ntrain.lr = 0.5\ndata.n = 12  # trailing\n";
    std::ofstream(dir / "bad.cfg") << "train.lr = 0.1\nmodel.nope = 3\n";
  }
  const Settings defaults;
  const Settings empty = parse_config(dir / "empty.cfg", {});
  CHECK(resolved_text(empty) == resolved_text(defaults));

  const Settings file = parse_config(dir / "lr.cfg", {});
  CHECK(file.train.lr == 0.5);
  CHECK(file.data.n == 12);
  const std::vector<std::string> overrides{"--train.lr=0.01", "--n=30"};
  const Settings both = parse_config(dir / "lr.cfg", overrides);
  CHECK(both.train.lr == 0.01);
  CHECK(both.data.n == 30);

  const std::vector<std::string> bogus{"--bogus.key=1"};
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, bogus), "unknown key bogus.key", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(dir / "bad.cfg", {}), doctest::Contains("line 2"), ConfigError);
  const std::vector<std::string> mistyped{"--train.epochs=many"};
  CHECK_THROWS_WITH_AS(parse_config(std::nullopt, mistyped), doctest::Contains("train.epochs"),
                       ConfigError);
  const std::vector<std::string> no_value{"--train.lr"};
  CHECK_THROWS_AS(parse_config(std::nullopt, no_value), ConfigError);

  // Every key reads back what was resolved.
  Settings s;
  for (const auto& key : config_keys()) {
    const std::string value = get_value(s, key);
    CHECK_NOTHROW(set_value(s, key, value));
    CHECK(get_value(s, key) == value);
  }
  set_value(s, "model.rules", "A,DAD");
  CHECK(s.model.rules ==
        std::vector<PropagationRule>{PropagationRule::Adjacency, PropagationRule::SymmetricNorm});
  set_value(s, "exp.abl.subsets", "A;A+DA");
  CHECK(s.experiment.abl_subsets.size() == 2);
}

TEST_CASE("cli exit codes") {
  const auto none = run({});
  CHECK(none.code == 1);
  CHECK(none.err.find("usage:") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"frobnicate"}).code == 1);
  const auto bogus = run({"generate", "--bogus.key=1"});
  CHECK(bogus.code == 1);
  CHECK(bogus.err.find("unknown key bogus.key") != std::string::npos);
  CHECK(run({"experiment"}).code == 1);
  CHECK(run({"experiment", "fig9"}).code == 1);
  CHECK(run({"moments", (fs::temp_directory_path() / "gml_missing.txt").string()}).code == 2);
  CHECK(run({"generate", "--kind=ba", "--n=3", "--m=5", "--out=" +
                                                       (fresh_dir("bad_m") / "g.txt").string()})
            .code == 2);
}

TEST_CASE("generate and moments are deterministic") {
  const auto dir = fresh_dir("generate");
  const std::string f1 = (dir / "a.txt").string(), f2 = (dir / "b.txt").string();
  CHECK(run({"generate", "--kind=ba", "--n=20", "--m=2", "--count=10", "--seed=1", "--out=" + f1}).code == 0);
  CHECK(run({"generate", "--kind=ba", "--n=20", "--m=2", "--count=10", "--seed=1", "--out=" + f2}).code == 0);
  CHECK(slurp(f1) == slurp(f2));
  const auto set = load_graphset(f1);
  CHECK(set.size() == 10);
  for (const auto& g : set) CHECK(g.graph.edge_count() == 36);

  const auto m1 = run({"moments", f1, "--order=2"});
  const auto m2 = run({"moments", f1, "--order=2"});
  CHECK(m1.code == 0);
  CHECK(m1.out == m2.out);
  CHECK(m1.out.rfind("graph 0 ", 0) == 0);

  const std::string bench = (dir / "bench.txt").string();
  CHECK(run({"generate", "--kind=ba_vs_er", "--n=10", "--count=5", "--out=" + bench}).code == 0);
  CHECK(load_graphset(bench).size() == 10);
}

TEST_CASE("train and experiment subcommands") {
  const auto dir = fresh_dir("train");
  const auto reg = run({"train", "--count=20", "--n=10", "--train.epochs=3",
                        "--out=" + (dir / "report.csv").string()});
  CHECK(reg.code == 0);
  CHECK(reg.out.rfind("metric mse = ", 0) == 0);
  CHECK(slurp(dir / "report.csv").rfind("row,epoch,train_loss,val_loss,metric\n", 0) == 0);

  const auto cls = run({"train", "--train.task=classification", "--kind=ba_vs_er", "--n=10",
                        "--count=10", "--model.arch=modular", "--model.rules=A,DA,DAD",
                        "--train.epochs=2"});
  CHECK(cls.code == 0);
  CHECK(cls.out.rfind("metric accuracy = ", 0) == 0);

  const auto exp = run({"experiment", "ks", "--exp.ks.n=10", "--exp.ks.per_class=10",
                        "--exp.ks.pairs=3", "--out=" + (dir / "exp").string()});
  CHECK(exp.code == 0);
  CHECK(fs::exists(dir / "exp" / "ks.csv"));
  CHECK(fs::exists(dir / "exp" / "manifest.txt"));
}
