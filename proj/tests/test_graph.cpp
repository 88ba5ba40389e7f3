#include <catch_amalgamated.hpp>

#include <map>

#include "drf/graph.hpp"

using namespace drf;

namespace {

Dataset mini_dataset() {
  Dataset ds(1e-6);
  const Shape s1({1});
  auto col = [&](const char* name, std::initializer_list<double> vals, bool scalar) {
    Dataset::Column c;
    c.name = name;
    c.shape = s1;
    c.scalar_header = scalar;
    for (double v : vals) c.samples.push_back(Sample(s1, {v}));
    ds.add_column(std::move(c));
  };
  col("m1", {0.0, 0.1, 0.2, 5.0, 5.1, 5.2}, false);
  col("m2", {10.0, 10.1, 10.2, 20.0, 20.1, 20.2}, false);
  col("label", {0, 0, 0, 1, 1, 1}, true);
  return ds;
}

GraphConfig assoc_config() {
  GraphConfig g;
  g.sources = {"m1", "m2", "label"};
  NodeConfig n;
  n.name = "assoc";
  n.kind = "associative";
  n.primitive.merge_radius = 0.5;
  g.nodes.push_back(n);
  g.edges = {{"m1", "assoc", 0}, {"m2", "assoc", 1}, {"label", "assoc", 2}};
  g.sink = "assoc";
  return g;
}

GraphConfig column_config() {
  GraphConfig g;
  g.sources = {"m1"};
  NodeConfig n;
  n.name = "col";
  n.kind = "column";
  n.levels = 2;
  n.primitive.merge_radius = 0.3;
  g.nodes.push_back(n);
  g.edges = {{"m1", "col", 0}};
  g.sink = "col";
  return g;
}

}  // namespace

TEST_CASE("config validation rejects malformed graphs", "[graph]") {
  GraphConfig g = assoc_config();
  CHECK_NOTHROW(g.validate());

  g.nodes[0].kind = "blender";
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = assoc_config();
  g.edges[1].slot = 0;  // duplicate slot
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = assoc_config();
  g.edges[2].slot = 5;  // hole in 0..k-1
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = assoc_config();
  g.sink = "elsewhere";
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = assoc_config();
  g.edges.pop_back();
  g.edges.pop_back();  // associative with a single input
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g = column_config();
  g.edges.push_back({"m1", "col", 1});  // column with two inputs
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("cycles are reported", "[graph]") {
  GraphConfig g;
  g.sources = {"m1", "m2"};
  NodeConfig a, b;
  a.name = "a";
  a.kind = "associative";
  a.primitive.merge_radius = 0.1;
  b.name = "b";
  b.kind = "associative";
  b.primitive.merge_radius = 0.1;
  g.nodes = {a, b};
  g.edges = {{"m1", "a", 0}, {"b", "a", 1}, {"m2", "b", 0}, {"a", "b", 1}};
  g.sink = "b";
  try {
    g.validate();
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("cycle") != std::string::npos);
  }
}

TEST_CASE("topological order follows declaration among ready nodes", "[graph]") {
  GraphConfig g;
  g.sources = {"m1", "m2"};
  NodeConfig c1, c2, top;
  c1.name = "c1";
  c1.kind = "column";
  c1.primitive.merge_radius = 0.1;
  c2.name = "c2";
  c2.kind = "column";
  c2.primitive.merge_radius = 0.1;
  top.name = "top";
  top.kind = "associative";
  top.primitive.merge_radius = 0.1;
  g.nodes = {c2, c1, top};  // c2 declared first on purpose
  g.edges = {{"m1", "c1", 0}, {"m2", "c2", 0}, {"c1", "top", 0}, {"c2", "top", 1}};
  g.sink = "top";
  const auto order = g.topo_order();
  REQUIRE(order.size() == 3);
  CHECK(order[0] == "c2");
  CHECK(order[1] == "c1");
  CHECK(order[2] == "top");
}

TEST_CASE("graph config json round trip", "[graph]") {
  const GraphConfig g = assoc_config();
  const GraphConfig back = GraphConfig::from_json(g.to_json());
  CHECK(back.to_json() == g.to_json());
}

TEST_CASE("training an associative sink and completing a label", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(assoc_config(), ds);
  REQUIRE(g.trained());
  const auto stats = g.stats();
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].input_card == 6);
  CHECK(stats[0].output_card < 6);
  CHECK(g.dataset_fingerprint() == ds.fingerprint());

  std::map<std::string, Sample> known;
  known.emplace("m1", Sample(Shape({1}), {0.1}));
  known.emplace("m2", Sample(Shape({1}), {10.1}));
  const auto resolved = g.complete(known);
  REQUIRE(resolved.count("label"));
  CHECK(resolved.at("label") == Sample(Shape({1}), {0.0}));

  known.clear();
  known.emplace("m1", Sample(Shape({1}), {5.1}));
  known.emplace("m2", Sample(Shape({1}), {20.0}));
  CHECK(g.complete(known).at("label") == Sample(Shape({1}), {1.0}));
}

TEST_CASE("column node training, projection and stats", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(column_config(), ds);
  const auto stats = g.stats();
  CHECK(stats[0].input_card == 6);
  CHECK(stats[0].output_card == 1);  // two levels of reduction on six points

  const auto sources = g.project("col", ArchetypeId{0});
  REQUIRE(sources.count("m1"));
  CHECK(ds.column_set("m1").contains(sources.at("m1")));

  // a column sink cannot complete
  std::map<std::string, Sample> known;
  known.emplace("m1", Sample(Shape({1}), {0.0}));
  CHECK_THROWS_AS(g.complete(known), std::invalid_argument);
}

TEST_CASE("graph encode needs every source", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(assoc_config(), ds);
  std::map<std::string, Sample> sources;
  sources.emplace("m1", Sample(Shape({1}), {0.0}));
  CHECK_THROWS_AS(g.encode(sources), std::invalid_argument);
  sources.emplace("m2", Sample(Shape({1}), {10.0}));
  sources.emplace("label", Sample(Shape({1}), {0.0}));
  const auto [id, vec] = g.encode(sources);
  CHECK(vec.size() == 3);
  const auto down = g.project("assoc", id);
  CHECK(down.at("m1") == Sample(Shape({1}), {0.0}));
}

TEST_CASE("completion validation", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(assoc_config(), ds);
  std::map<std::string, Sample> known;
  CHECK_THROWS_AS(g.complete(known), std::invalid_argument);  // nothing known
  known.emplace("m1", Sample(Shape({1}), {0.0}));
  known.emplace("m2", Sample(Shape({1}), {10.0}));
  known.emplace("label", Sample(Shape({1}), {0.0}));
  CHECK_THROWS_AS(g.complete(known), std::invalid_argument);  // everything known
  known.clear();
  known.emplace("nosuch", Sample(Shape({1}), {0.0}));
  CHECK_THROWS_AS(g.complete(known), std::invalid_argument);
}

TEST_CASE("trained graph serializes and reloads byte-identically", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(assoc_config(), ds);
  const std::string bytes = g.to_json().dump(2);
  const TrainedGraph back = TrainedGraph::from_json(ordered_json::parse(bytes));
  CHECK(back.to_json().dump(2) == bytes);

  std::map<std::string, Sample> known;
  known.emplace("m1", Sample(Shape({1}), {0.1}));
  known.emplace("m2", Sample(Shape({1}), {10.1}));
  CHECK(back.complete(known).at("label") == g.complete(known).at("label"));
}

TEST_CASE("training twice gives identical bytes", "[graph]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph a = TrainedGraph::train(assoc_config(), ds);
  const TrainedGraph b = TrainedGraph::train(assoc_config(), ds);
  CHECK(a.to_json().dump(2) == b.to_json().dump(2));
}

TEST_CASE("training rejects a dataset without the sources", "[graph]") {
  Dataset ds(1e-6);
  Dataset::Column c;
  c.name = "other";
  c.shape = Shape({1});
  c.samples.push_back(Sample(Shape({1}), {1.0}));
  ds.add_column(std::move(c));
  CHECK_THROWS_AS(TrainedGraph::train(column_config(), ds), std::out_of_range);
}

TEST_CASE("pyramid nodes train and project through the graph", "[graph]") {
  const Dataset ds = mini_dataset();
  GraphConfig g;
  g.sources = {"m1"};
  NodeConfig n;
  n.name = "pyr";
  n.kind = "pyramid";
  n.depth = 1;
  n.primitive.merge_radius = 0.3;
  g.nodes.push_back(n);
  g.edges = {{"m1", "pyr", 0}};
  g.sink = "pyr";
  const TrainedGraph t = TrainedGraph::train(g, ds);
  CHECK(t.stats()[0].input_card == 6);
  const auto sources = t.project("pyr", ArchetypeId{0});
  CHECK(ds.column_set("m1").contains(sources.at("m1")));
}
