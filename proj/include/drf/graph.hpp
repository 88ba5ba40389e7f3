#pragma once
// Architecture graphs: a DAG of columns, pyramids and associative layers over
// named dataset columns. Training streams the dataset rows through the DAG in
// a deterministic topological order; projection and completion walk it back
// down to verbatim source samples.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "drf/core.hpp"
#include "drf/data.hpp"
#include "drf/structures.hpp"

namespace drf {

struct NodeConfig {
  std::string name;
  std::string kind;  // "column" | "pyramid" | "associative"
  std::size_t levels = 1;   // column
  std::size_t depth = 1;    // pyramid
  PrimitiveParams primitive;

  ordered_json to_json() const {
    ordered_json j;
    j["name"] = name;
    j["kind"] = kind;
    ordered_json p;
    if (kind == "column") p["levels"] = levels;
    if (kind == "pyramid") p["depth"] = depth;
    p["kind"] = primitive.kind;
    p["merge_radius"] = primitive.merge_radius;
    if (primitive.radius_jitter != 0.0) p["radius_jitter"] = primitive.radius_jitter;
    j["params"] = p;
    return j;
  }
  static NodeConfig from_json(const ordered_json& j) {
    NodeConfig n;
    n.name = j.at("name").get<std::string>();
    n.kind = j.at("kind").get<std::string>();
    const ordered_json& p = j.value("params", ordered_json::object());
    n.levels = p.value("levels", std::size_t{1});
    n.depth = p.value("depth", std::size_t{1});
    n.primitive.kind = p.value("kind", std::string("exemplar"));
    n.primitive.merge_radius = p.value("merge_radius", 0.0);
    n.primitive.radius_jitter = p.value("radius_jitter", 0.0);
    return n;
  }
};

struct EdgeConfig {
  std::string from;
  std::string to;
  std::size_t slot = 0;

  ordered_json to_json() const {
    ordered_json j;
    j["from"] = from;
    j["to"] = to;
    j["slot"] = slot;
    return j;
  }
  static EdgeConfig from_json(const ordered_json& j) {
    EdgeConfig e;
    e.from = j.at("from").get<std::string>();
    e.to = j.at("to").get<std::string>();
    e.slot = j.value("slot", std::size_t{0});
    return e;
  }
};

class GraphConfig {
 public:
  double grid = kDefaultGrid;
  std::vector<std::string> sources;
  std::vector<NodeConfig> nodes;
  std::vector<EdgeConfig> edges;
  std::string sink;

  // Structural validation; throws std::invalid_argument with the first
  // problem found. Also computes the deterministic topological order
  // (declaration order among ready nodes).
  void validate() const { (void)topo_order(); }

  std::vector<std::string> topo_order() const {
    if (sources.empty()) throw std::invalid_argument("graph: no sources");
    if (nodes.empty()) throw std::invalid_argument("graph: no nodes");
    std::set<std::string> names;
    for (const auto& s : sources) {
      if (!detail::valid_identifier(s)) {
        throw std::invalid_argument("graph: bad source name '" + s + "'");
      }
      if (!names.insert(s).second) {
        throw std::invalid_argument("graph: duplicate name '" + s + "'");
      }
    }
    for (const auto& n : nodes) {
      if (!detail::valid_identifier(n.name)) {
        throw std::invalid_argument("graph: bad node name '" + n.name + "'");
      }
      if (!names.insert(n.name).second) {
        throw std::invalid_argument("graph: duplicate name '" + n.name + "'");
      }
      if (n.kind != "column" && n.kind != "pyramid" && n.kind != "associative") {
        throw std::invalid_argument("graph: node '" + n.name + "' has unknown kind '" +
                                    n.kind + "'");
      }
      if (n.kind == "column" && n.levels < 1) {
        throw std::invalid_argument("graph: column '" + n.name + "' needs levels >= 1");
      }
      if (n.primitive.kind != "exemplar" && n.primitive.kind != "trivial") {
        throw std::invalid_argument("graph: node '" + n.name + "' has unknown primitive '" +
                                    n.primitive.kind + "'");
      }
    }
    if (!(grid > 0.0)) throw std::invalid_argument("graph: grid must be > 0");

    std::map<std::string, std::map<std::size_t, std::string>> incoming;  // to -> slot -> from
    for (const auto& e : edges) {
      const bool from_known = names.count(e.from) > 0;
      if (!from_known) throw std::invalid_argument("graph: edge from unknown '" + e.from + "'");
      if (!node_ptr(e.to)) throw std::invalid_argument("graph: edge into '" + e.to +
                                                       "' which is not a node");
      if (e.from == e.to) throw std::invalid_argument("graph: self-edge on '" + e.to + "'");
      if (!incoming[e.to].emplace(e.slot, e.from).second) {
        throw std::invalid_argument("graph: slot " + std::to_string(e.slot) + " of '" + e.to +
                                    "' wired twice");
      }
    }
    for (const auto& n : nodes) {
      const auto it = incoming.find(n.name);
      const std::size_t fan_in = it == incoming.end() ? 0 : it->second.size();
      if (n.kind == "associative") {
        if (fan_in < 2) {
          throw std::invalid_argument("graph: associative node '" + n.name +
                                      "' needs >= 2 inputs");
        }
      } else if (fan_in != 1) {
        throw std::invalid_argument("graph: node '" + n.name + "' needs exactly 1 input");
      }
      if (fan_in > 0) {
        std::size_t expect = 0;
        for (const auto& [slot, from] : it->second) {
          if (slot != expect++) {
            throw std::invalid_argument("graph: slots of '" + n.name +
                                        "' must be 0.." + std::to_string(fan_in - 1));
          }
        }
      }
    }
    if (sink.empty()) throw std::invalid_argument("graph: no sink");
    if (!node_ptr(sink)) throw std::invalid_argument("graph: sink '" + sink + "' is not a node");

    // Kahn's algorithm, scanning declared order so the result is stable.
    std::map<std::string, std::size_t> indeg;
    for (const auto& n : nodes) indeg[n.name] = 0;
    for (const auto& e : edges) {
      if (node_ptr(e.from)) ++indeg[e.to];
    }
    std::vector<std::string> order;
    std::set<std::string> placed;
    while (order.size() < nodes.size()) {
      bool progress = false;
      for (const auto& n : nodes) {
        if (placed.count(n.name) || indeg[n.name] != 0) continue;
        order.push_back(n.name);
        placed.insert(n.name);
        for (const auto& e : edges) {
          if (e.from == n.name) --indeg[e.to];
        }
        progress = true;
        break;
      }
      if (!progress) {
        std::string stuck;
        for (const auto& n : nodes) {
          if (!placed.count(n.name)) stuck += (stuck.empty() ? "" : ", ") + n.name;
        }
        throw std::invalid_argument("graph: cycle involving " + stuck);
      }
    }
    return order;
  }

  bool is_source(const std::string& name) const {
    for (const auto& s : sources) {
      if (s == name) return true;
    }
    return false;
  }

  const NodeConfig* node_ptr(const std::string& name) const {
    for (const auto& n : nodes) {
      if (n.name == name) return &n;
    }
    return nullptr;
  }

  // Incoming edges of a node, slot order.
  std::vector<EdgeConfig> inputs_of(const std::string& name) const {
    std::vector<EdgeConfig> in;
    for (const auto& e : edges) {
      if (e.to == name) in.push_back(e);
    }
    std::sort(in.begin(), in.end(),
              [](const EdgeConfig& a, const EdgeConfig& b) { return a.slot < b.slot; });
    return in;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["grid"] = grid;
    j["sources"] = sources;
    ordered_json ns = ordered_json::array();
    for (const auto& n : nodes) ns.push_back(n.to_json());
    j["nodes"] = ns;
    ordered_json es = ordered_json::array();
    for (const auto& e : edges) es.push_back(e.to_json());
    j["edges"] = es;
    j["sink"] = sink;
    return j;
  }
  static GraphConfig from_json(const ordered_json& j) {
    GraphConfig g;
    g.grid = j.value("grid", kDefaultGrid);
    for (const auto& s : j.at("sources")) g.sources.push_back(s.get<std::string>());
    for (const auto& n : j.at("nodes")) g.nodes.push_back(NodeConfig::from_json(n));
    for (const auto& e : j.value("edges", ordered_json::array())) {
      g.edges.push_back(EdgeConfig::from_json(e));
    }
    g.sink = j.value("sink", std::string());
    g.validate();
    return g;
  }
};

struct NodeStats {
  std::string name;
  std::string kind;
  std::size_t input_card = 0;   // distinct training inputs (tuples for associative)
  std::size_t output_card = 0;  // archetypes at the node's output
};

class TrainedGraph {
 public:
  TrainedGraph() = default;

  static TrainedGraph train(const GraphConfig& config, const Dataset& ds) {
    config.validate();
    TrainedGraph g;
    g.config_ = config;
    g.dataset_fingerprint_ = ds.fingerprint();
    if (ds.rows() == 0) throw std::invalid_argument("graph: dataset has no rows");

    std::map<std::string, std::vector<Sample>> streams;
    for (const auto& s : config.sources) {
      const auto& col = ds.column(s);  // throws if the dataset lacks it
      std::vector<Sample> vals;
      vals.reserve(col.samples.size());
      for (const Sample& x : col.samples) vals.push_back(canonical_quantize(x, config.grid));
      g.source_shapes_[s] = col.shape;
      streams.emplace(s, std::move(vals));
    }

    for (const std::string& name : config.topo_order()) {
      const NodeConfig& nc = *config.node_ptr(name);
      const auto in_edges = config.inputs_of(name);
      Node node;
      node.config = nc;

      if (nc.kind == "associative") {
        std::vector<Shape> part_shapes;
        std::vector<const std::vector<Sample>*> parts;
        for (const auto& e : in_edges) {
          const auto& stream = streams.at(e.from);
          part_shapes.push_back(stream.front().shape());
          parts.push_back(&stream);
        }
        ConcatLayout layout(part_shapes);
        std::vector<std::vector<Sample>> tuples(ds.rows());
        for (std::size_t r = 0; r < ds.rows(); ++r) {
          tuples[r].reserve(parts.size());
          for (const auto* p : parts) tuples[r].push_back((*p)[r]);
        }
        node.al = AssociativeLayer::train(tuples, layout, nc.primitive, config.grid);
        node.input_card = node.al.input_card();
        node.output_card = node.al.codebook().size();
        std::vector<Sample> out;
        out.reserve(ds.rows());
        for (const auto& t : tuples) out.push_back(node.al.encode(t).second);
        streams.emplace(name, std::move(out));
      } else {
        const auto& in = streams.at(in_edges.front().from);
        FiniteSet train_set = FiniteSet::from_samples(in.front().shape(), config.grid, in);
        node.input_card = train_set.size();
        std::vector<Sample> out;
        out.reserve(in.size());
        if (nc.kind == "column") {
          node.column = DiscriminatoryColumn::train(train_set, nc.levels, nc.primitive);
          node.output_card = node.column.level_output_cards().back();
          for (const Sample& x : in) out.push_back(node.column.encode(x).second);
        } else {
          node.pyramid = DiscriminatoryPyramid::train(train_set, nc.depth, nc.primitive);
          for (const Sample& x : in) out.push_back(node.pyramid.encode(x).second);
          node.output_card =
              FiniteSet::from_samples(in.front().shape(), config.grid, out).size();
        }
        streams.emplace(name, std::move(out));
      }
      g.order_.push_back(name);
      g.nodes_.emplace(name, std::move(node));
    }
    return g;
  }

  const GraphConfig& config() const { return config_; }
  const std::string& dataset_fingerprint() const { return dataset_fingerprint_; }
  const std::vector<std::string>& order() const { return order_; }
  bool trained() const { return !nodes_.empty(); }

  const Shape& source_shape(const std::string& name) const {
    const auto it = source_shapes_.find(name);
    if (it == source_shapes_.end()) {
      throw std::out_of_range("graph: no source '" + name + "'");
    }
    return it->second;
  }

  const DiscriminatoryColumn& column(const std::string& name) const {
    return node(name, "column").column;
  }
  const DiscriminatoryPyramid& pyramid(const std::string& name) const {
    return node(name, "pyramid").pyramid;
  }
  const AssociativeLayer& associative(const std::string& name) const {
    return node(name, "associative").al;
  }

  std::vector<NodeStats> stats() const {
    std::vector<NodeStats> out;
    for (const auto& name : order_) {
      const Node& n = nodes_.at(name);
      out.push_back({name, n.config.kind, n.input_card, n.output_card});
    }
    return out;
  }

  NodeStats stats_of(const std::string& name) const {
    const Node& n = nodes_.at(name);
    return {name, n.config.kind, n.input_card, n.output_card};
  }

  // Replay the dataset through the trained graph; returns the per-row value
  // stream at every source and node output. Rows must use the same columns
  // the graph was trained on.
  std::map<std::string, std::vector<Sample>> forward_streams(const Dataset& ds) const {
    require_trained();
    std::map<std::string, std::vector<Sample>> streams;
    for (const auto& s : config_.sources) {
      const auto& col = ds.column(s);
      if (col.shape != source_shapes_.at(s)) {
        throw std::invalid_argument("graph: column '" + s + "' shape changed");
      }
      std::vector<Sample> vals;
      vals.reserve(col.samples.size());
      for (const Sample& x : col.samples) vals.push_back(canonical_quantize(x, config_.grid));
      streams.emplace(s, std::move(vals));
    }
    const std::size_t rows = streams.begin()->second.size();
    for (const auto& name : order_) {
      const Node& n = nodes_.at(name);
      const auto in_edges = config_.inputs_of(name);
      std::vector<Sample> out;
      out.reserve(rows);
      if (n.config.kind == "associative") {
        std::vector<const std::vector<Sample>*> parts;
        for (const auto& e : in_edges) parts.push_back(&streams.at(e.from));
        for (std::size_t r = 0; r < rows; ++r) {
          std::vector<Sample> t;
          t.reserve(parts.size());
          for (const auto* p : parts) t.push_back((*p)[r]);
          out.push_back(n.al.encode(t).second);
        }
      } else {
        const auto& in = streams.at(in_edges.front().from);
        for (const Sample& x : in) {
          out.push_back(n.config.kind == "column" ? n.column.encode(x).second
                                                  : n.pyramid.encode(x).second);
        }
      }
      streams.emplace(name, std::move(out));
    }
    return streams;
  }

  // Full bottom-up encode of one presentation (all sources present).
  std::pair<ArchetypeId, Sample> encode(const std::map<std::string, Sample>& sources) const {
    require_trained();
    std::map<std::string, Sample> value = quantized_sources(sources, /*require_all=*/true);
    propagate(value);
    const auto it = value.find(config_.sink);
    if (it == value.end()) throw std::runtime_error("graph: sink value not computed");
    const Node& sink = nodes_.at(config_.sink);
    if (sink.config.kind == "associative") {
      const auto id = sink.al.codebook().archetype_of(it->second);
      return {id.value(), it->second};
    }
    if (sink.config.kind == "column") {
      const auto id = sink.column.level(sink.column.levels() - 1).archetype_of(it->second);
      return {id.value(), it->second};
    }
    const auto col = sink.pyramid.as_column();
    return {col.level(col.levels() - 1).archetype_of(it->second).value(), it->second};
  }

  // Project a node archetype all the way down: the returned map holds the
  // verbatim source sample behind every source feeding that node.
  std::map<std::string, Sample> project(const std::string& name, ArchetypeId id) const {
    require_trained();
    const Node& n = nodes_.at(name);
    std::map<std::string, Sample> out;
    const auto in_edges = config_.inputs_of(name);
    if (n.config.kind == "associative") {
      const std::vector<Sample> parts = n.al.project_tuple(id);
      for (std::size_t s = 0; s < parts.size(); ++s) {
        resolve_down(in_edges[s].from, parts[s], out);
      }
    } else {
      const Sample v = n.config.kind == "column" ? n.column.project(id) : n.pyramid.project(id);
      resolve_down(in_edges.front().from, v, out);
    }
    return out;
  }

  // Pattern completion at the sink (which must be associative): push the
  // known sources up as far as they reach, complete the sink tuple, and
  // project every slot back down to source level.
  std::map<std::string, Sample> complete(const std::map<std::string, Sample>& known) const {
    require_trained();
    const Node& sink = nodes_.at(config_.sink);
    if (sink.config.kind != "associative") {
      throw std::invalid_argument("graph: completion needs an associative sink");
    }
    std::map<std::string, Sample> value = quantized_sources(known, /*require_all=*/false);
    propagate(value);

    const auto in_edges = config_.inputs_of(config_.sink);
    std::map<std::size_t, Sample> known_slots;
    for (std::size_t s = 0; s < in_edges.size(); ++s) {
      const auto it = value.find(in_edges[s].from);
      if (it != value.end()) known_slots.emplace(s, it->second);
    }
    if (known_slots.empty()) {
      throw std::invalid_argument("graph: no known source reaches the sink");
    }
    if (known_slots.size() == in_edges.size()) {
      throw std::invalid_argument("graph: all sink inputs are known, nothing to complete");
    }
    const std::vector<Sample> tuple = sink.al.complete(known_slots);
    std::map<std::string, Sample> out;
    for (std::size_t s = 0; s < in_edges.size(); ++s) {
      resolve_down(in_edges[s].from, tuple[s], out);
    }
    return out;
  }

  ordered_json to_json() const {
    require_trained();
    ordered_json j;
    j["format"] = "drf-model";
    j["version"] = 1;
    j["grid"] = config_.grid;
    j["dataset_fingerprint"] = dataset_fingerprint_;
    j["config"] = config_.to_json();
    ordered_json shapes;
    for (const auto& [name, shape] : source_shapes_) shapes[name] = shape.to_json();
    j["source_shapes"] = shapes;
    ordered_json ns = ordered_json::array();
    for (const auto& name : order_) {
      const Node& n = nodes_.at(name);
      ordered_json jn;
      jn["name"] = name;
      jn["kind"] = n.config.kind;
      jn["input_card"] = n.input_card;
      jn["output_card"] = n.output_card;
      if (n.config.kind == "column") jn["state"] = n.column.to_json();
      if (n.config.kind == "pyramid") jn["state"] = n.pyramid.to_json();
      if (n.config.kind == "associative") jn["state"] = n.al.to_json();
      ns.push_back(jn);
    }
    j["nodes"] = ns;
    return j;
  }

  static TrainedGraph from_json(const ordered_json& j) {
    if (j.value("format", std::string()) != "drf-model") {
      throw std::invalid_argument("model: missing format tag 'drf-model'");
    }
    TrainedGraph g;
    g.config_ = GraphConfig::from_json(j.at("config"));
    g.dataset_fingerprint_ = j.value("dataset_fingerprint", std::string());
    for (const auto& [name, shape] : j.at("source_shapes").items()) {
      g.source_shapes_[name] = Shape::from_json(shape);
    }
    for (const auto& jn : j.at("nodes")) {
      const std::string name = jn.at("name").get<std::string>();
      const NodeConfig* nc = g.config_.node_ptr(name);
      if (!nc) throw std::invalid_argument("model: state for unknown node '" + name + "'");
      Node n;
      n.config = *nc;
      n.input_card = jn.at("input_card").get<std::size_t>();
      n.output_card = jn.at("output_card").get<std::size_t>();
      if (nc->kind == "column") n.column = DiscriminatoryColumn::from_json(jn.at("state"));
      if (nc->kind == "pyramid") n.pyramid = DiscriminatoryPyramid::from_json(jn.at("state"));
      if (nc->kind == "associative") n.al = AssociativeLayer::from_json(jn.at("state"));
      g.order_.push_back(name);
      g.nodes_.emplace(name, std::move(n));
    }
    if (g.order_.size() != g.config_.nodes.size()) {
      throw std::invalid_argument("model: node state count does not match config");
    }
    return g;
  }

 private:
  struct Node {
    NodeConfig config;
    DiscriminatoryColumn column;
    DiscriminatoryPyramid pyramid;
    AssociativeLayer al;
    std::size_t input_card = 0;
    std::size_t output_card = 0;
  };

  void require_trained() const {
    if (!trained()) throw std::runtime_error("graph: not trained");
  }

  const Node& node(const std::string& name, const char* kind) const {
    const auto it = nodes_.find(name);
    if (it == nodes_.end()) throw std::out_of_range("graph: no node '" + name + "'");
    if (it->second.config.kind != kind) {
      throw std::invalid_argument("graph: node '" + name + "' is a " +
                                  it->second.config.kind + ", not a " + kind);
    }
    return it->second;
  }

  std::map<std::string, Sample> quantized_sources(const std::map<std::string, Sample>& in,
                                                  bool require_all) const {
    std::map<std::string, Sample> value;
    for (const auto& [name, v] : in) {
      const auto it = source_shapes_.find(name);
      if (it == source_shapes_.end()) {
        throw std::invalid_argument("graph: '" + name + "' is not a source");
      }
      if (v.shape() != it->second) {
        throw std::invalid_argument("graph: source '" + name + "' shape mismatch");
      }
      value.emplace(name, canonical_quantize(v, config_.grid));
    }
    if (require_all) {
      for (const auto& [name, shape] : source_shapes_) {
        if (!value.count(name)) {
          throw std::invalid_argument("graph: missing source '" + name + "'");
        }
      }
    }
    return value;
  }

  // Push known values as far up the DAG as they determine node outputs.
  void propagate(std::map<std::string, Sample>& value) const {
    for (const auto& name : order_) {
      const Node& n = nodes_.at(name);
      const auto in_edges = config_.inputs_of(name);
      if (n.config.kind == "associative") {
        std::vector<Sample> parts;
        parts.reserve(in_edges.size());
        bool all = true;
        for (const auto& e : in_edges) {
          const auto it = value.find(e.from);
          if (it == value.end()) {
            all = false;
            break;
          }
          parts.push_back(it->second);
        }
        if (all) value.emplace(name, n.al.encode(parts).second);
      } else {
        const auto it = value.find(in_edges.front().from);
        if (it == value.end()) continue;
        value.emplace(name, n.config.kind == "column" ? n.column.encode(it->second).second
                                                      : n.pyramid.encode(it->second).second);
      }
    }
  }

  // value is a member of `name`'s output set (or a source sample); walk it
  // down to the sources by exact archetype lookups.
  void resolve_down(const std::string& name, const Sample& value,
                    std::map<std::string, Sample>& out) const {
    if (config_.is_source(name)) {
      out.insert_or_assign(name, value);
      return;
    }
    const Node& n = nodes_.at(name);
    const auto in_edges = config_.inputs_of(name);
    if (n.config.kind == "associative") {
      const auto id = n.al.codebook().archetype_of(value);
      if (!id) {
        throw std::runtime_error("graph: value at '" + name + "' matches no archetype");
      }
      const std::vector<Sample> parts = n.al.project_tuple(*id);
      for (std::size_t s = 0; s < parts.size(); ++s) {
        resolve_down(in_edges[s].from, parts[s], out);
      }
      return;
    }
    const DiscriminatoryColumn col =
        n.config.kind == "column" ? n.column : n.pyramid.as_column();
    const auto id = col.level(col.levels() - 1).archetype_of(value);
    if (!id) {
      throw std::runtime_error("graph: value at '" + name + "' matches no archetype");
    }
    resolve_down(in_edges.front().from, col.project(*id), out);
  }

  GraphConfig config_;
  std::string dataset_fingerprint_;
  std::map<std::string, Shape> source_shapes_;
  std::vector<std::string> order_;  // topological
  std::map<std::string, Node> nodes_;
};

}  // namespace drf
