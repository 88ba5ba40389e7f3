#pragma once
// Hierarchical structures built from the primitive: discriminatory columns,
// discriminatory pyramids (pairwise-averaged instances), and associative
// layers (concatenation + one codebook over the observed tuples).

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drf/combiners.hpp"
#include "drf/core.hpp"
#include "drf/primitive.hpp"

namespace drf {

// Parameters for one primitive instance (or a family of them inside a
// structure). radius_jitter > 0 gives instance k of a pyramid row the radius
// merge_radius + k * radius_jitter, making the instances deliberately
// non-identical; 0 keeps them identical and deterministic.
struct PrimitiveParams {
  std::string kind = "exemplar";  // "exemplar" | "trivial"
  double merge_radius = 0.0;
  double radius_jitter = 0.0;

  bool deterministic_identical() const { return radius_jitter == 0.0; }

  ordered_json to_json() const {
    ordered_json j;
    j["kind"] = kind;
    j["merge_radius"] = merge_radius;
    j["radius_jitter"] = radius_jitter;
    return j;
  }
  static PrimitiveParams from_json(const ordered_json& j) {
    PrimitiveParams p;
    p.kind = j.value("kind", std::string("exemplar"));
    p.merge_radius = j.value("merge_radius", 0.0);
    p.radius_jitter = j.value("radius_jitter", 0.0);
    return p;
  }
};

inline Codebook train_primitive(const FiniteSet& inputs, const PrimitiveParams& p,
                                const Shape& shape, std::size_t instance = 0) {
  if (p.kind == "trivial") return train_trivial(inputs, shape);
  if (p.kind != "exemplar") {
    throw std::invalid_argument("unknown primitive kind '" + p.kind + "'");
  }
  const double radius = p.merge_radius + p.radius_jitter * static_cast<double>(instance);
  return train_exemplar_quantizer(inputs, radius, shape);
}

// n >= 1 codebooks stacked vertically: each level trains on the output set
// of the level below and the whole stack shares one shape. Level index here
// is processing order: 0 is the bottom (first applied).
class DiscriminatoryColumn {
 public:
  DiscriminatoryColumn() = default;

  static DiscriminatoryColumn train(const FiniteSet& inputs, std::size_t levels,
                                    const PrimitiveParams& params) {
    if (levels == 0) throw std::invalid_argument("column: levels must be >= 1");
    if (inputs.size() < 2) throw std::invalid_argument("column: need >= 2 distinct inputs");
    DiscriminatoryColumn col;
    col.shape_ = inputs.shape();
    FiniteSet current = inputs;
    for (std::size_t l = 0; l < levels; ++l) {
      Codebook cb = train_primitive(current, params, col.shape_);
      FiniteSet next = output_set(cb, current);
      col.input_cards_.push_back(current.size());
      col.output_cards_.push_back(next.size());
      col.levels_.push_back(std::move(cb));
      current = std::move(next);
    }
    return col;
  }

  std::size_t levels() const { return levels_.size(); }
  const Codebook& level(std::size_t i) const { return levels_.at(i); }
  const Shape& shape() const { return shape_; }
  bool trained() const { return !levels_.empty(); }

  // Per-level training cardinalities, bottom to top.
  const std::vector<std::size_t>& level_input_cards() const { return input_cards_; }
  const std::vector<std::size_t>& level_output_cards() const { return output_cards_; }

  std::pair<ArchetypeId, Sample> encode(const Sample& x) const {
    require_trained();
    Sample v = x;
    ArchetypeId id{};
    for (const Codebook& cb : levels_) {
      auto [i, o] = cb.encode(v);
      id = i;
      v = std::move(o);
    }
    return {id, v};
  }

  // Descend from a top archetype to a verbatim member of the original input
  // set: each representative is an archetype vector of the level below, so
  // the walk is an exact lookup at every step.
  Sample project(ArchetypeId top) const {
    require_trained();
    Sample v = levels_.back().project(top);
    for (std::size_t l = levels_.size() - 1; l-- > 0;) {
      const auto id = levels_[l].archetype_of(v);
      if (!id) {
        throw std::runtime_error("column: projection left the archetype chain at level " +
                                 std::to_string(l));
      }
      v = levels_[l].project(*id);
    }
    return v;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["shape"] = shape_.to_json();
    ordered_json lv = ordered_json::array();
    for (const Codebook& cb : levels_) lv.push_back(cb.to_json());
    j["levels"] = lv;
    j["level_input_cards"] = input_cards_;
    j["level_output_cards"] = output_cards_;
    return j;
  }
  static DiscriminatoryColumn from_json(const ordered_json& j) {
    DiscriminatoryColumn col;
    col.shape_ = Shape::from_json(j.at("shape"));
    for (const auto& cb : j.at("levels")) col.levels_.push_back(Codebook::from_json(cb));
    col.input_cards_ = j.at("level_input_cards").get<std::vector<std::size_t>>();
    col.output_cards_ = j.at("level_output_cards").get<std::vector<std::size_t>>();
    if (col.levels_.empty()) throw std::invalid_argument("column: no levels");
    return col;
  }

  static DiscriminatoryColumn from_codebooks(Shape shape, std::vector<Codebook> levels,
                                             std::vector<std::size_t> in_cards,
                                             std::vector<std::size_t> out_cards) {
    DiscriminatoryColumn col;
    col.shape_ = std::move(shape);
    col.levels_ = std::move(levels);
    col.input_cards_ = std::move(in_cards);
    col.output_cards_ = std::move(out_cards);
    return col;
  }

 private:
  void require_trained() const {
    if (!trained()) throw std::runtime_error("column: not trained");
  }

  Shape shape_;
  std::vector<Codebook> levels_;  // bottom first
  std::vector<std::size_t> input_cards_;
  std::vector<std::size_t> output_cards_;
};

// A pyramid of depth d has rows of 2^d, 2^(d-1), ..., 1 primitive instances
// (bottom to top). Every bottom instance sees the same input; between rows,
// adjacent pairs of outputs are averaged and feed one instance of the row
// above. depth == 0 degenerates to a single primitive.
class DiscriminatoryPyramid {
 public:
  DiscriminatoryPyramid() = default;

  static DiscriminatoryPyramid train(const FiniteSet& inputs, std::size_t depth,
                                     const PrimitiveParams& params) {
    if (inputs.size() < 2) throw std::invalid_argument("pyramid: need >= 2 distinct inputs");
    DiscriminatoryPyramid p;
    p.shape_ = inputs.shape();
    p.grid_ = inputs.grid();
    p.params_ = params;

    // per-input forward values for the current row, one stream per instance
    std::size_t width = std::size_t{1} << depth;
    std::vector<std::vector<Sample>> streams(
        width, std::vector<Sample>(inputs.begin(), inputs.end()));

    for (std::size_t row = 0; row <= depth; ++row) {
      std::vector<Codebook> cbs;
      cbs.reserve(width);
      for (std::size_t k = 0; k < width; ++k) {
        FiniteSet train_set =
            FiniteSet::from_samples(p.shape_, p.grid_, streams[k]);
        cbs.push_back(train_primitive(train_set, params, p.shape_, k));
      }
      // encode the streams through this row, then average adjacent pairs
      std::vector<std::vector<Sample>> out(width);
      for (std::size_t k = 0; k < width; ++k) {
        out[k].reserve(streams[k].size());
        for (const Sample& v : streams[k]) out[k].push_back(cbs[k].encode(v).second);
      }
      p.rows_.push_back(std::move(cbs));
      if (row == depth) break;
      width /= 2;
      std::vector<std::vector<Sample>> next(width);
      for (std::size_t k = 0; k < width; ++k) {
        next[k].reserve(out[2 * k].size());
        for (std::size_t i = 0; i < out[2 * k].size(); ++i) {
          next[k].push_back(average(out[2 * k][i], out[2 * k + 1][i], p.grid_));
        }
      }
      streams = std::move(next);
    }
    return p;
  }

  std::size_t depth() const { return rows_.empty() ? 0 : rows_.size() - 1; }
  std::size_t row_count() const { return rows_.size(); }
  const std::vector<Codebook>& row(std::size_t i) const { return rows_.at(i); }
  const Shape& shape() const { return shape_; }
  bool trained() const { return !rows_.empty(); }
  const PrimitiveParams& params() const { return params_; }
  bool homogeneous() const { return params_.deterministic_identical(); }

  std::pair<ArchetypeId, Sample> encode(const Sample& x) const {
    require_trained();
    std::vector<Sample> vals(rows_.front().size(), x);
    for (std::size_t row = 0; row + 1 < rows_.size(); ++row) {
      std::vector<Sample> out;
      out.reserve(rows_[row].size());
      for (std::size_t k = 0; k < rows_[row].size(); ++k) {
        out.push_back(rows_[row][k].encode(vals[k]).second);
      }
      std::vector<Sample> next;
      next.reserve(out.size() / 2);
      for (std::size_t k = 0; k + 1 < out.size(); k += 2) {
        next.push_back(average(out[k], out[k + 1], grid_));
      }
      vals = std::move(next);
    }
    return rows_.back().front().encode(vals.front());
  }

  // With identical deterministic instances per row, the pyramid collapses to
  // a column (averaging equal outputs is the identity), which provides the
  // global projection path.
  DiscriminatoryColumn as_column() const {
    require_trained();
    if (!homogeneous()) {
      throw std::runtime_error(
          "pyramid: instances are not identical (radius_jitter != 0); no column "
          "equivalent, project through average_recover with sibling outputs instead");
    }
    std::vector<Codebook> levels;
    levels.reserve(rows_.size());
    for (const auto& r : rows_) levels.push_back(r.front());
    return DiscriminatoryColumn::from_codebooks(shape_, std::move(levels), {}, {});
  }

  Sample project(ArchetypeId top) const { return as_column().project(top); }

  ordered_json to_json() const {
    ordered_json j;
    j["shape"] = shape_.to_json();
    j["grid"] = grid_;
    j["params"] = params_.to_json();
    ordered_json rows = ordered_json::array();
    for (const auto& r : rows_) {
      ordered_json row = ordered_json::array();
      for (const Codebook& cb : r) row.push_back(cb.to_json());
      rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
  }
  static DiscriminatoryPyramid from_json(const ordered_json& j) {
    DiscriminatoryPyramid p;
    p.shape_ = Shape::from_json(j.at("shape"));
    p.grid_ = j.at("grid").get<double>();
    p.params_ = PrimitiveParams::from_json(j.at("params"));
    for (const auto& row : j.at("rows")) {
      std::vector<Codebook> cbs;
      for (const auto& cb : row) cbs.push_back(Codebook::from_json(cb));
      p.rows_.push_back(std::move(cbs));
    }
    if (p.rows_.empty()) throw std::invalid_argument("pyramid: no rows");
    return p;
  }

 private:
  void require_trained() const {
    if (!trained()) throw std::runtime_error("pyramid: not trained");
  }

  Shape shape_;
  double grid_ = kDefaultGrid;
  PrimitiveParams params_;
  std::vector<std::vector<Codebook>> rows_;  // rows_[0] = bottom (2^depth wide)
};

// Concatenation of synchronized multi-slot inputs followed by one codebook.
// The training set is the set of observed tuples, never a cartesian product:
// a combination that never co-occurred in a presentation does not exist for
// the layer.
class AssociativeLayer {
 public:
  AssociativeLayer() = default;

  static AssociativeLayer train(std::span<const std::vector<Sample>> tuples,
                                const ConcatLayout& layout, const PrimitiveParams& params,
                                double grid = kDefaultGrid) {
    if (tuples.empty()) throw std::invalid_argument("associative layer: no tuples");
    AssociativeLayer al;
    al.layout_ = layout;
    FiniteSet observed(layout.concat_shape(), grid);
    for (const auto& t : tuples) observed.insert(concat(t, layout));
    al.input_card_ = observed.size();
    al.codebook_ = train_primitive(observed, params, layout.concat_shape());
    return al;
  }

  const ConcatLayout& layout() const { return layout_; }
  const Codebook& codebook() const { return codebook_; }
  std::size_t input_card() const { return input_card_; }
  bool trained() const { return codebook_.trained(); }

  // Archetype of the relationship between the parts.
  std::pair<ArchetypeId, Sample> encode(std::span<const Sample> parts) const {
    require_trained();
    return codebook_.encode(concat(parts, layout_));
  }

  // Project an archetype and recover the full training tuple behind it.
  std::vector<Sample> project_tuple(ArchetypeId a) const {
    require_trained();
    return split(codebook_.project(a), layout_);
  }

  // Pattern completion: score every archetype by Euclidean distance
  // restricted to the known slots' coordinates, pick the nearest (ties ->
  // lowest index) and replay its stored training tuple. The unknown slots of
  // that tuple are the completion.
  std::vector<Sample> complete(const std::map<std::size_t, Sample>& known) const {
    require_trained();
    if (known.empty()) throw std::invalid_argument("complete: no known slots");
    if (known.size() >= layout_.arity()) {
      throw std::invalid_argument("complete: all slots known, nothing to complete");
    }
    for (const auto& [slot, value] : known) {
      if (slot >= layout_.arity()) {
        throw std::invalid_argument("complete: slot " + std::to_string(slot) +
                                    " out of range");
      }
      if (value.shape() != layout_.part_shapes()[slot]) {
        throw std::invalid_argument("complete: slot " + std::to_string(slot) +
                                    " shape mismatch");
      }
    }
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < codebook_.size(); ++i) {
      const Sample& arch = codebook_.archetype(ArchetypeId{i});
      double d2 = 0.0;
      for (const auto& [slot, value] : known) {
        const std::size_t off = layout_.offset(slot);
        for (std::size_t k = 0; k < value.size(); ++k) {
          const double d = value[k] - arch[off + k];
          d2 += d * d;
        }
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    return project_tuple(ArchetypeId{best});
  }

  ordered_json to_json() const {
    ordered_json j;
    j["layout"] = layout_.to_json();
    j["input_card"] = input_card_;
    j["codebook"] = codebook_.to_json();
    return j;
  }
  static AssociativeLayer from_json(const ordered_json& j) {
    AssociativeLayer al;
    al.layout_ = ConcatLayout::from_json(j.at("layout"));
    al.input_card_ = j.at("input_card").get<std::size_t>();
    al.codebook_ = Codebook::from_json(j.at("codebook"));
    return al;
  }

 private:
  void require_trained() const {
    if (!trained()) throw std::runtime_error("associative layer: not trained");
  }

  ConcatLayout layout_;
  Codebook codebook_;
  std::size_t input_card_ = 0;  // distinct observed tuples seen at training
};

}  // namespace drf
