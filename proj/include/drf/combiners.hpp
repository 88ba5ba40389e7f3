#pragma once
// Inter-level composition functions: pairwise averaging (pyramids) and
// reversible concatenation with split (associative layers).

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drf/core.hpp"
#include "drf/primitive.hpp"

namespace drf {

// Ordered part shapes of a concatenation, with derived flat offsets.
class ConcatLayout {
 public:
  ConcatLayout() = default;
  explicit ConcatLayout(std::vector<Shape> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("ConcatLayout: no parts");
    offsets_.reserve(parts_.size());
    std::size_t off = 0;
    for (const Shape& s : parts_) {
      offsets_.push_back(off);
      off += s.count();
    }
    total_ = off;
  }

  std::size_t arity() const { return parts_.size(); }
  const std::vector<Shape>& part_shapes() const { return parts_; }
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }
  std::size_t total_count() const { return total_; }
  Shape concat_shape() const { return Shape({total_}); }

  friend bool operator==(const ConcatLayout& a, const ConcatLayout& b) {
    return a.parts_ == b.parts_;
  }

  ordered_json to_json() const {
    ordered_json arr = ordered_json::array();
    for (const Shape& s : parts_) arr.push_back(s.to_json());
    return arr;
  }
  static ConcatLayout from_json(const ordered_json& j) {
    std::vector<Shape> parts;
    for (const auto& s : j) parts.push_back(Shape::from_json(s));
    return ConcatLayout(std::move(parts));
  }

 private:
  std::vector<Shape> parts_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

// Flat concatenation of the parts, in layout order.
inline Sample concat(std::span<const Sample> parts, const ConcatLayout& layout) {
  if (parts.size() != layout.arity()) {
    throw std::invalid_argument("concat: " + std::to_string(parts.size()) +
                                " parts for arity " + std::to_string(layout.arity()));
  }
  std::vector<double> flat;
  flat.reserve(layout.total_count());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].shape() != layout.part_shapes()[i]) {
      throw std::invalid_argument("concat: part " + std::to_string(i) + " has shape " +
                                  parts[i].shape().str() + ", layout expects " +
                                  layout.part_shapes()[i].str());
    }
    flat.insert(flat.end(), parts[i].values().begin(), parts[i].values().end());
  }
  return Sample(layout.concat_shape(), std::move(flat));
}

// Exact inverse of concat: recovers the parts with their original shapes.
inline std::vector<Sample> split(const Sample& x, const ConcatLayout& layout) {
  if (x.size() != layout.total_count()) {
    throw std::invalid_argument("split: " + std::to_string(x.size()) +
                                " values for layout total " +
                                std::to_string(layout.total_count()));
  }
  std::vector<Sample> parts;
  parts.reserve(layout.arity());
  for (std::size_t i = 0; i < layout.arity(); ++i) {
    const std::size_t off = layout.offset(i);
    const std::size_t cnt = layout.part_shapes()[i].count();
    std::vector<double> v(x.values().begin() + static_cast<std::ptrdiff_t>(off),
                          x.values().begin() + static_cast<std::ptrdiff_t>(off + cnt));
    parts.emplace_back(layout.part_shapes()[i], std::move(v));
  }
  return parts;
}

// Elementwise mean of two equal-shape samples, re-quantized on the grid.
inline Sample average(const Sample& a, const Sample& b, double grid = kDefaultGrid) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("average: shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
  }
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = (a[i] + b[i]) / 2.0;
  return canonical_quantize(Sample(a.shape(), std::move(m)), grid);
}

// Invert an averaged output against one known side: with o = (o1 + o2)/2,
// reconstruct o1 = 2*o - o2, look it up among the archetypes of the first
// codebook and project it back to an input. Only meaningful when the
// arithmetic stayed on the grid; otherwise the lookup fails and throws.
inline Sample average_recover(const Sample& o, const Sample& o2, const Codebook& first) {
  if (o.shape() != o2.shape()) {
    throw std::invalid_argument("average_recover: shape mismatch " + o.shape().str() +
                                " vs " + o2.shape().str());
  }
  std::vector<double> v(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) v[i] = 2.0 * o[i] - o2[i];
  const Sample target = canonical_quantize(Sample(o.shape(), std::move(v)), first.grid());
  const auto id = first.archetype_of(target);
  if (!id) {
    throw std::runtime_error(
        "average_recover: 2*o - o2 matches no archetype of the first codebook "
        "(the averaged value did not arise from this pair)");
  }
  return first.project(*id);
}

}  // namespace drf
