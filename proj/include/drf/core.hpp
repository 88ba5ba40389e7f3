#pragma once
// Core value types: shapes, samples, exact finite sets, and mapping logs.
//
// All set semantics in this library are exact: samples are snapped to a
// quantization grid once, and every comparison afterwards is plain
// elementwise equality on doubles. Cardinalities ("diversity") are therefore
// decidable and reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace drf {

using ordered_json = nlohmann::ordered_json;

// Grid used when a caller does not configure one explicitly.
constexpr double kDefaultGrid = 1e-6;

// Dimensions of a sample. Input and output of a primitive always share one.
struct Shape {
  std::vector<std::size_t> dims;

  Shape() = default;
  explicit Shape(std::vector<std::size_t> d) : dims(std::move(d)) {
    if (dims.empty()) throw std::invalid_argument("Shape: no dimensions");
    for (std::size_t e : dims) {
      if (e == 0) throw std::invalid_argument("Shape: zero extent");
    }
  }

  std::size_t count() const {
    std::size_t n = 1;
    for (std::size_t e : dims) n *= e;
    return n;
  }

  bool operator==(const Shape& o) const { return dims == o.dims; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims[i]);
    }
    return s + ")";
  }

  ordered_json to_json() const { return ordered_json(dims); }
  static Shape from_json(const ordered_json& j) {
    return Shape(j.get<std::vector<std::size_t>>());
  }
};

// Round one scalar to the nearest grid multiple. Half-away-from-zero; -0 is
// normalized so quantized values compare and serialize identically.
inline double quantize_value(double v, double grid) {
  if (grid <= 0.0) throw std::invalid_argument("quantize: grid must be > 0");
  if (!std::isfinite(v)) throw std::invalid_argument("quantize: non-finite value");
  double q = std::round(v / grid) * grid;
  if (q == 0.0) q = 0.0;  // drop the sign of -0
  return q;
}

// A fixed-shape numeric vector. Values are validated finite at construction;
// a Sample is immutable afterwards.
class Sample {
 public:
  Sample() = default;

  Sample(Shape shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != shape_.count()) {
      throw std::invalid_argument("Sample: " + std::to_string(values_.size()) +
                                  " values for shape " + shape_.str());
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("Sample: non-finite value");
    }
  }

  const Shape& shape() const { return shape_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }
  friend bool operator!=(const Sample& a, const Sample& b) { return !(a == b); }

  // Lexicographic order (shape first, then values). Total because values are
  // finite; this is the canonical order used everywhere.
  friend bool operator<(const Sample& a, const Sample& b) {
    if (a.shape_.dims != b.shape_.dims) return a.shape_.dims < b.shape_.dims;
    return std::lexicographical_compare(a.values_.begin(), a.values_.end(),
                                        b.values_.begin(), b.values_.end());
  }

  ordered_json to_json() const { return ordered_json(values_); }
  static Sample from_json(const ordered_json& j, const Shape& shape) {
    return Sample(shape, j.get<std::vector<double>>());
  }

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Snap every scalar of a sample to the grid. Idempotent, shape-preserving.
inline Sample canonical_quantize(const Sample& x, double grid) {
  std::vector<double> q(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) q[i] = quantize_value(x[i], grid);
  return Sample(x.shape(), std::move(q));
}

inline double squared_distance(const Sample& a, const Sample& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("distance: shape mismatch " + a.shape().str() +
                                " vs " + b.shape().str());
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

inline double distance(const Sample& a, const Sample& b) {
  return std::sqrt(squared_distance(a, b));
}

// A deduplicated set of samples over one shape. Elements are quantized on
// insertion and kept sorted in canonical order, so iteration order, equality
// and serialization are all deterministic. Cardinality is the "diversity"
// of the set.
class FiniteSet {
 public:
  FiniteSet() = default;
  explicit FiniteSet(Shape shape, double grid = kDefaultGrid)
      : shape_(std::move(shape)), grid_(grid) {
    if (grid_ <= 0.0) throw std::invalid_argument("FiniteSet: grid must be > 0");
  }

  // Returns true when the element was new.
  bool insert(const Sample& x) {
    if (x.shape() != shape_) {
      throw std::invalid_argument("FiniteSet: shape mismatch " + x.shape().str() +
                                  " vs " + shape_.str());
    }
    Sample q = canonical_quantize(x, grid_);
    auto it = std::lower_bound(elems_.begin(), elems_.end(), q);
    if (it != elems_.end() && *it == q) return false;
    elems_.insert(it, std::move(q));
    return true;
  }

  bool contains(const Sample& x) const {
    if (x.shape() != shape_) return false;
    Sample q = canonical_quantize(x, grid_);
    auto it = std::lower_bound(elems_.begin(), elems_.end(), q);
    return it != elems_.end() && *it == q;
  }

  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const Shape& shape() const { return shape_; }
  double grid() const { return grid_; }

  const Sample& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }
  std::span<const Sample> elements() const { return elems_; }

  friend bool operator==(const FiniteSet& a, const FiniteSet& b) {
    return a.shape_ == b.shape_ && a.elems_ == b.elems_;
  }
  friend bool operator!=(const FiniteSet& a, const FiniteSet& b) { return !(a == b); }

  static FiniteSet from_samples(Shape shape, double grid, std::span<const Sample> xs) {
    FiniteSet s(std::move(shape), grid);
    for (const Sample& x : xs) s.insert(x);
    return s;
  }

  ordered_json to_json() const {
    ordered_json arr = ordered_json::array();
    for (const Sample& e : elems_) arr.push_back(e.to_json());
    return arr;
  }
  // Order-insensitive: elements are re-sorted on insertion.
  static FiniteSet from_json(const ordered_json& j, const Shape& shape, double grid) {
    FiniteSet s(shape, grid);
    for (const auto& e : j) s.insert(Sample::from_json(e, shape));
    return s;
  }

 private:
  Shape shape_;
  double grid_ = kDefaultGrid;
  std::vector<Sample> elems_;  // sorted, unique, quantized
};

inline std::size_t diversity(const FiniteSet& s) { return s.size(); }

// Recorded (input, output) pairs from a processing run, with the derived
// input and output sets. The log itself accepts anything; whether it is a
// surjective function is a separate, checkable question.
class MappingLog {
 public:
  MappingLog(Shape in_shape, Shape out_shape, double grid = kDefaultGrid)
      : inputs_(in_shape, grid), outputs_(out_shape, grid), grid_(grid) {}

  // Re-recording an identical pair is a no-op.
  void record(const Sample& in, const Sample& out) {
    std::pair<Sample, Sample> p{canonical_quantize(in, grid_),
                                canonical_quantize(out, grid_)};
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), p);
    if (it != pairs_.end() && *it == p) return;
    pairs_.insert(it, p);
    inputs_.insert(p.first);
    outputs_.insert(p.second);
  }

  std::span<const std::pair<Sample, Sample>> pairs() const { return pairs_; }
  const FiniteSet& input_set() const { return inputs_; }
  const FiniteSet& output_set() const { return outputs_; }
  double grid() const { return grid_; }

 private:
  std::vector<std::pair<Sample, Sample>> pairs_;  // sorted by (input, output)
  FiniteSet inputs_;
  FiniteSet outputs_;
  double grid_;
};

// True iff the log describes a function (one output per distinct input) that
// is surjective onto its output set.
inline bool log_is_surjective_function(const MappingLog& log) {
  const auto pairs = log.pairs();
  // pairs are sorted by (input, output): conflicting outputs are adjacent
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].first == pairs[i - 1].first) return false;
  }
  FiniteSet hit(log.output_set().shape(), log.grid());
  for (const auto& p : pairs) hit.insert(p.second);
  return hit == log.output_set();
}

}  // namespace drf
