#pragma once
// The diversity-reducing primitive: a process that maps a finite input set
// onto a strictly smaller set of archetypes, and can project every archetype
// back onto a verbatim member of the input set.
//
// Two reference constructions are provided:
//   * train_exemplar_quantizer - a deterministic leader pass with a merge
//     radius, followed by a forced merge of the closest archetypes whenever
//     the pass failed to reduce the set.
//   * train_trivial - merges everything into the single mean archetype.
//
// A trained Codebook guarantees, for inputs I with |I| >= 2:
//   |archetypes| < |I|                      (strict diversity reduction)
//   project(a) is a verbatim member of I    (projections are real inputs)
//   encode(project(a)) == a                 (round trip, for every archetype)

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drf/core.hpp"

namespace drf {

// Index of an archetype inside one codebook.
struct ArchetypeId {
  std::size_t index = 0;
  friend bool operator==(ArchetypeId a, ArchetypeId b) { return a.index == b.index; }
  friend bool operator!=(ArchetypeId a, ArchetypeId b) { return !(a == b); }
};

class Codebook {
 public:
  Codebook() = default;  // untrained; encode/project throw

  bool trained() const { return !archetypes_.empty(); }
  const Shape& shape() const { return shape_; }
  double grid() const { return grid_; }
  double merge_radius() const { return merge_radius_; }
  std::size_t size() const { return archetypes_.size(); }

  // Set when training could not reduce (fewer than 2 distinct inputs).
  bool trivial_warning() const { return trivial_warning_; }

  const Sample& archetype(ArchetypeId a) const {
    check_id(a);
    return archetypes_[a.index];
  }

  // Nearest archetype under Euclidean distance, ties broken by lowest index.
  // The returned Sample is the archetype vector (same shape as the input).
  std::pair<ArchetypeId, Sample> encode(const Sample& x) const {
    require_trained();
    if (x.shape() != shape_) {
      throw std::invalid_argument("encode: shape mismatch " + x.shape().str() +
                                  " vs " + shape_.str());
    }
    const Sample q = canonical_quantize(x, grid_);
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < archetypes_.size(); ++i) {
      const double d2 = squared_distance(q, archetypes_[i]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    return {ArchetypeId{best}, archetypes_[best]};
  }

  // The stored representative: a verbatim training input that encodes back
  // to this archetype.
  Sample project(ArchetypeId a) const {
    require_trained();
    check_id(a);
    return representatives_[a.index];
  }

  // Exact lookup of an archetype by its vector value.
  std::optional<ArchetypeId> archetype_of(const Sample& value) const {
    require_trained();
    if (value.shape() != shape_) return std::nullopt;
    const Sample q = canonical_quantize(value, grid_);
    for (std::size_t i = 0; i < archetypes_.size(); ++i) {
      if (archetypes_[i] == q) return ArchetypeId{i};
    }
    return std::nullopt;
  }

  std::span<const Sample> archetypes() const { return archetypes_; }
  std::span<const Sample> representatives() const { return representatives_; }

  ordered_json to_json() const {
    ordered_json j;
    j["shape"] = shape_.to_json();
    j["grid"] = grid_;
    j["merge_radius"] = merge_radius_;
    j["trivial_warning"] = trivial_warning_;
    ordered_json arch = ordered_json::array();
    for (const Sample& a : archetypes_) arch.push_back(a.to_json());
    j["archetypes"] = arch;
    ordered_json reps = ordered_json::array();
    for (const Sample& r : representatives_) reps.push_back(r.to_json());
    j["representatives"] = reps;
    return j;
  }

  static Codebook from_json(const ordered_json& j) {
    Codebook cb;
    cb.shape_ = Shape::from_json(j.at("shape"));
    cb.grid_ = j.at("grid").get<double>();
    cb.merge_radius_ = j.at("merge_radius").get<double>();
    cb.trivial_warning_ = j.at("trivial_warning").get<bool>();
    for (const auto& a : j.at("archetypes")) {
      cb.archetypes_.push_back(Sample::from_json(a, cb.shape_));
    }
    for (const auto& r : j.at("representatives")) {
      cb.representatives_.push_back(Sample::from_json(r, cb.shape_));
    }
    if (cb.archetypes_.size() != cb.representatives_.size()) {
      throw std::invalid_argument("Codebook: archetype/representative count mismatch");
    }
    return cb;
  }

 private:
  friend Codebook train_exemplar_quantizer(const FiniteSet&, double, const Shape&);
  friend Codebook train_trivial(const FiniteSet&, const Shape&);

  void require_trained() const {
    if (!trained()) throw std::runtime_error("Codebook: not trained");
  }
  void check_id(ArchetypeId a) const {
    if (a.index >= archetypes_.size()) {
      throw std::out_of_range("archetype id " + std::to_string(a.index) +
                              " out of range (codebook size " +
                              std::to_string(archetypes_.size()) + ")");
    }
  }

  Shape shape_;
  double grid_ = kDefaultGrid;
  double merge_radius_ = 0.0;
  bool trivial_warning_ = false;
  std::vector<Sample> archetypes_;       // quantized vectors
  std::vector<Sample> representatives_;  // verbatim training inputs
};

namespace detail {

struct Cluster {
  std::vector<double> sum;  // raw running sum of merged members
  std::size_t count = 0;
  Sample vec;               // quantized running mean
  std::size_t seed = 0;     // index into the canonical input order
};

inline Sample cluster_mean(const Cluster& c, const Shape& shape, double grid) {
  std::vector<double> m(c.sum.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = c.sum[i] / static_cast<double>(c.count);
  return canonical_quantize(Sample(shape, std::move(m)), grid);
}

inline std::size_t nearest(const std::vector<Cluster>& cs, const Sample& x) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const double d2 = squared_distance(x, cs[i].vec);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Leader-style pass over the inputs in canonical (lexicographic) order. An
// input within merge_radius of an existing archetype merges into it (running
// mean, re-quantized); otherwise it seeds a new archetype. If the pass ends
// with as many archetypes as inputs, the two closest archetypes are merged
// until the output is strictly smaller than the input set.
//
// Finalization re-assigns every input to its nearest archetype, drops
// archetypes no input maps to, and picks each representative among the
// inputs assigned to that archetype (the seed if still assigned there,
// otherwise the nearest assigned input). This is what keeps the round trip
// encode(project(a)) == a intact even after archetype drift.
inline Codebook train_exemplar_quantizer(const FiniteSet& inputs, double merge_radius,
                                         const Shape& shape) {
  if (merge_radius <= 0.0) {
    throw std::invalid_argument("train_exemplar_quantizer: merge_radius must be > 0");
  }
  if (inputs.empty()) {
    throw std::invalid_argument("train_exemplar_quantizer: empty input set");
  }
  if (inputs.shape() != shape) {
    throw std::invalid_argument("train_exemplar_quantizer: input shape " +
                                inputs.shape().str() + " vs declared " + shape.str());
  }

  Codebook cb;
  cb.shape_ = shape;
  cb.grid_ = inputs.grid();
  cb.merge_radius_ = merge_radius;

  const std::size_t n = inputs.size();
  if (n < 2) {
    // reduction impossible; one-archetype codebook with a warning flag
    cb.trivial_warning_ = true;
    cb.archetypes_.push_back(inputs[0]);
    cb.representatives_.push_back(inputs[0]);
    return cb;
  }

  const double r2 = merge_radius * merge_radius;
  std::vector<detail::Cluster> clusters;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Sample& x = inputs[idx];
    if (!clusters.empty()) {
      const std::size_t j = detail::nearest(clusters, x);
      if (squared_distance(x, clusters[j].vec) <= r2) {
        detail::Cluster& c = clusters[j];
        for (std::size_t k = 0; k < x.size(); ++k) c.sum[k] += x[k];
        c.count += 1;
        c.vec = detail::cluster_mean(c, shape, cb.grid_);
        continue;
      }
    }
    detail::Cluster c;
    c.sum.assign(x.values().begin(), x.values().end());
    c.count = 1;
    c.vec = x;
    c.seed = idx;
    clusters.push_back(std::move(c));
  }

  // Forced reduction: strict |O| < |I| holds for every trained codebook.
  while (clusters.size() >= n) {
    std::size_t bi = 0, bj = 1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d2 = squared_distance(clusters[i].vec, clusters[j].vec);
        if (d2 < best_d2) {
          best_d2 = d2;
          bi = i;
          bj = j;
        }
      }
    }
    detail::Cluster& a = clusters[bi];
    const detail::Cluster& b = clusters[bj];
    for (std::size_t k = 0; k < a.sum.size(); ++k) a.sum[k] += b.sum[k];
    a.count += b.count;
    a.vec = detail::cluster_mean(a, shape, cb.grid_);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }

  // Assign every input to its nearest archetype under the final vectors.
  std::vector<std::size_t> assign(n);
  std::vector<std::size_t> load(clusters.size(), 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    assign[idx] = detail::nearest(clusters, inputs[idx]);
    load[assign[idx]] += 1;
  }

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (load[c] == 0) continue;  // unreachable on the training set; dropped
    // representative: the seed when it still maps here, else the nearest
    // assigned input (ties -> canonical order, i.e. first scanned)
    std::size_t rep = n;  // sentinel
    if (assign[clusters[c].seed] == c) {
      rep = clusters[c].seed;
    } else {
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t idx = 0; idx < n; ++idx) {
        if (assign[idx] != c) continue;
        const double d2 = squared_distance(inputs[idx], clusters[c].vec);
        if (d2 < best_d2) {
          best_d2 = d2;
          rep = idx;
        }
      }
    }
    cb.archetypes_.push_back(clusters[c].vec);
    cb.representatives_.push_back(inputs[rep]);
  }
  return cb;
}

// The all-merge construction: one archetype holding the mean of every input,
// with the first input (canonical order) as its representative.
inline Codebook train_trivial(const FiniteSet& inputs, const Shape& shape) {
  if (inputs.empty()) throw std::invalid_argument("train_trivial: empty input set");
  if (inputs.shape() != shape) {
    throw std::invalid_argument("train_trivial: input shape " + inputs.shape().str() +
                                " vs declared " + shape.str());
  }
  Codebook cb;
  cb.shape_ = shape;
  cb.grid_ = inputs.grid();
  std::vector<double> sum(shape.count(), 0.0);
  for (const Sample& x : inputs) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += x[k];
  }
  for (double& v : sum) v /= static_cast<double>(inputs.size());
  cb.archetypes_.push_back(canonical_quantize(Sample(shape, std::move(sum)), cb.grid_));
  cb.representatives_.push_back(inputs[0]);
  return cb;
}

// Deduplicated set of archetype vectors the codebook reaches over `inputs`.
inline FiniteSet output_set(const Codebook& cb, const FiniteSet& inputs) {
  if (!cb.trained()) throw std::runtime_error("output_set: codebook not trained");
  FiniteSet out(cb.shape(), cb.grid());
  for (const Sample& x : inputs) out.insert(cb.encode(x).second);
  return out;
}

// Record every (input, encoded archetype vector) pair of a run.
inline MappingLog run_log(const Codebook& cb, const FiniteSet& inputs) {
  MappingLog log(cb.shape(), cb.shape(), cb.grid());
  for (const Sample& x : inputs) log.record(x, cb.encode(x).second);
  return log;
}

}  // namespace drf
