#include <catch_amalgamated.hpp>

#include "drf/primitive.hpp"
#include "drf/rng.hpp"

using namespace drf;

namespace {

FiniteSet set1d(std::initializer_list<double> vals, double grid = 1e-6) {
  FiniteSet fs(Shape({1}), grid);
  for (double v : vals) fs.insert(Sample(Shape({1}), {v}));
  return fs;
}

}  // namespace

TEST_CASE("exemplar quantizer merges within the radius", "[primitive]") {
  // {0, 0.1, 5} with radius 0.5: the leader pass folds 0.1 into 0's cluster
  // (running mean 0.05) and leaves 5 alone.
  const FiniteSet inputs = set1d({0.0, 0.1, 5.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.5, Shape({1}));
  REQUIRE(cb.size() == 2);
  CHECK_FALSE(cb.trivial_warning());
  // the stored mean is grid-canonical, and 0.05 is not exactly on the grid
  CHECK(cb.archetype(ArchetypeId{0}) ==
        Sample(Shape({1}), {quantize_value(0.05, cb.grid())}));
  CHECK(cb.archetype(ArchetypeId{1}) == Sample(Shape({1}), {5.0}));
  CHECK(cb.project(ArchetypeId{0}) == Sample(Shape({1}), {0.0}));
  CHECK(cb.project(ArchetypeId{1}) == Sample(Shape({1}), {5.0}));
  CHECK(cb.encode(Sample(Shape({1}), {0.1})).first == ArchetypeId{0});
  CHECK(cb.encode(Sample(Shape({1}), {4.0})).first == ArchetypeId{1});
}

TEST_CASE("reduction is forced even when nothing is within radius", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 1.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.01, Shape({1}));
  REQUIRE(cb.size() == 1);
  CHECK(cb.archetype(ArchetypeId{0}) == Sample(Shape({1}), {0.5}));
  CHECK(cb.project(ArchetypeId{0}) == Sample(Shape({1}), {0.0}));  // seed exemplar
  CHECK(cb.encode(Sample(Shape({1}), {1.0})).first == ArchetypeId{0});
  CHECK_FALSE(cb.trivial_warning());
}

TEST_CASE("a singleton input set cannot reduce and is flagged", "[primitive]") {
  const FiniteSet inputs = set1d({3.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.5, Shape({1}));
  REQUIRE(cb.size() == 1);
  CHECK(cb.trivial_warning());
  CHECK(cb.archetype(ArchetypeId{0}) == Sample(Shape({1}), {3.0}));
  CHECK(cb.project(ArchetypeId{0}) == Sample(Shape({1}), {3.0}));
}

TEST_CASE("trivial primitive keeps one mean archetype", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 2.0, 4.0});
  const Codebook cb = train_trivial(inputs, Shape({1}));
  REQUIRE(cb.size() == 1);
  CHECK(cb.archetype(ArchetypeId{0}) == Sample(Shape({1}), {2.0}));
  CHECK(cb.project(ArchetypeId{0}) == Sample(Shape({1}), {0.0}));  // first input
}

TEST_CASE("trainer rejects bad arguments", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 1.0});
  CHECK_THROWS_AS(train_exemplar_quantizer(inputs, 0.0, Shape({1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_exemplar_quantizer(inputs, -1.0, Shape({1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_exemplar_quantizer(FiniteSet(Shape({1})), 0.5, Shape({1})),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_exemplar_quantizer(inputs, 0.5, Shape({2})),
                  std::invalid_argument);
}

TEST_CASE("untrained codebook refuses to work", "[primitive]") {
  const Codebook cb;
  CHECK_FALSE(cb.trained());
  CHECK_THROWS_AS(cb.encode(Sample(Shape({1}), {0.0})), std::runtime_error);
  CHECK_THROWS_AS(cb.project(ArchetypeId{0}), std::runtime_error);
}

TEST_CASE("every training strictly reduces and round-trips", "[primitive]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t dim = 1 + rng.index(3);
    const std::size_t target = 2 + rng.index(59);
    const Shape shape({dim});
    FiniteSet inputs(shape, 1e-6);
    while (inputs.size() < target) {
      std::vector<double> v(dim);
      for (double& x : v) x = rng.uniform(0.0, 10.0);
      inputs.insert(Sample(shape, std::move(v)));
    }
    const double radius = rng.uniform(0.05, 2.0);
    const Codebook cb = train_exemplar_quantizer(inputs, radius, shape);
    REQUIRE(cb.size() < inputs.size());
    for (std::size_t a = 0; a < cb.size(); ++a) {
      const Sample p = cb.project(ArchetypeId{a});
      REQUIRE(inputs.contains(p));
      REQUIRE(cb.encode(p).first == ArchetypeId{a});
    }
  }
}

TEST_CASE("output_set stays within the archetype vectors", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 0.1, 0.2, 5.0, 5.1, 9.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.3, Shape({1}));
  const FiniteSet out = output_set(cb, inputs);
  CHECK(out.size() == cb.size());
  for (const Sample& o : out) {
    CHECK(cb.archetype_of(o).has_value());
  }
}

TEST_CASE("run_log of a codebook is a surjective function", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 0.1, 0.2, 5.0, 5.1, 9.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.3, Shape({1}));
  const MappingLog log = run_log(cb, inputs);
  CHECK(log.pairs().size() == inputs.size());
  CHECK(log_is_surjective_function(log));
  CHECK(log.output_set().size() == cb.size());
}

TEST_CASE("codebook json round trip preserves behaviour", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 0.1, 5.0, 5.2, 7.7});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.4, Shape({1}));
  const Codebook back = Codebook::from_json(cb.to_json());
  CHECK(back.size() == cb.size());
  CHECK(back.merge_radius() == cb.merge_radius());
  for (const Sample& x : inputs) {
    CHECK(back.encode(x).first == cb.encode(x).first);
    CHECK(back.encode(x).second == cb.encode(x).second);
  }
  CHECK(cb.to_json() == back.to_json());
}

TEST_CASE("archetype_of is exact lookup, not nearest", "[primitive]") {
  const FiniteSet inputs = set1d({0.0, 0.1, 5.0});
  const Codebook cb = train_exemplar_quantizer(inputs, 0.5, Shape({1}));
  CHECK(cb.archetype_of(Sample(Shape({1}), {0.05})).has_value());
  CHECK_FALSE(cb.archetype_of(Sample(Shape({1}), {0.06})).has_value());
}
