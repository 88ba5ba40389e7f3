#include <catch_amalgamated.hpp>

#include "drf/verify.hpp"

using namespace drf;

namespace {

FiniteSet random_set(std::uint64_t seed, std::size_t dim, std::size_t n) {
  Rng rng(seed);
  const Shape shape({dim});
  FiniteSet fs(shape, 1e-6);
  while (fs.size() < n) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform(0.0, 10.0);
    fs.insert(Sample(shape, std::move(v)));
  }
  return fs;
}

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

GraphConfig mixed_config() {
  GraphConfig g;
  g.sources = {"m1", "m2", "label"};
  NodeConfig c1;
  c1.name = "col_m1";
  c1.kind = "column";
  c1.levels = 2;
  c1.primitive.merge_radius = 0.3;
  NodeConfig p2;
  p2.name = "pyr_m2";
  p2.kind = "pyramid";
  p2.depth = 1;
  p2.primitive.merge_radius = 0.3;
  NodeConfig top;
  top.name = "top";
  top.kind = "associative";
  top.primitive.merge_radius = 0.5;
  g.nodes = {c1, p2, top};
  g.edges = {{"m1", "col_m1", 0}, {"m2", "pyr_m2", 0},   {"col_m1", "top", 0},
             {"pyr_m2", "top", 1}, {"label", "top", 2}};
  g.sink = "top";
  return g;
}

}  // namespace

TEST_CASE("surjective map check passes on a codebook run", "[verify]") {
  const FiniteSet inputs = random_set(21, 1, 30);
  const Codebook cb = train_exemplar_quantizer(inputs, 0.5, inputs.shape());
  const CheckResult r = check_surjective_map(run_log(cb, inputs), "cb");
  CHECK(r.id == "surjective_map@cb");
  CHECK(r.passed);
  CHECK(r.cases_run == 30);
  CHECK(r.detail.find("max_preimages") != std::string::npos);
}

TEST_CASE("surjective map check fails on a conflicted log", "[verify]") {
  const Shape s({1});
  MappingLog log(s, s);
  log.record(Sample(s, {1.0}), Sample(s, {0.5}));
  log.record(Sample(s, {1.0}), Sample(s, {0.6}));
  CHECK_FALSE(check_surjective_map(log, "broken").passed);
}

TEST_CASE("latent set check catches a corrupted representative", "[verify]") {
  const FiniteSet inputs = random_set(22, 1, 20);
  const Codebook cb = train_exemplar_quantizer(inputs, 0.5, inputs.shape());
  CHECK(check_latent_set(cb, inputs, "cb").passed);

  ordered_json j = cb.to_json();
  j["representatives"][0][0] = j["representatives"][0][0].get<double>() + 123.0;
  const Codebook bad = Codebook::from_json(j);
  const CheckResult r = check_latent_set(bad, inputs, "cb");
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.counterexample.is_null());
}

TEST_CASE("latent transitivity holds for a trained column", "[verify]") {
  const FiniteSet inputs = random_set(23, 2, 50);
  PrimitiveParams p;
  p.merge_radius = 0.8;
  const DiscriminatoryColumn col = DiscriminatoryColumn::train(inputs, 3, p);
  const CheckResult r = check_latent_transitivity(col, inputs, "col");
  CHECK(r.passed);
  CHECK(r.cases_run > 0);
}

TEST_CASE("average recovery holds on the aligned fixture", "[verify]") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const AlignedPairFixture fx = make_aligned_pair_fixture(1e-6, seed);
    const Codebook first = train_exemplar_quantizer(fx.inputs, fx.first_radius,
                                                    fx.inputs.shape());
    const Codebook second = train_exemplar_quantizer(fx.inputs, fx.second_radius,
                                                     fx.inputs.shape());
    const CheckResult r = check_average_latent(first, second, fx.inputs, "fx");
    INFO("seed " << seed << ": " << r.detail);
    CHECK(r.passed);
    CHECK(r.cases_run == fx.inputs.size());
  }
}

TEST_CASE("pyramid corollary check compares against a fresh column", "[verify]") {
  const FiniteSet inputs = random_set(24, 1, 24);
  PrimitiveParams p;
  p.merge_radius = 0.5;
  const DiscriminatoryPyramid pyr = DiscriminatoryPyramid::train(inputs, 2, p);
  const CheckResult r = check_pyramid_column_corollary(pyr, inputs, "pyr");
  CHECK(r.passed);
  CHECK(r.cases_run > 0);
}

TEST_CASE("pyramid corollary reports an unmet precondition under jitter", "[verify]") {
  const FiniteSet inputs = random_set(25, 1, 24);
  PrimitiveParams p;
  p.merge_radius = 0.5;
  p.radius_jitter = 0.1;
  const DiscriminatoryPyramid pyr = DiscriminatoryPyramid::train(inputs, 1, p);
  const CheckResult r = check_pyramid_column_corollary(pyr, inputs, "pyr");
  CHECK(r.passed);  // vacuously: nothing to compare
  CHECK(r.cases_run == 0);
  CHECK(r.detail.find("precondition unmet") != std::string::npos);
}

TEST_CASE("correlation check ties the layer to observed tuples", "[verify]") {
  const ConcatLayout layout({Shape({1}), Shape({1})});
  std::vector<std::vector<Sample>> presented;
  const Shape s({1});
  presented.push_back({Sample(s, {0.0}), Sample(s, {1.0})});
  presented.push_back({Sample(s, {0.0}), Sample(s, {1.0})});  // repeat
  presented.push_back({Sample(s, {2.0}), Sample(s, {3.0})});

  CheckResult r = check_correlation(presented, layout, 2, 1e-6, false, "al");
  CHECK(r.passed);
  CHECK(r.detail.find("observed=2") != std::string::npos);
  CHECK(r.detail.find("product=4") != std::string::npos);

  r = check_correlation(presented, layout, 4, 1e-6, false, "al");
  CHECK_FALSE(r.passed);  // claimed training set is not the observed set

  r = check_correlation(presented, layout, 2, 1e-6, true, "al");
  CHECK(r.passed);
  CHECK(r.detail.find("deferred") != std::string::npos);
}

TEST_CASE("concat bijectivity over random tuples", "[verify]") {
  const ConcatLayout layout({Shape({2}), Shape({3}), Shape({1})});
  const CheckResult r = check_concat_bijective(layout, 100, 77, "layout");
  CHECK(r.passed);
  CHECK(r.cases_run == 100);
}

TEST_CASE("run_all sweeps every node and is deterministic", "[verify]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(mixed_config(), ds);
  const VerificationReport rep = run_all(g, ds, 99);
  CHECK(rep.all_passed());

  // fixed id order: per node in topological order, then the constructed check
  REQUIRE(rep.checks.size() == 11);
  CHECK(rep.checks[0].id == "surjective_map@col_m1");
  CHECK(rep.checks[1].id == "latent_set@col_m1");
  CHECK(rep.checks[2].id == "latent_transitivity@col_m1");
  CHECK(rep.checks[3].id == "surjective_map@pyr_m2");
  CHECK(rep.checks[4].id == "latent_set@pyr_m2");
  CHECK(rep.checks[5].id == "pyramid_column@pyr_m2");
  CHECK(rep.checks[6].id == "surjective_map@top");
  CHECK(rep.checks[7].id == "latent_set@top");
  CHECK(rep.checks[8].id == "correlation@top");
  CHECK(rep.checks[9].id == "concat_bijective@top");
  CHECK(rep.checks[10].id == "average_latent@constructed");

  const VerificationReport again = run_all(g, ds, 99);
  CHECK(rep.to_json().dump(2) == again.to_json().dump(2));
}

TEST_CASE("run_all flags a tampered model", "[verify]") {
  const Dataset ds = mini_dataset();
  const TrainedGraph g = TrainedGraph::train(mixed_config(), ds);
  ordered_json model = g.to_json();
  auto& rep0 = model["nodes"][0]["state"]["levels"][0]["representatives"][0][0];
  rep0 = rep0.get<double>() + 1000.0;
  const TrainedGraph bad = TrainedGraph::from_json(model);
  const VerificationReport rep = run_all(bad, ds, 99);
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("run_all refuses an untrained graph", "[verify]") {
  const TrainedGraph g;
  CHECK_THROWS_AS(run_all(g, mini_dataset(), 1), std::invalid_argument);
}
