// drf: generate datasets, train architecture graphs, query and verify them.
//
// Exit codes: 0 on success, 1 when verification (or --assert-monotone) finds
// a violated property, 2 for usage, configuration or data errors.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drf/drf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;

drf::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return drf::ordered_json::parse(in);
}

void write_json_file(const std::string& path, const drf::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void print_stats(const drf::TrainedGraph& graph) {
  std::cout << std::left << std::setw(16) << "node" << std::setw(14) << "kind"
            << std::right << std::setw(10) << "inputs" << std::setw(10) << "outputs"
            << '\n';
  for (const auto& s : graph.stats()) {
    std::cout << std::left << std::setw(16) << s.name << std::setw(14) << s.kind
              << std::right << std::setw(10) << s.input_card << std::setw(10)
              << s.output_card << '\n';
  }
}

// Every node must have strictly fewer outputs than inputs.
bool check_monotone(const drf::TrainedGraph& graph) {
  bool ok = true;
  for (const auto& s : graph.stats()) {
    if (s.output_card >= s.input_card) {
      std::cout << "monotone violation: node '" << s.name << "' maps " << s.input_card
                << " inputs to " << s.output_card << " outputs\n";
      ok = false;
    }
  }
  return ok;
}

// Nudge the first stored representative far off its value. The tampered
// model still loads, but projection no longer returns a training input, so
// verification must flag it.
void inject_representative_fault(drf::ordered_json& model) {
  auto& node = model.at("nodes").at(0);
  drf::ordered_json* reps = nullptr;
  auto& state = node.at("state");
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "column") {
    reps = &state.at("levels").at(0).at("representatives");
  } else if (kind == "pyramid") {
    reps = &state.at("rows").at(0).at(0).at("representatives");
  } else {
    reps = &state.at("codebook").at("representatives");
  }
  auto& value = reps->at(0).at(0);
  value = value.get<double>() + 1000.0;
  std::cout << "injected representative fault into node '"
            << node.at("name").get<std::string>() << "'\n";
}

drf::Dataset load_dataset_checked(const std::string& path, const std::string& expect_fp) {
  std::string stored;
  drf::Dataset ds = drf::load_rows(path, &stored);
  const std::string actual = ds.fingerprint();
  if (!stored.empty() && stored != actual) {
    std::cout << "warning: " << path << " does not match its sidecar fingerprint ("
              << actual << " vs " << stored << ")\n";
  }
  if (!expect_fp.empty() && expect_fp != actual) {
    std::cout << "warning: dataset fingerprint " << actual
              << " differs from the one the model was trained on (" << expect_fp << ")\n";
  }
  return ds;
}

std::map<std::string, drf::Sample> parse_known(const drf::ordered_json& j,
                                               const drf::TrainedGraph& graph) {
  std::map<std::string, drf::Sample> known;
  for (const auto& [name, values] : j.items()) {
    if (!graph.config().is_source(name)) {
      throw std::runtime_error("'" + name + "' is not a source of this model");
    }
    std::vector<double> v = values.get<std::vector<double>>();
    known.emplace(name, drf::Sample(graph.source_shape(name), std::move(v)));
  }
  return known;
}

drf::ordered_json stats_json(const drf::TrainedGraph& graph) {
  drf::ordered_json nodes = drf::ordered_json::array();
  for (const auto& s : graph.stats()) {
    drf::ordered_json j;
    j["name"] = s.name;
    j["kind"] = s.kind;
    j["input_card"] = s.input_card;
    j["output_card"] = s.output_card;
    nodes.push_back(j);
  }
  drf::ordered_json out;
  out["dataset_fingerprint"] = graph.dataset_fingerprint();
  out["nodes"] = nodes;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diversity-reduction toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_path, model_path, out_path, known_inline, known_path;
  std::uint64_t seed = 1234;
  bool seed_given = false;
  bool inject_fault = false;
  bool assert_monotone = false;

  auto* gen = app.add_subcommand("gen", "generate a dataset from a spec");
  gen->add_option("--config", config_path, "dataset spec (json)")->required();
  gen->add_option("--out", out_path, "output csv path")->required();
  gen->add_option("--seed", seed, "override the spec seed")->each([&](const std::string&) {
    seed_given = true;
  });

  auto* train = app.add_subcommand("train", "train an architecture graph");
  train->add_option("--config", config_path, "graph config (json)")->required();
  train->add_option("--data", data_path, "training dataset (csv)")->required();
  train->add_option("--out", out_path, "output model path (json)");
  train->add_flag("--inject-fault", inject_fault,
                  "corrupt one representative in the saved model");
  train->add_flag("--assert-monotone", assert_monotone,
                  "exit 1 unless every node strictly reduces");

  auto* verify = app.add_subcommand("verify", "run the property checkers on a model");
  verify->add_option("--model", model_path, "trained model (json)")->required();
  verify->add_option("--data", data_path, "dataset the model was trained on")->required();
  verify->add_option("--seed", seed, "seed for randomized checks");
  verify->add_option("--out", out_path, "write the report as json");

  auto* complete = app.add_subcommand("complete", "complete unknown sources from known ones");
  complete->add_option("--model", model_path, "trained model (json)")->required();
  complete->add_option("--known", known_inline, "known sources as inline json");
  complete->add_option("--known-file", known_path, "known sources as a json file");
  complete->add_option("--out", out_path, "write the completion as json");

  auto* report = app.add_subcommand("report", "print a model's cardinality table");
  report->add_option("--model", model_path, "trained model (json)")->required();
  report->add_flag("--assert-monotone", assert_monotone,
                   "exit 1 unless every node strictly reduces");
  report->add_option("--out", out_path, "write the stats as json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      drf::DatasetSpec spec = drf::DatasetSpec::from_json(read_json_file(config_path));
      if (seed_given) spec.seed = seed;
      const drf::Dataset ds = drf::generate(spec);
      drf::save_rows(ds, out_path);
      std::cout << "wrote " << ds.rows() << " rows x " << ds.column_count()
                << " columns to " << out_path << "\nfingerprint " << ds.fingerprint()
                << '\n';
      return kExitOk;
    }

    if (train->parsed()) {
      const drf::GraphConfig config = drf::GraphConfig::from_json(read_json_file(config_path));
      const drf::Dataset ds = load_dataset_checked(data_path, "");
      const drf::TrainedGraph graph = drf::TrainedGraph::train(config, ds);
      print_stats(graph);
      if (!out_path.empty()) {
        drf::ordered_json model = graph.to_json();
        if (inject_fault) inject_representative_fault(model);
        write_json_file(out_path, model);
        std::cout << "model written to " << out_path << '\n';
      }
      if (assert_monotone && !check_monotone(graph)) return kExitVerification;
      return kExitOk;
    }

    if (verify->parsed()) {
      const drf::TrainedGraph graph = drf::TrainedGraph::from_json(read_json_file(model_path));
      const drf::Dataset ds = load_dataset_checked(data_path, graph.dataset_fingerprint());
      const drf::VerificationReport rep = drf::run_all(graph, ds, seed);
      for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "  ok  " : " FAIL ") << c.id << "  (" << c.cases_run
                  << " cases) " << c.detail << '\n';
      }
      if (!out_path.empty()) write_json_file(out_path, rep.to_json());
      if (rep.all_passed()) {
        std::cout << "all checks passed\n";
        return kExitOk;
      }
      std::cout << "verification failed\n";
      return kExitVerification;
    }

    if (complete->parsed()) {
      const drf::TrainedGraph graph = drf::TrainedGraph::from_json(read_json_file(model_path));
      drf::ordered_json kj;
      if (!known_inline.empty()) {
        kj = drf::ordered_json::parse(known_inline);
      } else if (!known_path.empty()) {
        kj = read_json_file(known_path);
      } else {
        throw std::runtime_error("complete needs --known or --known-file");
      }
      const auto known = parse_known(kj, graph);
      const auto resolved = graph.complete(known);
      drf::ordered_json out;
      for (const auto& [name, sample] : resolved) out[name] = sample.to_json();
      std::cout << out.dump(2) << '\n';
      if (!out_path.empty()) write_json_file(out_path, out);
      return kExitOk;
    }

    if (report->parsed()) {
      const drf::TrainedGraph graph = drf::TrainedGraph::from_json(read_json_file(model_path));
      print_stats(graph);
      if (!out_path.empty()) write_json_file(out_path, stats_json(graph));
      if (assert_monotone && !check_monotone(graph)) return kExitVerification;
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
