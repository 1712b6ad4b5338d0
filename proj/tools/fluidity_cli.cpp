// fluidity: command-line front end.
// Exit codes: 0 ok, 1 usage error, 2 runtime failure.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "fluidity/codec.hpp"
#include "fluidity/config.hpp"
#include "fluidity/conformance.hpp"
#include "fluidity/engine.hpp"
#include "fluidity/mock.hpp"
#include "fluidity/report.hpp"
#include "fluidity/run_dir.hpp"

namespace fs = std::filesystem;
using namespace fluidity;

namespace {

void log_line(const std::string& s) { std::cerr << s << "\n"; }

std::vector<fs::path> files_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_mock_seeds(const fs::path& out, std::size_t count, std::uint64_t seed, double person_fraction,
                   const std::string& control) {
  const auto& onto = MockOntology::default_ontology();
  const auto scenes = control.empty() ? make_mock_seed_scenes(onto, count, seed, person_fraction)
                                      : make_mock_control_scenes(onto, control, count, seed);
  write_scene_files(scenes, out);
  std::cout << "wrote " << scenes.size() << " scenes to " << out.string() << "\n";
  return 0;
}

int cmd_seed_dataset(const fs::path& source, std::size_t count, const fs::path& out, const std::string& labeler_file,
                     std::uint64_t seed) {
  BackendClient client;
  BackendDescriptor labeler;
  if (labeler_file.empty()) {
    labeler = make_mock_suite(MockOntology::default_ontology(), 0.0, seed).labeler_a;
  } else {
    labeler = descriptor_from_json(parse_tracked(read_file(labeler_file)));
  }
  if (labeler.is_mock()) client.mount(labeler.endpoint.substr(5), std::make_shared<MockService>());
  auto seeds = ingest_seed_dataset(source, count, labeler, client, seed);
  // Paths are stored relative to the seed-set file so the set can move with its images.
  const fs::path base = fs::absolute(out).parent_path();
  for (auto& s : seeds) s.path = fs::relative(fs::absolute(s.path), base);
  if (!base.empty()) fs::create_directories(base);
  write_file_atomic(out, encode_seed_set(seeds));
  std::cout << "wrote " << seeds.size() << " seeds to " << out.string() << "\n";
  return 0;
}

int cmd_run(const fs::path& config_path, const fs::path& out, bool resume, std::size_t stop_after, bool serial) {
  const ExperimentConfig config = load_experiment_config(config_path);
  if (!resume && RunDirectory(out).has_manifest()) {
    std::cerr << "error: " << out.string() << " already holds a run; pass --resume to continue it\n";
    return 2;
  }
  BackendClient client;
  mount_mocks(client, config);
  ExperimentOptions opts;
  opts.execution = serial ? Execution::serial : Execution::parallel;
  if (stop_after > 0) opts.stop_after = stop_after;
  opts.log = log_line;
  const auto result = run_experiment(config, out, client, opts);
  std::cout << "run " << result.manifest.run_id << ": " << result.executed << " chains this invocation, "
            << result.manifest.completed_chain_ids.size() << "/" << config.seed_set.size() << " complete, "
            << result.manifest.failed_chains.size() << " failed, mean length " << fixed(result.distribution.mean(), 3)
            << "\n";
  return result.manifest.failed_chains.empty() ? 0 : 2;
}

int cmd_control(const fs::path& images, int shuffles, const fs::path& out, const std::string& config_path,
                std::uint64_t seed, bool serial) {
  ExperimentConfig config;
  if (config_path.empty()) {
    apply_mock_suite(config, make_mock_suite(MockOntology::default_ontology(), 0.0, seed));
  } else {
    config = load_experiment_config(config_path, false);
  }
  config.rng_seed = seed;
  config.image_generator.backend_id = std::string(kControlGeneratorId);
  BackendClient client;
  mount_mocks(client, config);

  // Either one category (a directory of images) or one subdirectory per category.
  std::map<std::string, std::vector<fs::path>> categories;
  for (const auto& e : fs::directory_iterator(images)) {
    if (e.is_directory()) categories[e.path().filename().string()] = files_in(e.path());
  }
  if (categories.empty()) categories[fs::absolute(images).filename().string()] = files_in(images);

  const RunDirectory dir(out);
  if (dir.has_manifest()) {
    std::cerr << "error: " << out.string() << " already holds a run\n";
    return 2;
  }
  RunManifest manifest;
  manifest.run_id = "control-" + config.captioner.backend_id;
  manifest.combo = {std::string(kControlGeneratorId), config.captioner.backend_id};
  manifest.seed_set_id = "control";
  manifest.thresholds = config.thresholds;
  for (const auto& [name, files] : categories) {
    const auto records = build_control_chains(files, name, shuffles, config, client,
                                              serial ? Execution::serial : Execution::parallel);
    for (const auto& r : records) {
      dir.save_chain(r);
      manifest.completed_chain_ids.insert(r.seed.id);
    }
    log_line("category " + name + ": " + std::to_string(records.size()) + " chains");
  }
  dir.save_manifest(manifest);
  const auto lengths = load_lengths(dir);
  std::cout << "control " << manifest.combo.key() << ": " << lengths.size() << " chains, mean length "
            << fixed(histogram(lengths).mean(), 3) << "\n";
  return 0;
}

int cmd_analyze(const std::vector<std::string>& runs, const std::vector<std::string>& controls, double alpha,
                const fs::path& out) {
  std::vector<fs::path> r(runs.begin(), runs.end()), c(controls.begin(), controls.end());
  const auto bundle = emit_report(r, c, alpha, out);
  std::size_t significant = 0;
  for (const auto& row : bundle.comparisons) significant += row.significant ? 1 : 0;
  for (const auto& e : bundle.scale) {
    std::cout << e.combo.key() << " kl=" << fixed(e.kl_to_uniform, 4) << "\n";
  }
  std::cout << bundle.comparisons.size() << " comparisons, " << significant << " significant; "
            << bundle.files.size() << " files in " << out.string() << "\n";
  return 0;
}

int cmd_sweep(const fs::path& run, const std::string& grid_path, const fs::path& out) {
  const SweepGrid grid =
      grid_path.empty() ? default_sweep_grid() : sweep_grid_from_json(parse_tracked(read_file(grid_path)));
  const auto rows = sweep_thresholds(run, grid);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file_atomic(out, sweep_csv(rows));
  std::cout << rows.size() << " grid points written to " << out.string() << "\n";
  return 0;
}

ProtocolServer* g_server = nullptr;

int cmd_conformance(const std::string& endpoint, const std::string& out) {
  const auto report = conformance_check(endpoint);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "pass " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  }
  if (!out.empty()) write_file_atomic(out, report.to_json().dump(2) + "\n");
  return report.passed() ? 0 : 2;
}

int cmd_mock_serve(double drift, std::uint64_t salt, const std::string& host, int port) {
  auto service = std::make_shared<MockService>();
  service->set_default_drift(drift);
  service->set_seed_salt(salt);
  ProtocolServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 2;
  }
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cout << "listening on " << host << ":" << bound << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-length fluidity experiments for captioner / image-generator pairs"};
  app.require_subcommand(1);

  fs::path out;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  auto* mock_seeds = app.add_subcommand("mock-seeds", "write synthetic seed (or control) scenes");
  double person_fraction = 0.0;
  std::string control_subject;
  mock_seeds->add_option("--out", out, "output directory")->required();
  mock_seeds->add_option("--count", count, "number of scenes")->required();
  mock_seeds->add_option("--seed", seed, "rng seed");
  mock_seeds->add_option("--person-fraction", person_fraction, "fraction of scenes led by a person")
      ->check(CLI::Range(0.0, 1.0));
  mock_seeds->add_option("--control", control_subject, "write control scenes of this subject instead");

  auto* seed_dataset = app.add_subcommand("seed-dataset", "select person-free seed images");
  fs::path source;
  std::string labeler_file;
  seed_dataset->add_option("--source", source, "candidate image directory")->required()->check(CLI::ExistingDirectory);
  seed_dataset->add_option("--count", count, "seeds wanted")->required();
  seed_dataset->add_option("--out", out, "seed-set file")->required();
  seed_dataset->add_option("--labeler", labeler_file, "labeler descriptor JSON (default: mock labeler)");
  seed_dataset->add_option("--seed", seed, "rng seed");

  auto* run = app.add_subcommand("run", "run every chain of an experiment");
  fs::path config_path;
  bool resume = false, serial = false;
  std::size_t stop_after = 0;
  run->add_option("--config", config_path, "experiment config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "run directory")->required();
  run->add_flag("--resume", resume, "continue an interrupted run");
  run->add_option("--stop-after", stop_after, "stop after this many chains");
  run->add_flag("--serial", serial, "run chains on one thread");

  auto* control = app.add_subcommand("control", "build control chains from same-category images");
  fs::path images;
  int shuffles = 0;
  std::string control_config;
  control->add_option("--images", images, "category directory, or a directory of category directories")
      ->required()
      ->check(CLI::ExistingDirectory);
  control->add_option("--shuffles", shuffles, "shuffles per category")->required()->check(CLI::PositiveNumber);
  control->add_option("--out", out, "run directory")->required();
  control->add_option("--config", control_config, "config supplying captioner, labelers, embedder, thresholds");
  control->add_option("--seed", seed, "rng seed");
  control->add_flag("--serial", serial, "run chains on one thread");

  auto* analyze = app.add_subcommand("analyze", "histograms, fluidity scale and significance tests");
  std::vector<std::string> runs, controls;
  double alpha = 0.05;
  analyze->add_option("--runs", runs, "run directories")->required()->expected(1, -1);
  analyze->add_option("--controls", controls, "control run directories")->expected(0, -1);
  analyze->add_option("--alpha", alpha, "family-wise significance level")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--out", out, "report directory")->required();

  auto* sweep = app.add_subcommand("sweep", "threshold sensitivity over a stored run");
  fs::path sweep_run;
  std::string grid_path;
  sweep->add_option("--run", sweep_run, "run directory")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--grid", grid_path,
                    "grid JSON {\"semantic\":[..],\"compat\":[..],\"label\":[..]} (default: semantic 0.25,0.5,0.75)");
  sweep->add_option("--out", out, "CSV file")->required();

  auto* serve = app.add_subcommand("mock-serve", "serve the mock backends over HTTP");
  double drift = 0.0;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--drift", drift, "default generator drift")->check(CLI::Range(0.0, 1.0));
  serve->add_option("--seed", seed, "salt mixed into every request seed (0: none)");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks one)");

  auto* conformance = app.add_subcommand("conformance", "check a protocol server against the wire protocol");
  std::string endpoint, manifest_out;
  conformance->add_option("--endpoint", endpoint, "base URL, e.g. http://127.0.0.1:8080")->required();
  conformance->add_option("--out", manifest_out, "write the conformance manifest here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*mock_seeds) return cmd_mock_seeds(out, count, seed, person_fraction, control_subject);
    if (*seed_dataset) return cmd_seed_dataset(source, count, out, labeler_file, seed);
    if (*run) return cmd_run(config_path, out, resume, stop_after, serial);
    if (*control) return cmd_control(images, shuffles, out, control_config, seed, serial);
    if (*analyze) return cmd_analyze(runs, controls, alpha, out);
    if (*sweep) return cmd_sweep(sweep_run, grid_path, out);
    if (*serve) return cmd_mock_serve(drift, seed, host, port);
    if (*conformance) return cmd_conformance(endpoint, manifest_out);
  } catch (const InsufficientSeeds& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
