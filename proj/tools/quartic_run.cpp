// Batch driver: quartic-run <experiment> --config PATH [--out DIR] [--threads N] [--seed K]
#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "quartic/config.hpp"
#include "quartic/errors.hpp"
#include "quartic/harness.hpp"
#include "quartic/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quartic Schroedinger dispersive-estimate experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 0;
  long long seed = -1;
  for (const std::string& name : quartic::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--threads", threads, "worker threads (overrides QUARTIC_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomised checks (overrides run.seed)")->check(CLI::NonNegativeNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    quartic::ExperimentConfig cfg = quartic::load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != experiment)
      throw quartic::ConfigError("config is for '" + cfg.experiment + "', not '" + experiment + "'");
    cfg.experiment = experiment;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) quartic::set_thread_count(threads);
    const quartic::RunOutcome r = quartic::run(cfg);
    for (const auto& f : r.files) std::cout << "wrote " << f << "\n";
    std::cout << (r.pass ? "PASS" : "FAIL") << "\n";
    return r.pass ? 0 : 1;
  } catch (const quartic::Error& e) {
    nlohmann::ordered_json j;
    j["error"] = e.kind();
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["error"] = "internal";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 3;
  }
}
