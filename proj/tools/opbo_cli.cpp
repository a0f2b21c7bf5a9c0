#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opbo/harness.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_file, const std::string& preset,
            const std::optional<std::uint64_t>& seed,
            const std::optional<int>& parallelism, const std::string& out_dir) {
  if (config_file.empty() == preset.empty()) {
    std::cerr << "error: pass exactly one of <config> or --preset\n";
    return 1;
  }
  opbo::ExperimentConfig config = preset.empty()
                                      ? opbo::load_experiment_config(config_file)
                                      : opbo::make_preset(preset);
  if (seed) config.base_seed = *seed;
  if (parallelism) config.parallelism = *parallelism;
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (config.output_dir.empty()) {
    const std::string stem =
        preset.empty() ? fs::path(config_file).stem().string() : preset;
    config.output_dir = (opbo::default_output_root() / stem).string();
  }
  const opbo::RunOutcome outcome = opbo::run_experiment(config);
  std::cout << "output:   " << outcome.directory.string() << "\n"
            << "executed: " << outcome.executed << "\n"
            << "skipped:  " << outcome.skipped << "\n"
            << "failed:   " << outcome.failed << "\n";
  return outcome.failed > 0 ? 3 : 0;
}

int cmd_summarize(const std::string& dir) {
  const opbo::ExperimentSummary summary = opbo::summarize(dir);
  std::cout << opbo::rank_table_csv(summary.rank_table);
  std::cout << "\nwrote " << (fs::path(dir) / "summary").string() << "\n";
  return 0;
}

int cmd_plot(const std::string& dir) {
  const opbo::ExperimentSummary summary = opbo::summarize(dir, false);
  for (const fs::path& file : opbo::export_plots(summary, dir)) {
    std::cout << file.string() << "\n";
  }
  return 0;
}

int cmd_diagnose(const std::string& function, int dimension, int samples,
                 std::uint64_t seed, bool fit_surrogate, double lower,
                 double upper, const std::string& out_file) {
  const opbo::ObjectiveFunction fn = opbo::make_objective(
      opbo::bench_name_from_string(function), dimension, lower, upper);
  const nlohmann::json report =
      opbo::diagnose_function(fn, samples, seed, fit_surrogate);
  const std::string text = report.dump(2) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    opbo::write_file_atomic(out_file, text);
    std::cout << "wrote " << out_file << "\n";
  }
  return 0;
}

int cmd_bench_list() {
  using opbo::BenchName;
  std::printf("%-12s %-8s %-18s %s\n", "name", "dims", "default domain",
              "known minimum");
  for (BenchName name : {BenchName::Ackley, BenchName::Levy,
                         BenchName::Rosenbrock, BenchName::DixonPrice}) {
    const int demo_dim = name == BenchName::Ackley ? 1 : 2;
    const opbo::ObjectiveFunction fn = opbo::make_objective(name, demo_dim);
    const auto [minimizer, value] = opbo::known_minimum(fn);
    (void)minimizer;
    std::printf("%-12s %-8s %-18s f* = %g\n", opbo::to_string(name).c_str(),
                name == BenchName::Ackley ? "d >= 1" : "d >= 2",
                "[-5, 10]^d", value);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-preserving Bayesian optimization toolkit"};
  app.require_subcommand(1);

  std::string config_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::string out_dir;
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment matrix");
  run_cmd->add_option("config", config_file, "Experiment config JSON file")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--preset", preset, "Built-in matrix: desk or paper");
  run_cmd->add_option("--seed", seed, "Override the config's base_seed");
  run_cmd->add_option("--parallelism", parallelism,
                      "Concurrent trial workers");
  run_cmd->add_option("--out", out_dir, "Output directory");

  std::string summarize_dir;
  auto* summarize_cmd =
      app.add_subcommand("summarize", "Aggregate a results directory");
  summarize_cmd->add_option("dir", summarize_dir, "Results directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  std::string plot_dir;
  auto* plot_cmd =
      app.add_subcommand("plot", "Render convergence SVGs for a results directory");
  plot_cmd->add_option("dir", plot_dir, "Results directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  std::string diag_function;
  int diag_dimension = 2;
  int diag_samples = 2000;
  std::uint64_t diag_seed = 0;
  bool diag_fit = false;
  double diag_lower = -5.0;
  double diag_upper = 10.0;
  std::string diag_out;
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "Sample a benchmark and report its ordered performance curve");
  diag_cmd->add_option("--function", diag_function, "Benchmark name")
      ->required();
  diag_cmd->add_option("--dimension", diag_dimension, "Dimension")->required();
  diag_cmd->add_option("--samples", diag_samples, "Sample count (>= 10)");
  diag_cmd->add_option("--seed", diag_seed, "Sampling seed");
  diag_cmd->add_flag("--fit-surrogate", diag_fit,
                     "Fit the ranking surrogate and report held-out rank "
                     "correlation");
  diag_cmd->add_option("--lower", diag_lower, "Domain lower bound");
  diag_cmd->add_option("--upper", diag_upper, "Domain upper bound");
  diag_cmd->add_option("--out", diag_out, "Write the JSON report here");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark function utilities");
  auto* bench_list_cmd =
      bench_cmd->add_subcommand("list", "List available functions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return cmd_run(config_file, preset, seed, parallelism, out_dir);
    }
    if (*summarize_cmd) return cmd_summarize(summarize_dir);
    if (*plot_cmd) return cmd_plot(plot_dir);
    if (*diag_cmd) {
      return cmd_diagnose(diag_function, diag_dimension, diag_samples,
                          diag_seed, diag_fit, diag_lower, diag_upper,
                          diag_out);
    }
    if (*bench_cmd) {
      if (*bench_list_cmd) return cmd_bench_list();
      std::cerr << "error: bench requires a subcommand (list)\n";
      return 1;
    }
  } catch (const opbo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
