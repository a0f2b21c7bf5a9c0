#ifndef OPBO_HARNESS_HPP
#define OPBO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opbo/metrics.hpp"
#include "opbo/optimizer.hpp"

namespace opbo {

inline constexpr const char* kSoftwareVersion = "opbo 0.1.0";

/// Default output root when neither the config nor --out names one.
inline constexpr const char* kOutputRootEnvVar = "OPBO_OUT_ROOT";

/// One algorithm column of the experiment matrix. `base` carries every
/// RunConfig field except the objective, which is filled in per problem.
/// Random search reuses the same budget accounting (k + R x g evaluations)
/// but never fits a surrogate.
struct AlgorithmEntry {
  std::string id;
  bool random_search = false;
  RunConfig base;
};

struct ExperimentConfig {
  std::vector<ObjectiveFunction> suite;
  std::vector<AlgorithmEntry> algorithms;
  int trials_per_cell = 10;
  std::uint64_t base_seed = 0;
  std::string output_dir;  // empty defers to --out / environment / ./opbo-runs
  int parallelism = 1;
};

/// Strict parse: unknown or ill-typed fields throw ConfigError naming the
/// offending field path.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

/// Built-in matrices: "desk" (d = 100, R = 50, feasible on a workstation) and
/// "paper" (d = 600..1000, R = 500, for machines with real compute).
ExperimentConfig make_preset(const std::string& name);

/// Every algorithm shares the same per-trial seed within a problem, so all of
/// them start from the identical initial design.
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& problem_id,
                         int trial);

/// Baseline that spends the identical budget on uniform random points.
OptimizationTrace run_random_search(const RunConfig& config);

std::string trace_csv_header();
std::string trace_to_csv(const std::string& trial_id,
                         const OptimizationTrace& trace);

struct RunOutcome {
  std::filesystem::path directory;
  int executed = 0;
  int skipped = 0;
  int failed = 0;
};

/// Executes the full problem x algorithm x trial matrix with a worker pool,
/// writing one trace CSV and one result JSON per trial plus a manifest, all
/// atomically (temp file + rename). Trials already marked done in the
/// manifest with their files still present are skipped, so interrupted runs
/// resume. A failed trial is recorded in the manifest and the run continues.
RunOutcome run_experiment(const ExperimentConfig& config);

struct CellSummary {
  std::string problem;
  std::string algorithm;
  int trials = 0;
  double median_final = 0.0;
  double q1_final = 0.0;
  double q3_final = 0.0;
  double tavg_seconds = 0.0;
  // Per-iteration curves: evaluation counts with median and quartile
  // incumbents across trials.
  std::vector<double> evals;
  std::vector<double> median_curve;
  std::vector<double> q1_curve;
  std::vector<double> q3_curve;
};

struct ExperimentSummary {
  std::vector<std::string> problems;
  std::vector<std::string> algorithms;
  std::map<std::string, std::map<std::string, CellSummary>> cells;
  RankTable rank_table;
};

/// Recomputes everything from the manifest plus trace/result files (no hidden
/// state). When write_outputs is set, writes summary/summary.json and
/// summary/rank_table.csv under the results directory.
ExperimentSummary summarize(const std::filesystem::path& results_dir,
                            bool write_outputs = true);

nlohmann::json summary_to_json(const ExperimentSummary& summary);

/// One SVG per problem under <results_dir>/plots. Returns the files written.
std::vector<std::filesystem::path> export_plots(
    const ExperimentSummary& summary, const std::filesystem::path& results_dir);

/// Ordered-performance-curve report over raw sample values.
nlohmann::json diagnose_values(const Eigen::VectorXd& values);

/// Held-out rank agreement between a fitted model's scores and the fitness
/// ordering (-value) of fresh samples.
nlohmann::json diagnose_surrogate(const OpSurrogateModel& model,
                                  const Eigen::MatrixXd& held_points_unit,
                                  const Eigen::VectorXd& held_values);

/// Samples the function uniformly, reports its OPC, and optionally fits the
/// order-preserving surrogate on a train split to report held-out rank
/// correlation between scores and fitness (-value).
nlohmann::json diagnose_function(const ObjectiveFunction& fn, int samples,
                                 std::uint64_t seed, bool fit_surrogate);

/// $OPBO_OUT_ROOT when set, else ./opbo-runs.
std::filesystem::path default_output_root();

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace opbo

#endif  // OPBO_HARNESS_HPP
