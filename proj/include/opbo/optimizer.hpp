#ifndef OPBO_OPTIMIZER_HPP
#define OPBO_OPTIMIZER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opbo/acquisition.hpp"
#include "opbo/benchfn.hpp"
#include "opbo/surrogate_gp.hpp"
#include "opbo/surrogate_op.hpp"

namespace opbo {

enum class Framework { StandardBO, OPBO, TrustRegion };
enum class SurrogateKind { OP, GP, NN };

std::string to_string(Framework framework);
Framework framework_from_string(const std::string& s);
std::string to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& s);

struct RunConfig {
  ObjectiveFunction objective;
  Framework framework = Framework::OPBO;
  SurrogateKind surrogate = SurrogateKind::OP;
  /// Unset picks the framework convention: Thompson sampling for the GP,
  /// greedy score for OP/NN.
  std::optional<AcquisitionSpec> acquisition;
  int initial_size = 10;    // k
  int iterations = 50;      // R
  int candidate_size = 0;   // N; 0 resolves to dimension x 10
  int good_enough_size = 10;  // g; StandardBO forces 1
  TrainConfig train;
  std::uint64_t seed = 0;
  bool warm_start = false;  // OP surrogate: refit from previous parameters
  int gp_max_points = 2000;
};

/// Hyper-box around the region's best point. The side length doubles after
/// success_tolerance consecutive strict improvements and halves after
/// failure_tolerance consecutive non-improvements; dropping below
/// min_side_length raises the restart flag instead of leaving the range.
struct TrustRegionState {
  double side_length = 0.8;
  int success_count = 0;
  int failure_count = 0;
  int success_tolerance = 3;
  int failure_tolerance = 5;  // engine uses max(5, ceil(d/g))
  double min_side_length = 0.0078125;  // 2^-7
  double max_side_length = 1.6;
  Eigen::VectorXd center;
  bool restart = false;
};

/// Success means batch_best < incumbent - 1e-8 |incumbent| (ties fail).
TrustRegionState update_trust_region(const TrustRegionState& state,
                                     double batch_best, double incumbent);

struct GpIterationInfo {
  double lengthscale = 0.0;
  double signal_variance = 0.0;
  double noise_variance = 0.0;
  double log_marginal_likelihood = 0.0;
};

struct IterationRecord {
  int iteration = 0;          // 1-based
  Eigen::MatrixXd suggested;  // rows in unit-cube coordinates
  Eigen::VectorXd observed;
  double batch_best = 0.0;
  double incumbent = 0.0;  // best observed value including this batch
  long cumulative_evaluations = 0;
  double fit_seconds = 0.0;
  double iter_seconds = 0.0;
  std::optional<double> trust_region_side;
  std::optional<double> fit_final_loss;  // OP/NN last-epoch training loss
  std::optional<GpIterationInfo> gp;
};

struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  Eigen::VectorXd best_point_unit;
  Eigen::VectorXd best_point;  // original coordinates
  double best_value = 0.0;
  double initial_incumbent = 0.0;  // best value of the initial design
  long total_evaluations = 0;
  double total_seconds = 0.0;
};

/// Classic loop: Latin hypercube init of k points, then R rounds of
/// fit / sample candidates / acquire / evaluate the single best candidate.
OptimizationTrace run_standard_bo(const RunConfig& config);

/// Good-enough-batch loop: each round evaluates the top-g candidates of the
/// acquisition instead of a single arg-max point.
OptimizationTrace run_opbo(const RunConfig& config);

/// As run_opbo, with candidates drawn inside a trust region around the
/// region's best point. A restart consumes the following round to evaluate k
/// fresh space-filling points (still charged to the budget) and resets the
/// region.
OptimizationTrace run_trust_region(const RunConfig& config);

/// Dispatch on config.framework.
OptimizationTrace run(const RunConfig& config);

}  // namespace opbo

#endif  // OPBO_OPTIMIZER_HPP
