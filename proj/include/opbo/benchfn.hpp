#ifndef OPBO_BENCHFN_HPP
#define OPBO_BENCHFN_HPP

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "opbo/errors.hpp"
#include "opbo/rng.hpp"

namespace opbo {

enum class BenchName { Ackley, Levy, Rosenbrock, DixonPrice };

/// Lowercase names used in configs and output files.
std::string to_string(BenchName name);
BenchName bench_name_from_string(const std::string& s);  // throws UnknownFunction

/// A named d-dimensional benchmark with a uniform box domain and optional
/// Gaussian observation noise. Values are immutable once constructed.
struct ObjectiveFunction {
  BenchName name = BenchName::Ackley;
  int dimension = 1;
  double lower_bound = -5.0;
  double upper_bound = 10.0;
  double noise_std = 0.0;

  std::string id() const;  // e.g. "ackley_d100"
};

/// Validates dimension and bounds (d >= 2 except Ackley; lower < upper;
/// noise_std >= 0).
ObjectiveFunction make_objective(BenchName name, int dimension,
                                 double lower_bound = -5.0,
                                 double upper_bound = 10.0,
                                 double noise_std = 0.0);

/// Noiseless f(x) in original coordinates. Out-of-bounds coordinates raise
/// OutOfBounds with the offending index; no clamping is performed.
double evaluate_noiseless(const ObjectiveFunction& fn, const Eigen::VectorXd& x);

struct EvaluationRecord {
  Eigen::VectorXd point;  // original coordinates
  double value = 0.0;      // observed (noisy when noise_std > 0)
  double true_value = 0.0; // noiseless f(x)
  long eval_index = 0;     // cumulative objective calls within the trial
};

/// Trial-local evaluation context: owns the cumulative call counter and the
/// noise stream so that every optimization framework is charged identically
/// per true-function call. Single-threaded within a trial.
class Evaluator {
 public:
  Evaluator(ObjectiveFunction fn, RngStream noise_rng)
      : fn_(std::move(fn)), rng_(std::move(noise_rng)) {}

  EvaluationRecord evaluate(const Eigen::VectorXd& x_original);
  /// Convenience entry for optimizer arithmetic on the unit cube.
  EvaluationRecord evaluate_unit(const Eigen::VectorXd& u);

  long evaluations() const { return count_; }
  const ObjectiveFunction& objective() const { return fn_; }

 private:
  ObjectiveFunction fn_;
  RngStream rng_;
  long count_ = 0;
};

/// Affine map between the objective's box and the unit cube.
Eigen::VectorXd to_unit(const ObjectiveFunction& fn, const Eigen::VectorXd& x);
Eigen::VectorXd from_unit(const ObjectiveFunction& fn, const Eigen::VectorXd& u);

/// Analytic global minimizer (restricted to the configured bounds) and its value.
std::pair<Eigen::VectorXd, double> known_minimum(const ObjectiveFunction& fn);

/// Cartesian product of the four benchmark names with the given dimensions,
/// bounds [-5, 10]^d, noiseless.
std::vector<ObjectiveFunction> make_suite(const std::vector<int>& dims);

}  // namespace opbo

#endif  // OPBO_BENCHFN_HPP
