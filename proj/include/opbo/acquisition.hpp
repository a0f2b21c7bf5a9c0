#ifndef OPBO_ACQUISITION_HPP
#define OPBO_ACQUISITION_HPP

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "opbo/dataset.hpp"
#include "opbo/rng.hpp"
#include "opbo/sampling.hpp"
#include "opbo/surrogate_gp.hpp"
#include "opbo/surrogate_op.hpp"

namespace opbo {

enum class AcquisitionKind {
  ExpectedImprovement,
  UpperConfidenceBound,
  ThompsonSampling,
  GreedyScore,
};

std::string to_string(AcquisitionKind kind);
AcquisitionKind acquisition_kind_from_string(const std::string& s);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::GreedyScore;
  double kappa = 1.96;  // UCB only
};

/// Top-g candidates by acquisition value, sorted descending, ties broken by
/// smaller candidate index.
struct GoodEnoughSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd acquisition_values;
  std::vector<int> indices;
};

/// Expected improvement for minimization: with I = best_observed - mean,
/// EI = I Phi(I/sigma) + sigma phi(I/sigma), degenerating to max(I, 0) at
/// sigma = 0. Nonnegative everywhere.
Eigen::VectorXd expected_improvement(const PosteriorPrediction& pred,
                                     double best_observed);

/// Negated lower confidence bound -(mean - kappa sigma), so larger is better
/// like every other acquisition here.
Eigen::VectorXd upper_confidence_bound(const PosteriorPrediction& pred,
                                       double kappa);

using Surrogate = std::variant<OpSurrogateModel, GpModel, NnSurrogateModel>;

/// Acquisition values over the candidate set, always oriented so the largest
/// value marks the most desirable candidate. Dispatch:
///   GP + EI/UCB        posterior moments
///   GP + TS            negated joint posterior draw
///   GP + GreedyScore   negated posterior mean
///   OP + GreedyScore   raw network scores
///   OP + EI/UCB        network scores (no variance exists; noted on stderr)
///   NN + EI/UCB/Greedy predicted values with sigma = 0
/// Thompson sampling on a surrogate without a posterior throws
/// IncompatibleSurrogateAcquisition.
Eigen::VectorXd acquire(const Surrogate& surrogate,
                        const CandidateSet& candidates,
                        const AcquisitionSpec& spec, const Dataset& data,
                        RngStream& rng);

/// Indices of the g largest values; deterministic tie-break by index. g = 1
/// is the classic single arg-max suggestion.
GoodEnoughSet select_top_g(const Eigen::VectorXd& values,
                           const CandidateSet& candidates, int g);

}  // namespace opbo
#endif  // OPBO_ACQUISITION_HPP
