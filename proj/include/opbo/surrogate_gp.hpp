#ifndef OPBO_SURROGATE_GP_HPP
#define OPBO_SURROGATE_GP_HPP

#include <Eigen/Dense>

#include "opbo/dataset.hpp"
#include "opbo/rng.hpp"

namespace opbo {

/// Exact GP with an isotropic squared-exponential kernel, fit on standardized
/// targets. Immutable once fitted; posterior and thompson_sample are
/// read-only.
struct GpModel {
  Eigen::MatrixXd train_inputs;
  Eigen::VectorXd train_targets_standardized;
  double target_mean = 0.0;
  double target_std = 1.0;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  double log_marginal_likelihood = 0.0;
  Eigen::MatrixXd cholesky_lower;  // L with L L^T = K + noise_variance I
  Eigen::VectorXd solve_vector;    // alpha = (K + noise_variance I)^{-1} z
};

struct GpFitConfig {
  int max_points = 2000;
  /// When true the noise variance is searched alongside lengthscale and
  /// signal variance instead of staying fixed at 1e-6. Used for objectives
  /// with observation noise.
  bool learn_noise = false;
};

struct PosteriorPrediction {
  Eigen::VectorXd mean;  // de-standardized, objective units
  Eigen::VectorXd std;   // >= 0 elementwise
};

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                 double lengthscale, double signal_variance);

/// Standardizes targets (constant targets force target_std = 1), selects
/// hyperparameters by log-marginal-likelihood over a 25x25 log grid centered
/// at the median pairwise distance, refines with 20 coordinate-descent steps,
/// then factorizes once. Cholesky failures escalate the noise floor
/// (+1e-6, +1e-4, +1e-2) before throwing SingularKernel.
GpModel fit_gp(const Dataset& data, const GpFitConfig& config = {});

/// Posterior mean and standard deviation at the m query rows. Variances are
/// of the latent function (no observation noise) and clamp at 0. m = 0 yields
/// empty vectors.
PosteriorPrediction posterior(const GpModel& model, const Eigen::MatrixXd& x);

/// One joint posterior draw over the query rows: mu + L_post z with L_post
/// the Cholesky factor of the posterior covariance + 1e-8 I. De-standardized.
Eigen::VectorXd thompson_sample(const GpModel& model, const Eigen::MatrixXd& x,
                                RngStream& rng);

/// Log marginal likelihood of standardized targets z under the SE kernel,
/// computed via Cholesky. Exposed so tests can pin it against a dense-inverse
/// evaluation.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& z, double lengthscale,
                                  double signal_variance,
                                  double noise_variance);

}  // namespace opbo
#endif  // OPBO_SURROGATE_GP_HPP
