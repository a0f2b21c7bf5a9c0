#ifndef OPBO_SURROGATE_OP_HPP
#define OPBO_SURROGATE_OP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opbo/dataset.hpp"
#include "opbo/mlp.hpp"

namespace opbo {

/// Hidden width of the scoring network, fixed for all surrogates in this
/// toolkit.
inline constexpr int kHiddenWidth = 128;

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 0.01;
  int batch_size = 2000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
};

/// Scoring network trained to preserve the order of observed objective
/// values. Higher score means better (lower) objective.
struct OpSurrogateModel {
  MlpParams params;
  TrainConfig config;
  std::vector<double> epoch_loss;
};

/// Same network trained as a plain regressor under squared error on
/// standardized targets. predict_nn de-standardizes, so outputs are in
/// objective units.
struct NnSurrogateModel {
  MlpParams params;
  double target_mean = 0.0;
  double target_std = 1.0;
  TrainConfig config;
  std::vector<double> epoch_loss;
};

/// One ranking chunk: fitness = -y so descending fitness puts the best
/// (lowest) objective first. permutation[i] is the index of the i-th ranked
/// element; ties keep original index order.
struct RankingBatch {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  std::vector<int> permutation;
};

/// Argsort of fitness values in descending order, stable in the original
/// index on ties.
std::vector<int> ranking_permutation(const Eigen::VectorXd& fitness);

RankingBatch make_ranking_batch(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& objective_values);

/// Listwise negative log-likelihood of the permutation under the scores:
/// L = -sum_i [ s_perm(i) - log sum_{k>=i} exp(s_perm(k)) ].
/// n = 1 returns exactly 0. Evaluated with suffix log-sum-exp so large score
/// ranges and batches up to thousands of elements stay finite.
double pl_loss(const Eigen::VectorXd& scores, const std::vector<int>& permutation);

/// Analytic gradient of pl_loss with respect to each score, returned in
/// original index order. Entries sum to 0.
Eigen::VectorXd pl_loss_gradient(const Eigen::VectorXd& scores,
                                 const std::vector<int>& permutation);

/// Fresh network for d-dimensional inputs; deterministic in the seed.
OpSurrogateModel op_xavier_init(int d, std::uint64_t seed);

Eigen::VectorXd score(const OpSurrogateModel& model, const Eigen::MatrixXd& x);

/// Cold-start training: Xavier init from the seed, then `epochs` passes of
/// shuffle / chunk / rank / Adam step on the chunk-mean gradient. Datasets
/// with fewer than 2 points return the initialized model with an empty loss
/// trace. Throws NonFiniteLoss when training diverges.
OpSurrogateModel fit(const Dataset& data, const TrainConfig& config,
                     std::uint64_t seed);

/// As fit but starting from the given parameters with fresh Adam moments.
/// The shuffle stream derives from config.seed. Non-finite input parameters
/// throw NonFiniteLoss immediately; an empty dataset returns the model
/// unchanged.
OpSurrogateModel refit_warm(const OpSurrogateModel& model, const Dataset& data,
                            const TrainConfig& config);

/// Regression baseline: identical architecture, init, shuffling, and Adam
/// schedule, but squared-error loss on standardized targets.
NnSurrogateModel fit_nn(const Dataset& data, const TrainConfig& config,
                        std::uint64_t seed);

Eigen::VectorXd predict_nn(const NnSurrogateModel& model,
                           const Eigen::MatrixXd& x);

/// Checkpoint round-trip: flat object of named arrays plus the config.
nlohmann::json op_model_to_json(const OpSurrogateModel& model);
OpSurrogateModel op_model_from_json(const nlohmann::json& j);

}  // namespace opbo
#endif  // OPBO_SURROGATE_OP_HPP
