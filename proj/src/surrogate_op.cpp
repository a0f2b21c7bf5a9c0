#include "opbo/surrogate_op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "opbo/errors.hpp"
#include "opbo/rng.hpp"

namespace opbo {

namespace {

void validate_config(const TrainConfig& config, Eigen::Index n) {
  if (config.epochs < 1) {
    throw ConfigError("train config: epochs must be >= 1");
  }
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("train config: learning_rate must be > 0");
  }
  if (n >= 2 && config.batch_size < 2) {
    throw ConfigError("train config: batch_size must be >= 2");
  }
}

void check_permutation(const std::vector<int>& permutation, Eigen::Index n) {
  if (static_cast<Eigen::Index>(permutation.size()) != n) {
    throw LengthMismatch("permutation length does not match score count");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int p : permutation) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) {
      throw Error("permutation is not a bijection over the score indices");
    }
    seen[static_cast<std::size_t>(p)] = 1;
  }
}

bool params_finite(const MlpParams& p) {
  return p.w1.allFinite() && p.b1.allFinite() && p.w2.allFinite() &&
         p.b2.allFinite() && p.w_out.allFinite() && std::isfinite(p.b_out);
}

/// Shared epoch loop for the ranking loss and the squared-error baseline.
/// Returns the per-epoch mean loss per point. `targets` is raw objective
/// values in ranking mode and standardized values in regression mode.
std::vector<double> train_loop(MlpParams& params, const Eigen::MatrixXd& x_all,
                               const Eigen::VectorXd& targets,
                               const TrainConfig& config, RngStream& shuffle_rng,
                               bool ranking) {
  const Eigen::Index n = x_all.rows();
  AdamState adam(params);
  const AdamConfig adam_config{config.learning_rate, config.adam_beta1,
                               config.adam_beta2, config.adam_epsilon};
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));
  std::vector<int> order(static_cast<std::size_t>(n));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);
    double epoch_sum = 0.0;

    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index m = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd xc(m, x_all.cols());
      Eigen::VectorXd yc(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const int row = order[static_cast<std::size_t>(start + i)];
        xc.row(i) = x_all.row(row);
        yc(i) = targets(row);
      }

      MlpCache cache;
      const Eigen::VectorXd s = mlp_forward(params, xc, &cache);
      double loss = 0.0;
      Eigen::VectorXd dscore(m);
      if (ranking) {
        const std::vector<int> perm = ranking_permutation(-yc);
        loss = pl_loss(s, perm);
        dscore = pl_loss_gradient(s, perm) / static_cast<double>(m);
      } else {
        const Eigen::VectorXd residual = s - yc;
        loss = residual.squaredNorm();
        dscore = 2.0 * residual / static_cast<double>(m);
      }
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("training loss became non-finite", epoch,
                            config.learning_rate);
      }
      epoch_sum += loss;

      const MlpGrad grad = mlp_backward(params, xc, cache, dscore);
      adam_step(params, adam, grad, adam_config);
      if (!params_finite(params)) {
        throw NonFiniteLoss("network parameters became non-finite", epoch,
                            config.learning_rate);
      }
    }
    trace.push_back(epoch_sum / static_cast<double>(n));
  }
  return trace;
}

}  // namespace

std::vector<int> ranking_permutation(const Eigen::VectorXd& fitness) {
  std::vector<int> perm(static_cast<std::size_t>(fitness.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return fitness(a) > fitness(b); });
  return perm;
}

RankingBatch make_ranking_batch(const Eigen::MatrixXd& inputs,
                                const Eigen::VectorXd& objective_values) {
  if (inputs.rows() != objective_values.size()) {
    throw LengthMismatch("ranking batch: row count does not match value count");
  }
  RankingBatch batch;
  batch.inputs = inputs;
  batch.targets = -objective_values;
  batch.permutation = ranking_permutation(batch.targets);
  return batch;
}

double pl_loss(const Eigen::VectorXd& scores,
               const std::vector<int>& permutation) {
  const Eigen::Index n = scores.size();
  check_permutation(permutation, n);
  if (n <= 1) {
    return 0.0;
  }
  // Right-to-left suffix log-sum-exp with a running maximum; each position
  // contributes lse_i - s_perm(i) >= 0.
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  double loss = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double t = scores(permutation[static_cast<std::size_t>(i)]);
    if (t > run_max) {
      run_sum = run_sum * std::exp(run_max - t) + 1.0;
      run_max = t;
    } else {
      run_sum += std::exp(t - run_max);
    }
    loss += run_max + std::log(run_sum) - t;
  }
  return loss;
}

Eigen::VectorXd pl_loss_gradient(const Eigen::VectorXd& scores,
                                 const std::vector<int>& permutation) {
  const Eigen::Index n = scores.size();
  check_permutation(permutation, n);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  if (n <= 1) {
    return grad;
  }

  Eigen::VectorXd suffix_lse(n);
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double t = scores(permutation[static_cast<std::size_t>(i)]);
    if (t > run_max) {
      run_sum = run_sum * std::exp(run_max - t) + 1.0;
      run_max = t;
    } else {
      run_sum += std::exp(t - run_max);
    }
    suffix_lse(i) = run_max + std::log(run_sum);
  }

  // d/ds_perm(j) = exp(s_perm(j)) * sum_{i<=j} 1/Z_i - 1, with the inner sum
  // kept in log space as a streaming log-sum-exp of -lse_i.
  double prefix_max = -std::numeric_limits<double>::infinity();
  double prefix_sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = -suffix_lse(j);
    if (v > prefix_max) {
      prefix_sum = prefix_sum * std::exp(prefix_max - v) + 1.0;
      prefix_max = v;
    } else {
      prefix_sum += std::exp(v - prefix_max);
    }
    const double log_weight = prefix_max + std::log(prefix_sum);
    const int idx = permutation[static_cast<std::size_t>(j)];
    grad(idx) = std::exp(scores(idx) + log_weight) - 1.0;
  }
  return grad;
}

OpSurrogateModel op_xavier_init(int d, std::uint64_t seed) {
  OpSurrogateModel model;
  RngStream init_rng = RngStream(seed).fork("xavier");
  model.params = xavier_init(d, kHiddenWidth, init_rng);
  model.config.seed = seed;
  return model;
}

Eigen::VectorXd score(const OpSurrogateModel& model, const Eigen::MatrixXd& x) {
  return mlp_forward(model.params, x);
}

OpSurrogateModel fit(const Dataset& data, const TrainConfig& config,
                     std::uint64_t seed) {
  validate_config(config, data.size());
  OpSurrogateModel model = op_xavier_init(data.dimension(), seed);
  model.config = config;
  model.config.seed = seed;
  if (data.size() < 2) {
    return model;
  }
  RngStream shuffle_rng = RngStream(seed).fork("shuffle");
  model.epoch_loss = train_loop(model.params, data.points(), data.values(),
                                config, shuffle_rng, /*ranking=*/true);
  return model;
}

OpSurrogateModel refit_warm(const OpSurrogateModel& model, const Dataset& data,
                            const TrainConfig& config) {
  validate_config(config, data.size());
  if (!params_finite(model.params)) {
    throw NonFiniteLoss("warm-start parameters are non-finite", 0,
                        config.learning_rate);
  }
  OpSurrogateModel out = model;
  out.config = config;
  out.epoch_loss.clear();
  if (data.size() < 2) {
    return out;
  }
  RngStream shuffle_rng = RngStream(config.seed).fork("shuffle");
  out.epoch_loss = train_loop(out.params, data.points(), data.values(), config,
                              shuffle_rng, /*ranking=*/true);
  return out;
}

NnSurrogateModel fit_nn(const Dataset& data, const TrainConfig& config,
                        std::uint64_t seed) {
  validate_config(config, data.size());
  NnSurrogateModel model;
  model.params = op_xavier_init(data.dimension(), seed).params;
  model.config = config;
  model.config.seed = seed;
  const Eigen::Index n = data.size();
  if (n >= 1) {
    model.target_mean = data.values().mean();
    const double variance =
        (data.values().array() - model.target_mean).square().sum() /
        static_cast<double>(n);
    model.target_std = std::sqrt(variance);
    if (!(model.target_std > 0.0)) {
      model.target_std = 1.0;
    }
  }
  if (n < 2) {
    return model;
  }
  const Eigen::VectorXd standardized =
      (data.values().array() - model.target_mean) / model.target_std;
  RngStream shuffle_rng = RngStream(seed).fork("shuffle");
  model.epoch_loss = train_loop(model.params, data.points(), standardized,
                                config, shuffle_rng, /*ranking=*/false);
  return model;
}

Eigen::VectorXd predict_nn(const NnSurrogateModel& model,
                           const Eigen::MatrixXd& x) {
  Eigen::VectorXd s = mlp_forward(model.params, x);
  return (s.array() * model.target_std + model.target_mean).matrix();
}

namespace {

std::vector<double> matrix_to_flat(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      flat.push_back(m(i, j));
    }
  }
  return flat;
}

Eigen::MatrixXd flat_to_matrix(const nlohmann::json& j, const std::string& key,
                               Eigen::Index rows, Eigen::Index cols) {
  const auto flat = j.at(key).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw ConfigError("checkpoint: array \"" + key + "\" has wrong length");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
      m(i, j2) = flat[k++];
    }
  }
  return m;
}

}  // namespace

nlohmann::json op_model_to_json(const OpSurrogateModel& model) {
  nlohmann::json j;
  j["format"] = "op-surrogate-checkpoint-v1";
  j["input_dim"] = model.params.input_dimension();
  j["hidden_width"] = model.params.hidden_width();
  j["weights_1"] = matrix_to_flat(model.params.w1);
  j["bias_1"] = std::vector<double>(model.params.b1.data(),
                                    model.params.b1.data() + model.params.b1.size());
  j["weights_2"] = matrix_to_flat(model.params.w2);
  j["bias_2"] = std::vector<double>(model.params.b2.data(),
                                    model.params.b2.data() + model.params.b2.size());
  j["weights_out"] = std::vector<double>(
      model.params.w_out.data(),
      model.params.w_out.data() + model.params.w_out.size());
  j["bias_out"] = model.params.b_out;
  j["epoch_loss"] = model.epoch_loss;
  j["config"] = {{"epochs", model.config.epochs},
                 {"learning_rate", model.config.learning_rate},
                 {"batch_size", model.config.batch_size},
                 {"adam_beta1", model.config.adam_beta1},
                 {"adam_beta2", model.config.adam_beta2},
                 {"adam_epsilon", model.config.adam_epsilon},
                 {"seed", model.config.seed}};
  return j;
}

OpSurrogateModel op_model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "op-surrogate-checkpoint-v1") {
    throw ConfigError("checkpoint: unknown or missing format tag");
  }
  const auto d = j.at("input_dim").get<Eigen::Index>();
  const auto h = j.at("hidden_width").get<Eigen::Index>();
  if (d < 1 || h < 1) {
    throw ConfigError("checkpoint: invalid dimensions");
  }
  OpSurrogateModel model;
  model.params.w1 = flat_to_matrix(j, "weights_1", h, d);
  model.params.w2 = flat_to_matrix(j, "weights_2", h, h);
  const Eigen::MatrixXd b1 = flat_to_matrix(j, "bias_1", h, 1);
  const Eigen::MatrixXd b2 = flat_to_matrix(j, "bias_2", h, 1);
  const Eigen::MatrixXd wo = flat_to_matrix(j, "weights_out", h, 1);
  model.params.b1 = b1.col(0);
  model.params.b2 = b2.col(0);
  model.params.w_out = wo.col(0);
  model.params.b_out = j.at("bias_out").get<double>();
  model.epoch_loss = j.value("epoch_loss", std::vector<double>{});
  const nlohmann::json& c = j.at("config");
  model.config.epochs = c.at("epochs").get<int>();
  model.config.learning_rate = c.at("learning_rate").get<double>();
  model.config.batch_size = c.at("batch_size").get<int>();
  model.config.adam_beta1 = c.at("adam_beta1").get<double>();
  model.config.adam_beta2 = c.at("adam_beta2").get<double>();
  model.config.adam_epsilon = c.at("adam_epsilon").get<double>();
  model.config.seed = c.at("seed").get<std::uint64_t>();
  return model;
}

}  // namespace opbo
