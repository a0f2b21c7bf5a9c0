#ifndef OPBO_MLP_HPP
#define OPBO_MLP_HPP

#include <Eigen/Dense>

#include "opbo/errors.hpp"
#include "opbo/rng.hpp"

namespace opbo {

/// Fully connected scorer: two ReLU hidden layers and a scalar linear head.
/// Weight matrices are stored row-as-output-unit, so layer outputs are
/// x * W^T + b.
struct MlpParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // hidden x hidden
  Eigen::VectorXd b2;  // hidden
  Eigen::VectorXd w_out;  // hidden
  double b_out = 0.0;

  int input_dimension() const { return static_cast<int>(w1.cols()); }
  int hidden_width() const { return static_cast<int>(w1.rows()); }
};

/// Xavier-uniform initialization: each weight uniform in
/// [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))], biases zero.
/// Draw order is fixed (w1 row-major, then w2 row-major, then w_out) so a
/// given stream always produces the same network.
MlpParams xavier_init(int input_dim, int hidden_width, RngStream& rng);

/// Post-activation values kept from a forward pass for use in backward.
struct MlpCache {
  Eigen::MatrixXd a1;  // n x hidden
  Eigen::MatrixXd a2;  // n x hidden
};

/// Scores a batch of points (rows of x). When cache is non-null the hidden
/// activations are stored for a subsequent mlp_backward call.
Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            MlpCache* cache = nullptr);

/// Parameter-shaped gradient container.
struct MlpGrad {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::VectorXd w_out;
  double b_out = 0.0;

  static MlpGrad zeros_like(const MlpParams& params);
  void accumulate(const MlpGrad& other);
  void scale(double factor);
};

/// Backpropagates d(loss)/d(score) through the network. x and cache must come
/// from the same mlp_forward call.
MlpGrad mlp_backward(const MlpParams& params, const Eigen::MatrixXd& x,
                     const MlpCache& cache, const Eigen::VectorXd& dscore);

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Per-tensor first and second moment estimates plus the step counter.
struct AdamState {
  MlpGrad m;
  MlpGrad v;
  long step = 0;

  explicit AdamState(const MlpParams& params)
      : m(MlpGrad::zeros_like(params)), v(MlpGrad::zeros_like(params)) {}
};

/// One Adam update with bias correction.
void adam_step(MlpParams& params, AdamState& state, const MlpGrad& grad,
               const AdamConfig& config);

}  // namespace opbo
#endif  // OPBO_MLP_HPP
