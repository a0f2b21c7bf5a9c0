#include "opbo/mlp.hpp"

#include <cmath>

namespace opbo {

namespace {

void fill_xavier(Eigen::Ref<Eigen::MatrixXd> w, int fan_in, int fan_out,
                 RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      w(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
}

}  // namespace

MlpParams xavier_init(int input_dim, int hidden_width, RngStream& rng) {
  if (input_dim < 1 || hidden_width < 1) {
    throw InvalidSize("xavier_init: need input_dim >= 1 and hidden_width >= 1");
  }
  MlpParams p;
  p.w1.resize(hidden_width, input_dim);
  p.w2.resize(hidden_width, hidden_width);
  p.w_out.resize(hidden_width);
  fill_xavier(p.w1, input_dim, hidden_width, rng);
  fill_xavier(p.w2, hidden_width, hidden_width, rng);
  fill_xavier(p.w_out, hidden_width, 1, rng);
  p.b1 = Eigen::VectorXd::Zero(hidden_width);
  p.b2 = Eigen::VectorXd::Zero(hidden_width);
  p.b_out = 0.0;
  return p;
}

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x,
                            MlpCache* cache) {
  if (x.cols() != params.w1.cols()) {
    throw DimensionMismatch("mlp_forward: input width does not match network");
  }
  Eigen::MatrixXd a1 =
      ((x * params.w1.transpose()).rowwise() + params.b1.transpose())
          .cwiseMax(0.0);
  Eigen::MatrixXd a2 =
      ((a1 * params.w2.transpose()).rowwise() + params.b2.transpose())
          .cwiseMax(0.0);
  Eigen::VectorXd score = (a2 * params.w_out).array() + params.b_out;
  if (cache != nullptr) {
    cache->a1 = std::move(a1);
    cache->a2 = std::move(a2);
  }
  return score;
}

MlpGrad MlpGrad::zeros_like(const MlpParams& params) {
  MlpGrad g;
  g.w1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(params.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(params.b2.size());
  g.w_out = Eigen::VectorXd::Zero(params.w_out.size());
  g.b_out = 0.0;
  return g;
}

void MlpGrad::accumulate(const MlpGrad& other) {
  w1 += other.w1;
  b1 += other.b1;
  w2 += other.w2;
  b2 += other.b2;
  w_out += other.w_out;
  b_out += other.b_out;
}

void MlpGrad::scale(double factor) {
  w1 *= factor;
  b1 *= factor;
  w2 *= factor;
  b2 *= factor;
  w_out *= factor;
  b_out *= factor;
}

MlpGrad mlp_backward(const MlpParams& params, const Eigen::MatrixXd& x,
                     const MlpCache& cache, const Eigen::VectorXd& dscore) {
  if (cache.a1.rows() != x.rows() || dscore.size() != x.rows()) {
    throw DimensionMismatch("mlp_backward: batch size mismatch with cache");
  }
  MlpGrad g;
  g.w_out = cache.a2.transpose() * dscore;
  g.b_out = dscore.sum();

  // ReLU mask: a > 0 iff pre-activation > 0.
  Eigen::MatrixXd dz2 = dscore * params.w_out.transpose();
  dz2 = (cache.a2.array() > 0.0).select(dz2, 0.0);
  g.w2 = dz2.transpose() * cache.a1;
  g.b2 = dz2.colwise().sum().transpose();

  Eigen::MatrixXd dz1 = dz2 * params.w2;
  dz1 = (cache.a1.array() > 0.0).select(dz1, 0.0);
  g.w1 = dz1.transpose() * x;
  g.b1 = dz1.colwise().sum().transpose();
  return g;
}

namespace {

void adam_update(Eigen::Ref<Eigen::MatrixXd> theta, Eigen::Ref<Eigen::MatrixXd> m,
                 Eigen::Ref<Eigen::MatrixXd> v, const Eigen::MatrixXd& grad,
                 const AdamConfig& c, double bc1, double bc2) {
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v.array().matrix() +
      (1.0 - c.beta2) * grad.array().square().matrix();
  theta.array() -=
      c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}

}  // namespace

void adam_step(MlpParams& params, AdamState& state, const MlpGrad& grad,
               const AdamConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  adam_update(params.w1, state.m.w1, state.v.w1, grad.w1, config, bc1, bc2);
  adam_update(params.w2, state.m.w2, state.v.w2, grad.w2, config, bc1, bc2);

  auto vec_update = [&](Eigen::VectorXd& theta, Eigen::VectorXd& m,
                        Eigen::VectorXd& v, const Eigen::VectorXd& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v.array().matrix() +
        (1.0 - config.beta2) * g.array().square().matrix();
    theta.array() -=
        config.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
  };
  vec_update(params.b1, state.m.b1, state.v.b1, grad.b1);
  vec_update(params.b2, state.m.b2, state.v.b2, grad.b2);
  vec_update(params.w_out, state.m.w_out, state.v.w_out, grad.w_out);

  state.m.b_out = config.beta1 * state.m.b_out + (1.0 - config.beta1) * grad.b_out;
  state.v.b_out =
      config.beta2 * state.v.b_out + (1.0 - config.beta2) * grad.b_out * grad.b_out;
  params.b_out -= config.lr * (state.m.b_out / bc1) /
                  (std::sqrt(state.v.b_out / bc2) + config.eps);
}

}  // namespace opbo
