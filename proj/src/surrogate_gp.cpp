#include "opbo/surrogate_gp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <vector>

#include "opbo/errors.hpp"

namespace opbo {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kFixedNoise = 1e-6;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  return d2.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_from_d2(const Eigen::MatrixXd& d2, double ell,
                               double sf2) {
  return sf2 * (-d2 / (2.0 * ell * ell)).array().exp().matrix();
}

double median_pairwise_distance(const Eigen::MatrixXd& d2) {
  const Eigen::Index n = d2.rows();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back(std::sqrt(d2(i, j)));
    }
  }
  if (dist.empty()) {
    return 1.0;
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid),
                   dist.end());
  const double med = dist[mid];
  return med > 0.0 ? med : 1.0;
}

/// Log marginal likelihood through a Cholesky factorization; nullopt when the
/// factorization fails.
std::optional<double> lml_cholesky(const Eigen::MatrixXd& d2,
                                   const Eigen::VectorXd& z, double ell,
                                   double sf2, double sn2) {
  Eigen::MatrixXd k = kernel_from_d2(d2, ell, sf2);
  k.diagonal().array() += sn2;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    return std::nullopt;
  }
  const Eigen::VectorXd alpha = llt.solve(z);
  const double logdet =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(z.size());
  return -0.5 * z.dot(alpha) - 0.5 * logdet - 0.5 * n * kLogTwoPi;
}

/// Rotated form of one lengthscale's correlation matrix R = Q T Q^T. Because
/// K + sn2 I = sf2 (R + c I) with c = sn2/sf2, every (sf2, sn2) pair costs
/// only an O(n) tridiagonal LDL^T sweep once T and Q^T z are in hand.
struct TridiagonalFamily {
  Eigen::VectorXd diag;
  Eigen::VectorXd subdiag;
  Eigen::VectorXd rotated_z;
};

TridiagonalFamily tridiagonalize_correlation(const Eigen::MatrixXd& d2,
                                             const Eigen::VectorXd& z,
                                             double ell) {
  const Eigen::MatrixXd r = kernel_from_d2(d2, ell, 1.0);
  TridiagonalFamily fam;
  if (r.rows() == 1) {
    fam.diag = Eigen::VectorXd::Constant(1, r(0, 0));
    fam.subdiag = Eigen::VectorXd();
    fam.rotated_z = z;
    return fam;
  }
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(r);
  fam.diag = tri.diagonal();
  fam.subdiag = tri.subDiagonal();
  fam.rotated_z = tri.matrixQ().adjoint() * z;
  return fam;
}

/// quad = z^T (T + cI)^{-1} z and logdet(T + cI) via the LDL^T pivot
/// recurrence. Returns false when a pivot is nonpositive (shifted matrix not
/// numerically SPD).
bool tridiagonal_stats(const TridiagonalFamily& fam, double c, double* quad,
                       double* logdet) {
  const Eigen::Index n = fam.diag.size();
  double prev_d = fam.diag(0) + c;
  if (!(prev_d > 0.0)) {
    return false;
  }
  double prev_v = fam.rotated_z(0);
  double q = prev_v * prev_v / prev_d;
  double ld = std::log(prev_d);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double b = fam.subdiag(i - 1);
    const double l = b / prev_d;
    const double di = fam.diag(i) + c - b * l;
    if (!(di > 0.0)) {
      return false;
    }
    const double vi = fam.rotated_z(i) - l * prev_v;
    q += vi * vi / di;
    ld += std::log(di);
    prev_d = di;
    prev_v = vi;
  }
  *quad = q;
  *logdet = ld;
  return true;
}

double lml_from_stats(double quad, double logdet, double sf2, double n) {
  return -0.5 * quad / sf2 - 0.5 * (n * std::log(sf2) + logdet) -
         0.5 * n * kLogTwoPi;
}

struct HyperPoint {
  double log_ell;
  double log_sf2;
  double log_sn2;
  double lml = -std::numeric_limits<double>::infinity();
};

}  // namespace

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                 double lengthscale, double signal_variance) {
  if (x.size() != x_prime.size()) {
    throw DimensionMismatch("se_kernel: input lengths differ");
  }
  if (!(lengthscale > 0.0)) {
    throw InvalidSize("se_kernel: lengthscale must be > 0");
  }
  const double d2 = (x - x_prime).squaredNorm();
  return signal_variance * std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& z, double lengthscale,
                                  double signal_variance,
                                  double noise_variance) {
  if (x.rows() != z.size()) {
    throw LengthMismatch("gp_log_marginal_likelihood: rows != targets");
  }
  const Eigen::MatrixXd d2 = squared_distances(x, x);
  const auto lml =
      lml_cholesky(d2, z, lengthscale, signal_variance, noise_variance);
  if (!lml) {
    throw SingularKernel("gp_log_marginal_likelihood: factorization failed");
  }
  return *lml;
}

GpModel fit_gp(const Dataset& data, const GpFitConfig& config) {
  const Eigen::Index n = data.size();
  if (n < 1) {
    throw InvalidSize("fit_gp: dataset is empty");
  }
  if (n > config.max_points) {
    throw TooManyPoints("fit_gp: dataset exceeds the configured point cap");
  }

  GpModel model;
  model.train_inputs = data.points();
  model.target_mean = data.values().mean();
  const double variance =
      (data.values().array() - model.target_mean).square().sum() /
      static_cast<double>(n);
  model.target_std = std::sqrt(variance);
  if (!(model.target_std > 0.0)) {
    std::cerr << "fit_gp: constant targets, forcing target_std = 1\n";
    model.target_std = 1.0;
  }
  model.train_targets_standardized =
      ((data.values().array() - model.target_mean) / model.target_std).matrix();
  const Eigen::VectorXd& z = model.train_targets_standardized;

  const Eigen::MatrixXd d2 = squared_distances(model.train_inputs,
                                               model.train_inputs);
  const double med = median_pairwise_distance(d2);

  // 25 x 25 log grid: lengthscale spans 1.5 decades around the median
  // heuristic, signal variance 2 decades around 1 (targets are standardized).
  // With learned noise a third 25-point axis over [1e-6, 1] joins the scan.
  constexpr int kGridPoints = 25;
  const double ell_center = std::log10(med);
  const double ell_lo = ell_center - 1.5;
  const double ell_step = 3.0 / (kGridPoints - 1);
  const double sf2_lo = -2.0;
  const double sf2_step = 4.0 / (kGridPoints - 1);
  const double sn2_lo = -6.0;
  const double sn2_step = 6.0 / (kGridPoints - 1);
  const int noise_points = config.learn_noise ? kGridPoints : 1;

  HyperPoint best;
  for (int ei = 0; ei < kGridPoints; ++ei) {
    const double log_ell = ell_lo + ell_step * ei;
    const double ell = std::pow(10.0, log_ell);
    const TridiagonalFamily fam = tridiagonalize_correlation(d2, z, ell);
    for (int si = 0; si < kGridPoints; ++si) {
      const double log_sf2 = sf2_lo + sf2_step * si;
      const double sf2 = std::pow(10.0, log_sf2);
      for (int ni = 0; ni < noise_points; ++ni) {
        const double log_sn2 =
            config.learn_noise ? sn2_lo + sn2_step * ni : std::log10(kFixedNoise);
        const double sn2 = std::pow(10.0, log_sn2);
        double quad = 0.0;
        double logdet = 0.0;
        if (!tridiagonal_stats(fam, sn2 / sf2, &quad, &logdet)) {
          continue;
        }
        const double lml =
            lml_from_stats(quad, logdet, sf2, static_cast<double>(n));
        if (lml > best.lml) {
          best = HyperPoint{log_ell, log_sf2, log_sn2, lml};
        }
      }
    }
  }
  if (!std::isfinite(best.lml)) {
    throw SingularKernel("fit_gp: no feasible hyperparameters on the grid");
  }

  // Coordinate descent in log10 space, one axis per step, halving an axis
  // step size whenever neither neighbor improves.
  const int coords = config.learn_noise ? 3 : 2;
  double point[3] = {best.log_ell, best.log_sf2, best.log_sn2};
  double step[3] = {ell_step, sf2_step, sn2_step};
  double current = best.lml;
  auto eval_at = [&](const double p[3]) -> double {
    const auto lml = lml_cholesky(d2, z, std::pow(10.0, p[0]),
                                  std::pow(10.0, p[1]), std::pow(10.0, p[2]));
    return lml ? *lml : -std::numeric_limits<double>::infinity();
  };
  // The grid value came from the tridiagonal route; re-evaluate through the
  // Cholesky route so all coordinate-descent comparisons share one code path.
  current = eval_at(point);
  for (int iter = 0; iter < 20; ++iter) {
    const int c = iter % coords;
    double lo_p[3] = {point[0], point[1], point[2]};
    double hi_p[3] = {point[0], point[1], point[2]};
    lo_p[c] -= step[c];
    hi_p[c] += step[c];
    const double lo_v = eval_at(lo_p);
    const double hi_v = eval_at(hi_p);
    if (lo_v > current && lo_v >= hi_v) {
      point[c] = lo_p[c];
      current = lo_v;
    } else if (hi_v > current) {
      point[c] = hi_p[c];
      current = hi_v;
    } else {
      step[c] *= 0.5;
    }
  }

  model.lengthscale = std::pow(10.0, point[0]);
  model.signal_variance = std::pow(10.0, point[1]);
  model.noise_variance =
      config.learn_noise ? std::pow(10.0, point[2]) : kFixedNoise;

  // Final factorization; escalation folds the jitter into the stored noise so
  // L L^T always reconstructs K + noise_variance I exactly as recorded.
  const double jitters[] = {0.0, 1e-6, 1e-4, 1e-2};
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool ok = false;
  for (double jitter : jitters) {
    Eigen::MatrixXd k =
        kernel_from_d2(d2, model.lengthscale, model.signal_variance);
    k.diagonal().array() += model.noise_variance + jitter;
    llt.compute(k);
    if (llt.info() == Eigen::Success) {
      model.noise_variance += jitter;
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw SingularKernel("fit_gp: Cholesky failed after jitter escalation");
  }
  model.cholesky_lower = llt.matrixL();
  model.solve_vector = llt.solve(z);
  const double logdet =
      2.0 * model.cholesky_lower.diagonal().array().log().sum();
  model.log_marginal_likelihood = -0.5 * z.dot(model.solve_vector) -
                                  0.5 * logdet -
                                  0.5 * static_cast<double>(n) * kLogTwoPi;
  return model;
}

PosteriorPrediction posterior(const GpModel& model, const Eigen::MatrixXd& x) {
  PosteriorPrediction pred;
  if (x.rows() == 0) {
    pred.mean = Eigen::VectorXd();
    pred.std = Eigen::VectorXd();
    return pred;
  }
  if (x.cols() != model.train_inputs.cols()) {
    throw DimensionMismatch("posterior: query dimension mismatch");
  }
  const Eigen::MatrixXd d2 = squared_distances(model.train_inputs, x);
  const Eigen::MatrixXd k_star =
      kernel_from_d2(d2, model.lengthscale, model.signal_variance);
  pred.mean = ((k_star.transpose() * model.solve_vector).array() *
                   model.target_std +
               model.target_mean)
                  .matrix();
  const Eigen::MatrixXd v = model.cholesky_lower.triangularView<Eigen::Lower>()
                                .solve(k_star);
  Eigen::VectorXd var =
      (model.signal_variance - v.colwise().squaredNorm().transpose().array())
          .max(0.0)
          .matrix();
  pred.std = (var.array().sqrt() * model.target_std).matrix();
  return pred;
}

Eigen::VectorXd thompson_sample(const GpModel& model, const Eigen::MatrixXd& x,
                                RngStream& rng) {
  const Eigen::Index m = x.rows();
  if (m == 0) {
    return Eigen::VectorXd();
  }
  if (m > 20000) {
    throw InvalidSize("thompson_sample: candidate count exceeds 20000");
  }
  if (x.cols() != model.train_inputs.cols()) {
    throw DimensionMismatch("thompson_sample: query dimension mismatch");
  }
  const Eigen::MatrixXd d2_cross = squared_distances(model.train_inputs, x);
  const Eigen::MatrixXd k_star =
      kernel_from_d2(d2_cross, model.lengthscale, model.signal_variance);
  const Eigen::VectorXd mean_std = k_star.transpose() * model.solve_vector;
  const Eigen::MatrixXd v = model.cholesky_lower.triangularView<Eigen::Lower>()
                                .solve(k_star);
  Eigen::MatrixXd cov =
      kernel_from_d2(squared_distances(x, x), model.lengthscale,
                     model.signal_variance) -
      v.transpose() * v;
  cov.diagonal().array() += 1e-8;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SampleCovarianceSingular(
        "thompson_sample: posterior covariance factorization failed");
  }
  Eigen::VectorXd zdraw(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    zdraw(i) = rng.normal();
  }
  const Eigen::VectorXd sample_std = mean_std + llt.matrixL() * zdraw;
  return (sample_std.array() * model.target_std + model.target_mean).matrix();
}

}  // namespace opbo
