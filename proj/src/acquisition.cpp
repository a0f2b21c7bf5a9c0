#include "opbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "opbo/errors.hpp"

namespace opbo {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::ExpectedImprovement: return "ei";
    case AcquisitionKind::UpperConfidenceBound: return "ucb";
    case AcquisitionKind::ThompsonSampling: return "ts";
    case AcquisitionKind::GreedyScore: return "greedy";
  }
  throw Error("to_string: invalid AcquisitionKind");
}

AcquisitionKind acquisition_kind_from_string(const std::string& s) {
  if (s == "ei") return AcquisitionKind::ExpectedImprovement;
  if (s == "ucb") return AcquisitionKind::UpperConfidenceBound;
  if (s == "ts") return AcquisitionKind::ThompsonSampling;
  if (s == "greedy") return AcquisitionKind::GreedyScore;
  throw ConfigError("unknown acquisition kind: \"" + s + "\"");
}

Eigen::VectorXd expected_improvement(const PosteriorPrediction& pred,
                                     double best_observed) {
  if (pred.mean.size() != pred.std.size()) {
    throw LengthMismatch("expected_improvement: mean/std length mismatch");
  }
  const Eigen::Index m = pred.mean.size();
  Eigen::VectorXd ei(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double improvement = best_observed - pred.mean(i);
    const double sigma = pred.std(i);
    if (sigma > 0.0) {
      const double u = improvement / sigma;
      ei(i) = improvement * normal_cdf(u) + sigma * normal_pdf(u);
    } else {
      ei(i) = std::max(improvement, 0.0);
    }
  }
  return ei;
}

Eigen::VectorXd upper_confidence_bound(const PosteriorPrediction& pred,
                                       double kappa) {
  if (pred.mean.size() != pred.std.size()) {
    throw LengthMismatch("upper_confidence_bound: mean/std length mismatch");
  }
  if (!(kappa >= 0.0)) {
    throw ConfigError("upper_confidence_bound: kappa must be >= 0");
  }
  return -(pred.mean - kappa * pred.std);
}

namespace {

Eigen::VectorXd acquire_gp(const GpModel& model, const CandidateSet& candidates,
                           const AcquisitionSpec& spec, const Dataset& data,
                           RngStream& rng) {
  switch (spec.kind) {
    case AcquisitionKind::ThompsonSampling:
      return -thompson_sample(model, candidates.points, rng);
    case AcquisitionKind::ExpectedImprovement: {
      if (data.size() < 1) {
        throw InvalidSize("acquire: expected improvement needs an observation");
      }
      return expected_improvement(posterior(model, candidates.points),
                                  data.values().minCoeff());
    }
    case AcquisitionKind::UpperConfidenceBound:
      return upper_confidence_bound(posterior(model, candidates.points),
                                    spec.kappa);
    case AcquisitionKind::GreedyScore:
      return -posterior(model, candidates.points).mean;
  }
  throw Error("acquire: invalid acquisition kind");
}

Eigen::VectorXd acquire_op(const OpSurrogateModel& model,
                           const CandidateSet& candidates,
                           const AcquisitionSpec& spec) {
  if (spec.kind == AcquisitionKind::ThompsonSampling) {
    throw IncompatibleSurrogateAcquisition(
        "acquire: Thompson sampling needs a posterior; the order-preserving "
        "surrogate has none");
  }
  if (spec.kind != AcquisitionKind::GreedyScore) {
    std::cerr << "acquire: " << to_string(spec.kind)
              << " on the order-preserving surrogate has no variance; using "
                 "the greedy score ordering\n";
  }
  return score(model, candidates.points);
}

Eigen::VectorXd acquire_nn(const NnSurrogateModel& model,
                           const CandidateSet& candidates,
                           const AcquisitionSpec& spec, const Dataset& data) {
  if (spec.kind == AcquisitionKind::ThompsonSampling) {
    throw IncompatibleSurrogateAcquisition(
        "acquire: Thompson sampling needs a posterior; the regression "
        "baseline has none");
  }
  const Eigen::VectorXd mean = predict_nn(model, candidates.points);
  if (spec.kind == AcquisitionKind::ExpectedImprovement) {
    if (data.size() < 1) {
      throw InvalidSize("acquire: expected improvement needs an observation");
    }
    PosteriorPrediction pred{mean, Eigen::VectorXd::Zero(mean.size())};
    return expected_improvement(pred, data.values().minCoeff());
  }
  return -mean;
}

}  // namespace

Eigen::VectorXd acquire(const Surrogate& surrogate,
                        const CandidateSet& candidates,
                        const AcquisitionSpec& spec, const Dataset& data,
                        RngStream& rng) {
  return std::visit(
      [&](const auto& model) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, GpModel>) {
          if (candidates.points.cols() != model.train_inputs.cols()) {
            throw DimensionMismatch("acquire: candidate dimension mismatch");
          }
          return acquire_gp(model, candidates, spec, data, rng);
        } else if constexpr (std::is_same_v<T, OpSurrogateModel>) {
          if (candidates.points.cols() != model.params.input_dimension()) {
            throw DimensionMismatch("acquire: candidate dimension mismatch");
          }
          return acquire_op(model, candidates, spec);
        } else {
          if (candidates.points.cols() != model.params.input_dimension()) {
            throw DimensionMismatch("acquire: candidate dimension mismatch");
          }
          return acquire_nn(model, candidates, spec, data);
        }
      },
      surrogate);
}

GoodEnoughSet select_top_g(const Eigen::VectorXd& values,
                           const CandidateSet& candidates, int g) {
  const Eigen::Index m = values.size();
  if (candidates.points.rows() != m) {
    throw LengthMismatch("select_top_g: value count != candidate count");
  }
  if (g < 1 || g > m) {
    throw InvalidG("select_top_g: need 1 <= g <= candidate count");
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values(a) > values(b); });
  GoodEnoughSet out;
  out.indices.assign(order.begin(), order.begin() + g);
  out.points.resize(g, candidates.points.cols());
  out.acquisition_values.resize(g);
  for (int i = 0; i < g; ++i) {
    out.points.row(i) = candidates.points.row(out.indices[static_cast<std::size_t>(i)]);
    out.acquisition_values(i) = values(out.indices[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace opbo
