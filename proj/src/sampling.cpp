#include "opbo/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

namespace opbo {

namespace {

void check_size(int d, int n) {
  if (d < 1 || n < 1) {
    std::ostringstream msg;
    msg << "sampling: need d >= 1 and N >= 1, got d=" << d << " N=" << n;
    throw InvalidSize(msg.str());
  }
}

/// LHS matrix filler shared by latin_hypercube and trust_region_candidates.
/// Column j draws its own permutation, then its own within-stratum offsets.
Eigen::MatrixXd lhs_unit(int d, int n, RngStream& rng) {
  Eigen::MatrixXd points(n, d);
  std::vector<int> strata(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    for (int i = 0; i < n; ++i) {
      points(i, j) = (static_cast<double>(strata[static_cast<std::size_t>(i)]) +
                      rng.uniform()) /
                     static_cast<double>(n);
    }
  }
  return points;
}

}  // namespace

std::string to_string(SamplingOrigin origin) {
  switch (origin) {
    case SamplingOrigin::Random: return "rs";
    case SamplingOrigin::LatinHypercube: return "lhs";
    case SamplingOrigin::Grid: return "grid";
    case SamplingOrigin::TrustRegionPerturbation: return "turbo";
  }
  throw Error("to_string: invalid SamplingOrigin");
}

SamplingOrigin sampling_origin_from_string(const std::string& s) {
  if (s == "rs") return SamplingOrigin::Random;
  if (s == "lhs") return SamplingOrigin::LatinHypercube;
  if (s == "grid") return SamplingOrigin::Grid;
  if (s == "turbo") return SamplingOrigin::TrustRegionPerturbation;
  throw ConfigError("unknown sampling strategy: \"" + s + "\"");
}

CandidateSet random_sampling(int d, int n, RngStream& rng) {
  check_size(d, n);
  Eigen::MatrixXd points(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      points(i, j) = rng.uniform();
    }
  }
  return CandidateSet{std::move(points), SamplingOrigin::Random, rng.root_seed()};
}

CandidateSet latin_hypercube(int d, int n, RngStream& rng) {
  check_size(d, n);
  return CandidateSet{lhs_unit(d, n, rng), SamplingOrigin::LatinHypercube,
                      rng.root_seed()};
}

CandidateSet grid_sampling(int d, int points_per_axis, long max_points) {
  if (d < 1 || points_per_axis < 2) {
    throw InvalidSize("grid_sampling: need d >= 1 and points_per_axis >= 2");
  }
  long total = 1;
  for (int j = 0; j < d; ++j) {
    if (total > max_points / points_per_axis) {
      std::ostringstream msg;
      msg << "grid_sampling: " << points_per_axis << "^" << d << " exceeds cap "
          << max_points;
      throw GridTooLarge(msg.str());
    }
    total *= points_per_axis;
  }
  Eigen::MatrixXd points(total, d);
  const double step = 1.0 / static_cast<double>(points_per_axis - 1);
  for (long i = 0; i < total; ++i) {
    long rest = i;
    for (int j = 0; j < d; ++j) {
      points(i, j) = static_cast<double>(rest % points_per_axis) * step;
      rest /= points_per_axis;
    }
  }
  return CandidateSet{std::move(points), SamplingOrigin::Grid, 0};
}

CandidateSet trust_region_candidates(const Eigen::VectorXd& center,
                                     double side_length, int d, int n,
                                     RngStream& rng) {
  check_size(d, n);
  if (!(side_length > 0.0 && side_length <= 1.6)) {
    std::ostringstream msg;
    msg << "trust_region_candidates: side length " << side_length
        << " outside (0, 1.6]";
    throw InvalidSideLength(msg.str());
  }
  if (center.size() != d) {
    throw DimensionMismatch("trust_region_candidates: center dimension mismatch");
  }
  for (int j = 0; j < d; ++j) {
    if (!(center(j) >= 0.0 && center(j) <= 1.0)) {
      throw OutOfBounds("trust_region_candidates: center outside unit cube", j);
    }
  }

  Eigen::MatrixXd base = lhs_unit(d, n, rng);
  Eigen::VectorXd lo(d);
  Eigen::VectorXd hi(d);
  for (int j = 0; j < d; ++j) {
    lo(j) = std::max(0.0, center(j) - side_length / 2.0);
    hi(j) = std::min(1.0, center(j) + side_length / 2.0);
  }
  Eigen::MatrixXd points(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      points(i, j) = lo(j) + base(i, j) * (hi(j) - lo(j));
    }
  }

  // In high dimension only ~20 coordinates deviate from the center per
  // candidate; the rest snap back. At least one must deviate.
  const double p_keep = std::min(20.0 / static_cast<double>(d), 1.0);
  for (int i = 0; i < n; ++i) {
    int deviating = 0;
    for (int j = 0; j < d; ++j) {
      if (rng.uniform() < p_keep) {
        ++deviating;
      } else {
        points(i, j) = center(j);
      }
    }
    if (deviating == 0) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
      points(i, j) = lo(j) + base(i, j) * (hi(j) - lo(j));
    }
  }
  return CandidateSet{std::move(points), SamplingOrigin::TrustRegionPerturbation,
                      rng.root_seed()};
}

}  // namespace opbo
