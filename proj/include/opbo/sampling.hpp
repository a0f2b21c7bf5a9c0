#ifndef OPBO_SAMPLING_HPP
#define OPBO_SAMPLING_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "opbo/errors.hpp"
#include "opbo/rng.hpp"

namespace opbo {

enum class SamplingOrigin { Random, LatinHypercube, Grid, TrustRegionPerturbation };

std::string to_string(SamplingOrigin origin);                 // "rs", "lhs", "grid", "turbo"
SamplingOrigin sampling_origin_from_string(const std::string& s);

/// A batch of candidate points on the unit cube, tagged with how it was
/// generated and the root seed of the stream that produced it.
struct CandidateSet {
  Eigen::MatrixXd points;  // N x d, every coordinate in [0, 1]
  SamplingOrigin origin = SamplingOrigin::Random;
  std::uint64_t seed = 0;
};

/// N i.i.d. uniform points on [0,1]^d.
CandidateSet random_sampling(int d, int n, RngStream& rng);

/// Stratified design: per dimension, exactly one point in each of the N
/// equal-width strata, with an independent random permutation assigning
/// strata to points and uniform placement within each stratum.
CandidateSet latin_hypercube(int d, int n, RngStream& rng);

/// Full factorial grid with equally spaced points including both endpoints.
/// points_per_axis^d must not exceed max_points.
CandidateSet grid_sampling(int d, int points_per_axis,
                           long max_points = 1000000);

/// LHS inside the box center +- side_length/2 clipped to the unit cube, then
/// per-coordinate masking: each coordinate deviates from the center with
/// probability min(20/d, 1), and at least one coordinate always deviates.
CandidateSet trust_region_candidates(const Eigen::VectorXd& center,
                                     double side_length, int d, int n,
                                     RngStream& rng);

}  // namespace opbo

#endif  // OPBO_SAMPLING_HPP
