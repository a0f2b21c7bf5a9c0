#ifndef OPBO_DATASET_HPP
#define OPBO_DATASET_HPP

#include <Eigen/Core>

#include "opbo/errors.hpp"

namespace opbo {

/// Accumulated (point, observed value) pairs for one trial. Points are stored
/// in unit-cube coordinates; rows are in observation order.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(int dimension) : points_(0, dimension) {}
  Dataset(Eigen::MatrixXd points, Eigen::VectorXd values)
      : points_(std::move(points)), values_(std::move(values)) {
    if (points_.rows() != values_.size()) {
      throw DimensionMismatch("Dataset: points/values row count mismatch");
    }
  }

  void append(const Eigen::VectorXd& point, double value) {
    if (points_.rows() > 0 && point.size() != points_.cols()) {
      throw DimensionMismatch("Dataset::append: point dimension mismatch");
    }
    if (points_.rows() == 0 && points_.cols() == 0) {
      points_.resize(0, point.size());
    }
    points_.conservativeResize(points_.rows() + 1, Eigen::NoChange);
    values_.conservativeResize(values_.size() + 1);
    points_.row(points_.rows() - 1) = point.transpose();
    values_(values_.size() - 1) = value;
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index dimension() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& values() const { return values_; }

  /// Index of the smallest observed value (first on ties).
  Eigen::Index argmin() const {
    Eigen::Index best = 0;
    values_.minCoeff(&best);
    return best;
  }

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd values_;
};

}  // namespace opbo

#endif  // OPBO_DATASET_HPP
