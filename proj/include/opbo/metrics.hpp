#ifndef OPBO_METRICS_HPP
#define OPBO_METRICS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace opbo {

enum class OpcType { Flat, UShaped, Neutral, Bell, Steep, Degenerate };

std::string to_string(OpcType type);

/// Ordered performance curve: performance values sorted ascending, both axes
/// normalized to [0,1]. signed_area is the trapezoid integral of (y - x),
/// negative when the curve bows below the diagonal.
struct OpcCurve {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  OpcType type = OpcType::Neutral;
  double signed_area = 0.0;
};

/// Spearman rank correlation. Tie-free inputs use the exact rank-difference
/// form 1 - 6 sum d^2 / (n(n^2-1)); ties fall back to average ranks followed
/// by Pearson correlation of the rank vectors.
double spearman_rho(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Average ranks (1-based); tied values share the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& v);

/// Sorts values ascending and normalizes both axes. Degenerate (all equal)
/// curves get y = 0 and type Degenerate; curves with at least 10 points are
/// classified, shorter non-degenerate curves default to Neutral.
OpcCurve build_opc(const Eigen::VectorXd& values);

/// Five-way shape classification by the signed area and the sign pattern of
/// the residual y - x: within +/-0.05 of the diagonal everywhere is Neutral;
/// only below is Flat; only above is Steep; below-then-above is UShaped;
/// above-then-below is Bell. Requires >= 10 points.
OpcType classify_opc(const OpcCurve& curve);

/// Per-problem medians ranked within each row (1 = lowest median, ties get
/// average ranks), then averaged across problems per algorithm.
struct RankTable {
  std::vector<std::string> problems;
  std::vector<std::string> algorithms;
  Eigen::MatrixXd medians;     // problems x algorithms
  Eigen::MatrixXd ranks;       // problems x algorithms
  Eigen::VectorXd mean_rank;   // per algorithm
  Eigen::VectorXd avg_runtime; // per algorithm, seconds per trial
};

/// medians uses NaN to mark a missing (problem, algorithm) cell, which is an
/// error reported with both names.
RankTable mean_rank_table(const std::vector<std::string>& problems,
                          const std::vector<std::string>& algorithms,
                          const Eigen::MatrixXd& medians,
                          const Eigen::VectorXd& avg_runtime);

std::string rank_table_csv(const RankTable& table);
nlohmann::json rank_table_json(const RankTable& table);

}  // namespace opbo
#endif  // OPBO_METRICS_HPP
