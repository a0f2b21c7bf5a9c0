#include "opbo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "opbo/errors.hpp"

namespace opbo {

namespace {

bool has_ties(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

/// Integer ranks for tie-free data, 1 = smallest.
Eigen::VectorXd strict_ranks(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ranks(order[static_cast<std::size_t>(i)]) = static_cast<double>(i + 1);
  }
  return ranks;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.square().sum() * db.square().sum());
  if (!(denom > 0.0)) {
    throw ZeroVariance("spearman_rho: an input vector is constant");
  }
  return (da * db).sum() / denom;
}

}  // namespace

std::string to_string(OpcType type) {
  switch (type) {
    case OpcType::Flat: return "flat";
    case OpcType::UShaped: return "u-shaped";
    case OpcType::Neutral: return "neutral";
    case OpcType::Bell: return "bell";
    case OpcType::Steep: return "steep";
    case OpcType::Degenerate: return "degenerate";
  }
  throw Error("to_string: invalid OpcType");
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v(order[static_cast<std::size_t>(j + 1)]) ==
                            v(order[static_cast<std::size_t>(i)])) {
      ++j;
    }
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      ranks(order[static_cast<std::size_t>(k)]) = avg;
    }
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) {
    throw LengthMismatch("spearman_rho: input lengths differ");
  }
  const Eigen::Index n = u.size();
  if (n < 2) {
    throw TooShort("spearman_rho: need at least 2 observations");
  }
  const bool ties = has_ties(u) || has_ties(v);
  if (!ties) {
    const Eigen::VectorXd ru = strict_ranks(u);
    const Eigen::VectorXd rv = strict_ranks(v);
    const double d2 = (ru - rv).squaredNorm();
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
  }
  return pearson(average_ranks(u), average_ranks(v));
}

OpcCurve build_opc(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  if (n < 2) {
    throw TooShort("build_opc: need at least 2 values");
  }
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());

  OpcCurve curve;
  curve.x.resize(n);
  curve.y.resize(n);
  const double lo = sorted.front();
  const double span = sorted.back() - lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    curve.x(i) = static_cast<double>(i) / static_cast<double>(n - 1);
    curve.y(i) = span > 0.0 ? (sorted[static_cast<std::size_t>(i)] - lo) / span
                            : 0.0;
  }

  double area = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double r0 = curve.y(i) - curve.x(i);
    const double r1 = curve.y(i + 1) - curve.x(i + 1);
    area += 0.5 * (r0 + r1) * (curve.x(i + 1) - curve.x(i));
  }
  curve.signed_area = area;

  if (span == 0.0) {
    curve.type = OpcType::Degenerate;
  } else if (n >= 10) {
    curve.type = classify_opc(curve);
  } else {
    curve.type = OpcType::Neutral;
  }
  return curve;
}

OpcType classify_opc(const OpcCurve& curve) {
  const Eigen::Index n = curve.x.size();
  if (n < 10) {
    throw TooFewPoints("classify_opc: need at least 10 points");
  }
  if (curve.type == OpcType::Degenerate ||
      (curve.y.maxCoeff() == 0.0 && curve.y.minCoeff() == 0.0)) {
    return OpcType::Degenerate;
  }

  constexpr double kBand = 0.05;
  bool below = false;
  bool above = false;
  int first_sign = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = curve.y(i) - curve.x(i);
    if (r < -kBand) {
      below = true;
      if (first_sign == 0) first_sign = -1;
    } else if (r > kBand) {
      above = true;
      if (first_sign == 0) first_sign = 1;
    }
  }
  if (!below && !above) {
    return OpcType::Neutral;
  }
  if (below && above) {
    return first_sign < 0 ? OpcType::UShaped : OpcType::Bell;
  }
  return below ? OpcType::Flat : OpcType::Steep;
}

RankTable mean_rank_table(const std::vector<std::string>& problems,
                          const std::vector<std::string>& algorithms,
                          const Eigen::MatrixXd& medians,
                          const Eigen::VectorXd& avg_runtime) {
  const Eigen::Index p = static_cast<Eigen::Index>(problems.size());
  const Eigen::Index a = static_cast<Eigen::Index>(algorithms.size());
  if (medians.rows() != p || medians.cols() != a || avg_runtime.size() != a) {
    throw LengthMismatch("mean_rank_table: shape mismatch with labels");
  }
  if (p < 1 || a < 1) {
    throw InvalidSize("mean_rank_table: need at least one problem and algorithm");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < a; ++j) {
      if (std::isnan(medians(i, j))) {
        throw MissingCell("mean_rank_table: no result for problem \"" +
                          problems[static_cast<std::size_t>(i)] +
                          "\", algorithm \"" +
                          algorithms[static_cast<std::size_t>(j)] + "\"");
      }
    }
  }

  RankTable table;
  table.problems = problems;
  table.algorithms = algorithms;
  table.medians = medians;
  table.ranks.resize(p, a);
  for (Eigen::Index i = 0; i < p; ++i) {
    table.ranks.row(i) = average_ranks(medians.row(i).transpose()).transpose();
  }
  table.mean_rank = table.ranks.colwise().mean().transpose();
  table.avg_runtime = avg_runtime;
  return table;
}

std::string rank_table_csv(const RankTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "problem";
  for (const auto& alg : table.algorithms) {
    out << "," << alg;
  }
  out << "\n";
  for (std::size_t i = 0; i < table.problems.size(); ++i) {
    out << table.problems[i];
    for (Eigen::Index j = 0; j < table.medians.cols(); ++j) {
      out << "," << table.medians(static_cast<Eigen::Index>(i), j);
    }
    out << "\n";
  }
  out << "mean_rank";
  for (Eigen::Index j = 0; j < table.mean_rank.size(); ++j) {
    out << "," << table.mean_rank(j);
  }
  out << "\n";
  out << "tavg_seconds";
  for (Eigen::Index j = 0; j < table.avg_runtime.size(); ++j) {
    out << "," << table.avg_runtime(j);
  }
  out << "\n";
  return out.str();
}

nlohmann::json rank_table_json(const RankTable& table) {
  nlohmann::json j;
  j["problems"] = table.problems;
  j["algorithms"] = table.algorithms;
  nlohmann::json med = nlohmann::json::object();
  nlohmann::json rnk = nlohmann::json::object();
  for (std::size_t i = 0; i < table.problems.size(); ++i) {
    nlohmann::json med_row = nlohmann::json::object();
    nlohmann::json rnk_row = nlohmann::json::object();
    for (std::size_t k = 0; k < table.algorithms.size(); ++k) {
      med_row[table.algorithms[k]] =
          table.medians(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      rnk_row[table.algorithms[k]] =
          table.ranks(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    med[table.problems[i]] = med_row;
    rnk[table.problems[i]] = rnk_row;
  }
  j["medians"] = med;
  j["ranks"] = rnk;
  nlohmann::json agg = nlohmann::json::object();
  for (std::size_t k = 0; k < table.algorithms.size(); ++k) {
    agg[table.algorithms[k]] = {
        {"mean_rank", table.mean_rank(static_cast<Eigen::Index>(k))},
        {"tavg_seconds", table.avg_runtime(static_cast<Eigen::Index>(k))}};
  }
  j["aggregate"] = agg;
  return j;
}

}  // namespace opbo
