#include "opbo/benchfn.hpp"

#include <cmath>
#include <sstream>

namespace opbo {

namespace {

constexpr double kAckleyA = 20.0;
constexpr double kAckleyB = 0.2;
constexpr double kAckleyC = 2.0 * 3.14159265358979323846;
constexpr double kPi = 3.14159265358979323846;

double ackley(const Eigen::VectorXd& x) {
  const double d = static_cast<double>(x.size());
  // Inner means are formed before the square root / exp so the sums cannot
  // overflow at d = 1000.
  const double mean_sq = x.squaredNorm() / d;
  const double mean_cos = (kAckleyC * x.array()).cos().sum() / d;
  return -kAckleyA * std::exp(-kAckleyB * std::sqrt(mean_sq)) -
         std::exp(mean_cos) + kAckleyA + std::exp(1.0);
}

double levy(const Eigen::VectorXd& x) {
  const Eigen::ArrayXd w = 1.0 + (x.array() - 1.0) / 4.0;
  const Eigen::Index d = x.size();
  double sum = std::pow(std::sin(kPi * w(0)), 2);
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    sum += (wi - 1.0) * (wi - 1.0) *
           (1.0 + 10.0 * std::pow(std::sin(kPi * wi + 1.0), 2));
  }
  const double wd = w(d - 1);
  sum += (wd - 1.0) * (wd - 1.0) * (1.0 + std::pow(std::sin(2.0 * kPi * wd), 2));
  return sum;
}

double rosenbrock(const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    const double b = x(i) - 1.0;
    sum += 100.0 * a * a + b * b;
  }
  return sum;
}

double dixon_price(const Eigen::VectorXd& x) {
  double sum = (x(0) - 1.0) * (x(0) - 1.0);
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    const double t = 2.0 * x(i) * x(i) - x(i - 1);
    sum += static_cast<double>(i + 1) * t * t;
  }
  return sum;
}

void check_input(const ObjectiveFunction& fn, const Eigen::VectorXd& x) {
  if (x.size() != fn.dimension) {
    std::ostringstream msg;
    msg << "evaluate: expected dimension " << fn.dimension << ", got "
        << x.size();
    throw DimensionMismatch(msg.str());
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) >= fn.lower_bound && x(i) <= fn.upper_bound)) {
      std::ostringstream msg;
      msg << "evaluate: coordinate " << i << " = " << x(i) << " outside ["
          << fn.lower_bound << ", " << fn.upper_bound << "]";
      throw OutOfBounds(msg.str(), static_cast<int>(i));
    }
  }
}

}  // namespace

std::string to_string(BenchName name) {
  switch (name) {
    case BenchName::Ackley: return "ackley";
    case BenchName::Levy: return "levy";
    case BenchName::Rosenbrock: return "rosenbrock";
    case BenchName::DixonPrice: return "dixonprice";
  }
  throw UnknownFunction("to_string: invalid BenchName");
}

BenchName bench_name_from_string(const std::string& s) {
  if (s == "ackley") return BenchName::Ackley;
  if (s == "levy") return BenchName::Levy;
  if (s == "rosenbrock") return BenchName::Rosenbrock;
  if (s == "dixonprice") return BenchName::DixonPrice;
  throw UnknownFunction("unknown benchmark function: \"" + s + "\"");
}

std::string ObjectiveFunction::id() const {
  std::ostringstream out;
  out << to_string(name) << "_d" << dimension;
  return out.str();
}

ObjectiveFunction make_objective(BenchName name, int dimension,
                                 double lower_bound, double upper_bound,
                                 double noise_std) {
  const int min_dim = name == BenchName::Ackley ? 1 : 2;
  if (dimension < min_dim) {
    std::ostringstream msg;
    msg << to_string(name) << " requires dimension >= " << min_dim << ", got "
        << dimension;
    throw DimensionMismatch(msg.str());
  }
  if (!(lower_bound < upper_bound)) {
    throw Error("make_objective: lower_bound must be < upper_bound");
  }
  if (noise_std < 0.0) {
    throw Error("make_objective: noise_std must be >= 0");
  }
  return ObjectiveFunction{name, dimension, lower_bound, upper_bound, noise_std};
}

double evaluate_noiseless(const ObjectiveFunction& fn, const Eigen::VectorXd& x) {
  check_input(fn, x);
  switch (fn.name) {
    case BenchName::Ackley: return ackley(x);
    case BenchName::Levy: return levy(x);
    case BenchName::Rosenbrock: return rosenbrock(x);
    case BenchName::DixonPrice: return dixon_price(x);
  }
  throw UnknownFunction("evaluate_noiseless: invalid BenchName");
}

EvaluationRecord Evaluator::evaluate(const Eigen::VectorXd& x_original) {
  const double fx = evaluate_noiseless(fn_, x_original);
  double observed = fx;
  if (fn_.noise_std > 0.0) {
    observed += fn_.noise_std * rng_.normal();
  }
  ++count_;
  return EvaluationRecord{x_original, observed, fx, count_};
}

EvaluationRecord Evaluator::evaluate_unit(const Eigen::VectorXd& u) {
  return evaluate(from_unit(fn_, u));
}

Eigen::VectorXd to_unit(const ObjectiveFunction& fn, const Eigen::VectorXd& x) {
  const double span = fn.upper_bound - fn.lower_bound;
  return (x.array() - fn.lower_bound) / span;
}

Eigen::VectorXd from_unit(const ObjectiveFunction& fn, const Eigen::VectorXd& u) {
  const double span = fn.upper_bound - fn.lower_bound;
  return fn.lower_bound + span * u.array();
}

std::pair<Eigen::VectorXd, double> known_minimum(const ObjectiveFunction& fn) {
  Eigen::VectorXd x(fn.dimension);
  switch (fn.name) {
    case BenchName::Ackley:
      x.setZero();
      break;
    case BenchName::Levy:
    case BenchName::Rosenbrock:
      x.setOnes();
      break;
    case BenchName::DixonPrice:
      // x_i = 2^{-(2^i - 2)/2^i} = 2^{-1 + 2^{1-i}}, computed in log2 space so
      // the exponent never overflows at large i.
      for (int i = 1; i <= fn.dimension; ++i) {
        x(i - 1) = std::exp2(-1.0 + std::exp2(1.0 - static_cast<double>(i)));
      }
      break;
    default:
      throw UnknownFunction("known_minimum: invalid BenchName");
  }
  return {x, 0.0};
}

std::vector<ObjectiveFunction> make_suite(const std::vector<int>& dims) {
  if (dims.empty()) {
    throw EmptyDims("make_suite: dims must be non-empty");
  }
  for (int d : dims) {
    if (d < 2) {
      throw DimensionMismatch("make_suite: all dims must be >= 2");
    }
  }
  std::vector<ObjectiveFunction> suite;
  suite.reserve(dims.size() * 4);
  for (int d : dims) {
    for (BenchName name : {BenchName::Ackley, BenchName::Levy,
                           BenchName::Rosenbrock, BenchName::DixonPrice}) {
      suite.push_back(make_objective(name, d, -5.0, 10.0, 0.0));
    }
  }
  return suite;
}

}  // namespace opbo
