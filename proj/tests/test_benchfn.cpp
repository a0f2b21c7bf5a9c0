#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "opbo/benchfn.hpp"
#include "opbo/rng.hpp"

using namespace opbo;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXd constant_vec(int d, double v) {
  return Eigen::VectorXd::Constant(d, v);
}

}  // namespace

TEST_CASE("known values at hand-checked points") {
  CHECK_THAT(evaluate_noiseless(make_objective(BenchName::Ackley, 10),
                                constant_vec(10, 0.0)),
             WithinAbs(0.0, 1e-12));
  CHECK_THAT(evaluate_noiseless(make_objective(BenchName::Rosenbrock, 5),
                                constant_vec(5, 1.0)),
             WithinAbs(0.0, 1e-12));
  CHECK_THAT(evaluate_noiseless(make_objective(BenchName::DixonPrice, 2),
                                constant_vec(2, 1.0)),
             WithinAbs(2.0, 1e-12));
  CHECK_THAT(evaluate_noiseless(make_objective(BenchName::Levy, 3),
                                constant_vec(3, 1.0)),
             WithinAbs(0.0, 1e-12));
}

TEST_CASE("analytic minimizers evaluate to zero across dimensions") {
  for (BenchName name : {BenchName::Ackley, BenchName::Levy,
                         BenchName::Rosenbrock, BenchName::DixonPrice}) {
    for (int d : {2, 10, 100, 1000}) {
      const ObjectiveFunction fn = make_objective(name, d);
      const auto [minimizer, value] = known_minimum(fn);
      REQUIRE(minimizer.size() == d);
      CHECK_THAT(value, WithinAbs(0.0, 1e-12));
      CHECK_THAT(evaluate_noiseless(fn, minimizer), WithinAbs(0.0, 1e-9));
    }
  }
}

TEST_CASE("dixon-price closed-form minimizer in d=2") {
  const auto [minimizer, value] = known_minimum(make_objective(BenchName::DixonPrice, 2));
  CHECK_THAT(minimizer(0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(minimizer(1), WithinAbs(std::pow(2.0, -0.5), 1e-15));
  CHECK_THAT(value, WithinAbs(0.0, 1e-12));
}

TEST_CASE("minimizer dominates random points") {
  RngStream rng(11);
  for (BenchName name : {BenchName::Ackley, BenchName::Levy,
                         BenchName::Rosenbrock, BenchName::DixonPrice}) {
    for (int d : {2, 10, 100}) {
      const ObjectiveFunction fn = make_objective(name, d);
      const double at_min = evaluate_noiseless(fn, known_minimum(fn).first);
      for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd u(d);
        for (int k = 0; k < d; ++k) u(k) = rng.uniform();
        REQUIRE(evaluate_noiseless(fn, from_unit(fn, u)) >= at_min);
      }
    }
  }
}

TEST_CASE("ackley output range") {
  const ObjectiveFunction fn = make_objective(BenchName::Ackley, 7);
  RngStream rng(5);
  const double upper = 20.0 + std::exp(1.0);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd u(7);
    for (int k = 0; k < 7; ++k) u(k) = rng.uniform();
    const double y = evaluate_noiseless(fn, from_unit(fn, u));
    REQUIRE(y >= 0.0);
    REQUIRE(y <= upper);
  }
}

TEST_CASE("noiseless evaluation is pure and bitwise repeatable") {
  const ObjectiveFunction fn = make_objective(BenchName::Levy, 30);
  RngStream rng(3);
  Eigen::VectorXd u(30);
  for (int k = 0; k < 30; ++k) u(k) = rng.uniform();
  const Eigen::VectorXd x = from_unit(fn, u);
  const double a = evaluate_noiseless(fn, x);
  const double b = evaluate_noiseless(fn, x);
  REQUIRE(a == b);
}

TEST_CASE("domain validation") {
  const ObjectiveFunction fn = make_objective(BenchName::Ackley, 3);
  Evaluator eval(fn, RngStream(0));
  CHECK_THROWS_AS(eval.evaluate(constant_vec(2, 0.0)), DimensionMismatch);
  Eigen::VectorXd out = constant_vec(3, 0.0);
  out(1) = 10.5;
  try {
    eval.evaluate(out);
    FAIL("expected OutOfBounds");
  } catch (const OutOfBounds& e) {
    CHECK(e.coordinate == 1);
  }
  CHECK_THROWS_AS(make_objective(BenchName::Levy, 1), Error);
  CHECK_NOTHROW(make_objective(BenchName::Ackley, 1));
  CHECK_THROWS_AS(make_objective(BenchName::Ackley, 2, 3.0, 3.0), Error);
  CHECK_THROWS_AS(make_objective(BenchName::Ackley, 2, -5.0, 10.0, -0.1), Error);
}

TEST_CASE("evaluator counts calls and reports truth alongside noise") {
  const ObjectiveFunction fn = make_objective(BenchName::Ackley, 2, -5, 10, 0.5);
  Evaluator eval(fn, RngStream(9).fork("noise"));
  const Eigen::VectorXd x = constant_vec(2, 1.0);
  const EvaluationRecord r1 = eval.evaluate(x);
  const EvaluationRecord r2 = eval.evaluate(x);
  CHECK(r1.eval_index == 1);
  CHECK(r2.eval_index == 2);
  CHECK(eval.evaluations() == 2);
  CHECK(r1.true_value == r2.true_value);
  CHECK(r1.value != r2.value);  // independent noise draws

  Evaluator clean(make_objective(BenchName::Ackley, 2), RngStream(9));
  const EvaluationRecord r3 = clean.evaluate(x);
  CHECK(r3.value == r3.true_value);
}

TEST_CASE("noisy sample mean converges to the noiseless value") {
  const double s = 0.3;
  const ObjectiveFunction fn = make_objective(BenchName::Levy, 4, -5, 10, s);
  Evaluator eval(fn, RngStream(123).fork("noise"));
  const Eigen::VectorXd x = constant_vec(4, 2.0);
  const double truth = evaluate_noiseless(make_objective(BenchName::Levy, 4), x);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += eval.evaluate(x).value;
  CHECK_THAT(sum / 10000.0, WithinAbs(truth, 5.0 * s / 100.0));
}

TEST_CASE("unit-cube mapping round trip") {
  const ObjectiveFunction fn = make_objective(BenchName::Rosenbrock, 6);
  RngStream rng(77);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd u(6);
    for (int k = 0; k < 6; ++k) u(k) = rng.uniform();
    const Eigen::VectorXd x = from_unit(fn, u);
    REQUIRE((to_unit(fn, x) - u).cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 6; ++k) {
      REQUIRE(x(k) >= fn.lower_bound);
      REQUIRE(x(k) <= fn.upper_bound);
    }
  }
}

TEST_CASE("suite construction") {
  CHECK(make_suite({600, 700, 800, 900, 1000}).size() == 20);
  const auto suite = make_suite({100});
  CHECK(suite.size() == 4);
  for (const auto& fn : suite) {
    CHECK(fn.lower_bound == -5.0);
    CHECK(fn.upper_bound == 10.0);
    CHECK(fn.noise_std == 0.0);
    CHECK(fn.dimension == 100);
  }
  CHECK_THROWS_AS(make_suite({}), EmptyDims);
}

TEST_CASE("names serialize as lowercase strings") {
  CHECK(to_string(BenchName::Ackley) == "ackley");
  CHECK(to_string(BenchName::DixonPrice) == "dixonprice");
  CHECK(bench_name_from_string("levy") == BenchName::Levy);
  CHECK(bench_name_from_string("rosenbrock") == BenchName::Rosenbrock);
  CHECK_THROWS_AS(bench_name_from_string("sphere"), UnknownFunction);
  CHECK(make_objective(BenchName::Ackley, 100).id() == "ackley_d100");
}
