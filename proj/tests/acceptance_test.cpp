// Acceptance gate: one checkable criterion per function, each printing a
// single [PASS]/[FAIL] line. Run with no arguments for the full gate or with
// criterion names (c1..c9) to run a subset. Exit status 0 iff everything
// requested passed.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opbo/acquisition.hpp"
#include "opbo/benchfn.hpp"
#include "opbo/dataset.hpp"
#include "opbo/harness.hpp"
#include "opbo/metrics.hpp"
#include "opbo/optimizer.hpp"
#include "opbo/rng.hpp"
#include "opbo/sampling.hpp"
#include "opbo/surrogate_op.hpp"

using namespace opbo;
namespace fs = std::filesystem;

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// c1: equal scores make every ordering equally likely, so the listwise loss
// collapses to ln(n!); a single element carries no ranking information at all.
bool criterion_ln_factorial() {
  bool ok = true;
  for (int n = 1; n <= 10; ++n) {
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, 0.7);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    const double loss = pl_loss(scores, perm);
    double want = 0.0;
    for (int k = 2; k <= n; ++k) want += std::log(static_cast<double>(k));
    if (n == 1) {
      if (loss != 0.0) {
        std::printf("  n=1 loss %.17g is not exactly 0\n", loss);
        ok = false;
      }
    } else if (std::abs(loss - want) > 1e-9) {
      std::printf("  n=%d loss %.17g vs ln(n!)=%.17g\n", n, loss, want);
      ok = false;
    }
  }
  return ok;
}

// c2: the analytic ranking-loss gradient agrees with central finite
// differences on random batches spanning two orders of magnitude in size.
bool criterion_gradient() {
  RngStream rng(2024);
  const double h = 1e-5;
  double worst = 0.0;
  for (int batch = 0; batch < 50; ++batch) {
    const int n = 2 + static_cast<int>(rng.uniform_int(199));
    Eigen::VectorXd scores(n);
    Eigen::VectorXd values(n);
    for (int i = 0; i < n; ++i) {
      scores(i) = 2.0 * rng.normal();
      values(i) = rng.normal();
    }
    const std::vector<int> perm = ranking_permutation(values);
    const Eigen::VectorXd grad = pl_loss_gradient(scores, perm);
    Eigen::VectorXd fd(n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd up = scores, down = scores;
      up(j) += h;
      down(j) -= h;
      fd(j) = (pl_loss(up, perm) - pl_loss(down, perm)) / (2.0 * h);
    }
    // Error relative to the gradient's scale: entries near zero sit below
    // the cancellation noise floor of the difference quotient itself, so a
    // per-entry denominator would measure the finite differences, not the
    // analytic gradient.
    const double rel = (grad - fd).cwiseAbs().maxCoeff() /
                       fd.cwiseAbs().maxCoeff();
    worst = std::max(worst, rel);
  }
  std::printf("  max relative error %.3g over 50 batches\n", worst);
  return worst < 1e-5;
}

// c3: rank correlation agrees exactly with a brute-force pairwise-counting
// oracle and reproduces the tie-free closed forms.
bool criterion_spearman() {
  auto pairwise_ranks = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      int below = 0;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (v(j) < v(i)) ++below;
      }
      r(i) = 1.0 + below;
    }
    return r;
  };
  auto oracle = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ra = pairwise_ranks(a);
    const Eigen::VectorXd rb = pairwise_ranks(b);
    const double n = static_cast<double>(a.size());
    const double d2 = (ra - rb).squaredNorm();
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  };

  RngStream rng(77);
  bool ok = true;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd a(100), b(100);
    for (int i = 0; i < 100; ++i) {
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    if (spearman_rho(a, b) != oracle(a, b)) {
      std::printf("  mismatch vs pairwise oracle on trial %d\n", t);
      ok = false;
    }
  }

  Eigen::VectorXd x(5), rev(5);
  for (int i = 0; i < 5; ++i) {
    x(i) = i * 1.5 + 0.25;
    rev(4 - i) = x(i);
  }
  if (spearman_rho(x, x) != 1.0) {
    std::printf("  identical order is not exactly 1\n");
    ok = false;
  }
  if (spearman_rho(x, rev) != -1.0) {
    std::printf("  reversed order is not exactly -1\n");
    ok = false;
  }
  Eigen::Vector3d u(1.0, 2.0, 3.0), w(1.0, 3.0, 2.0);
  if (spearman_rho(u, w) != 0.5) {
    std::printf("  (1,2,3) vs (1,3,2) gives %.17g, want 0.5\n",
                spearman_rho(u, w));
    ok = false;
  }
  return ok;
}

// c4: every benchmark evaluates to (numerically) zero at its analytic
// minimizer across four decades of dimension.
bool criterion_minima() {
  bool ok = true;
  for (BenchName name : {BenchName::Ackley, BenchName::Levy,
                         BenchName::Rosenbrock, BenchName::DixonPrice}) {
    for (int d : {2, 10, 100, 1000}) {
      const ObjectiveFunction fn = make_objective(name, d);
      const auto [argmin, minval] = known_minimum(fn);
      const double got = evaluate_noiseless(fn, argmin);
      if (!(std::abs(got - minval) <= 1e-9)) {
        std::printf("  %s: f(argmin)=%.3g, expected %.3g\n", fn.id().c_str(),
                    got, minval);
        ok = false;
      }
    }
  }
  return ok;
}

// c5: the ranking loss sees targets only through their ordering, so an
// increasing affine map of y leaves the whole training trajectory bitwise
// unchanged.
bool criterion_order_only() {
  RngStream rng(501);
  const int n = 60, d = 4;
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform();
    y(i) = rng.normal();
  }
  TrainConfig config;
  config.epochs = 40;
  const OpSurrogateModel a = fit(Dataset(x, y), config, 99);
  const OpSurrogateModel b =
      fit(Dataset(x, (3.0 * y.array() + 7.0).matrix()), config, 99);
  if (a.epoch_loss.size() != b.epoch_loss.size()) {
    std::printf("  loss traces have different lengths\n");
    return false;
  }
  for (std::size_t e = 0; e < a.epoch_loss.size(); ++e) {
    if (a.epoch_loss[e] != b.epoch_loss[e]) {
      std::printf("  epoch %zu: %.17g vs %.17g\n", e, a.epoch_loss[e],
                  b.epoch_loss[e]);
      return false;
    }
  }
  return true;
}

// c6: on the radial bump over [-6,6]^2 the order-preserving surrogate ranks a
// dense held-out grid almost perfectly, while the plain regression network
// under the identical budget ranks it strictly worse.
bool criterion_needle_ranking() {
  const int grid_axis = 33;
  const CandidateSet grid = grid_sampling(2, grid_axis);
  const Eigen::MatrixXd grid_unit = grid.points;
  Eigen::VectorXd fitness(grid_unit.rows());
  for (Eigen::Index i = 0; i < grid_unit.rows(); ++i) {
    const double x1 = 12.0 * grid_unit(i, 0) - 6.0;
    const double x2 = 12.0 * grid_unit(i, 1) - 6.0;
    fitness(i) = -std::exp(-(x1 * x1 + x2 * x2) / 2.0);
  }

  std::vector<double> rho_op, rho_nn;
  int op_hits = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    RngStream design = rng.fork("design");
    const CandidateSet sample = latin_hypercube(2, 200, design);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
      const double x1 = 12.0 * sample.points(i, 0) - 6.0;
      const double x2 = 12.0 * sample.points(i, 1) - 6.0;
      y(i) = std::exp(-(x1 * x1 + x2 * x2) / 2.0);
    }
    const Dataset data(sample.points, y);
    TrainConfig config;
    config.epochs = 200;

    const OpSurrogateModel op = fit(data, config, rng.root_seed());
    const double r_op = spearman_rho(score(op, grid_unit), fitness);
    rho_op.push_back(r_op);
    if (r_op >= 0.90) ++op_hits;

    const NnSurrogateModel nn = fit_nn(data, config, rng.root_seed());
    const Eigen::VectorXd nn_fitness_scores = -predict_nn(nn, grid_unit);
    rho_nn.push_back(spearman_rho(nn_fitness_scores, fitness));
  }
  const double med_op = median_of(rho_op);
  const double med_nn = median_of(rho_nn);
  std::printf(
      "  ranking-surrogate rho >= 0.90 in %d/10 seeds, medians %.4f (rank "
      "model) vs %.4f (regression)\n",
      op_hits, med_op, med_nn);
  return op_hits >= 9 && med_nn < med_op;
}

// c7: at a matched 510-evaluation budget on ackley d=100, the batched
// order-preserving optimizer lands below both uniform random search and the
// classic single-point GP loop (medians over 10 seeds).
bool criterion_optimizer_ordering() {
  std::vector<double> opbo_finals, rs_finals, gp_finals;
  for (int seed = 1; seed <= 10; ++seed) {
    RunConfig base;
    base.objective = make_objective(BenchName::Ackley, 100);
    base.initial_size = 10;
    base.iterations = 50;
    base.candidate_size = 1000;
    base.good_enough_size = 10;
    base.seed = static_cast<std::uint64_t>(seed);

    RunConfig opbo = base;
    opbo.framework = Framework::OPBO;
    opbo.surrogate = SurrogateKind::OP;
    opbo_finals.push_back(run_opbo(opbo).best_value);

    rs_finals.push_back(run_random_search(base).best_value);

    RunConfig gp = base;
    gp.framework = Framework::StandardBO;
    gp.surrogate = SurrogateKind::GP;
    gp.iterations = 500;  // single-point rounds at the same total budget
    gp.good_enough_size = 1;
    gp_finals.push_back(run_standard_bo(gp).best_value);
    std::printf("  seed %d: batched %.4f, random %.4f, single-point GP %.4f\n",
                seed, opbo_finals.back(), rs_finals.back(), gp_finals.back());
  }
  const double med_opbo = median_of(opbo_finals);
  const double med_rs = median_of(rs_finals);
  const double med_gp = median_of(gp_finals);
  std::printf("  medians: batched %.4f, random %.4f, single-point GP %.4f\n",
              med_opbo, med_rs, med_gp);
  return med_opbo < med_rs && med_opbo < med_gp;
}

// c8: the trust-region side length follows its scripted state machine:
// 3 consecutive improvements double (capped), `failure_tolerance`
// non-improvements halve, and halving through the floor raises the restart
// flag instead of leaving the range.
bool criterion_trust_region() {
  bool ok = true;
  TrustRegionState s;
  s.center = Eigen::VectorXd::Constant(3, 0.5);
  double incumbent = 10.0;

  // Two improvements keep the side fixed; the third doubles it to the cap.
  for (int i = 0; i < 3; ++i) {
    s = update_trust_region(s, incumbent - 1.0, incumbent);
    incumbent -= 1.0;
    const double want = i < 2 ? 0.8 : 1.6;
    if (s.side_length != want || s.restart) {
      std::printf("  success %d: side %.4f, want %.4f\n", i + 1, s.side_length,
                  want);
      ok = false;
    }
  }
  // Already at the cap: further successes cannot grow it.
  for (int i = 0; i < 3; ++i) {
    s = update_trust_region(s, incumbent - 1.0, incumbent);
    incumbent -= 1.0;
  }
  if (s.side_length != 1.6) {
    std::printf("  cap violated: side %.4f\n", s.side_length);
    ok = false;
  }
  // failure_tolerance consecutive ties halve the side once.
  for (int i = 0; i < s.failure_tolerance; ++i) {
    s = update_trust_region(s, incumbent, incumbent);
  }
  if (s.side_length != 0.8 || s.failure_count != 0) {
    std::printf("  halving failed: side %.4f, failures %d\n", s.side_length,
                s.failure_count);
    ok = false;
  }
  // An improvement in the middle of a failure streak resets the count.
  for (int i = 0; i < s.failure_tolerance - 1; ++i) {
    s = update_trust_region(s, incumbent, incumbent);
  }
  s = update_trust_region(s, incumbent - 1.0, incumbent);
  incumbent -= 1.0;
  if (s.failure_count != 0 || s.side_length != 0.8) {
    std::printf("  failure streak not reset by a success\n");
    ok = false;
  }

  // Halving through the floor flags a restart, still reporting the halved
  // side rather than clamping.
  TrustRegionState tiny;
  tiny.center = Eigen::VectorXd::Constant(3, 0.5);
  tiny.side_length = 1.5 * tiny.min_side_length;
  tiny.failure_count = tiny.failure_tolerance - 1;
  tiny = update_trust_region(tiny, 5.0, 5.0);
  if (!tiny.restart || tiny.side_length != 0.75 * tiny.min_side_length) {
    std::printf("  restart flag: restart=%d side %.6f\n", tiny.restart ? 1 : 0,
                tiny.side_length);
    ok = false;
  }
  return ok;
}

// c9: cross-cutting invariants: incumbent monotonicity, exact evaluation
// accounting (restart rounds included), stratified initial designs, top-g
// invariance under monotone transforms, nonnegative expected improvement, and
// bit-identical experiment outputs across parallelism levels.
bool criterion_invariants() {
  bool ok = true;

  // Incumbent monotonicity and evaluation accounting on a plain batched run.
  {
    RunConfig config;
    config.objective = make_objective(BenchName::Levy, 2);
    config.initial_size = 6;
    config.iterations = 8;
    config.candidate_size = 40;
    config.good_enough_size = 3;
    config.train.epochs = 5;
    config.seed = 11;
    const OptimizationTrace trace = run_opbo(config);
    double incumbent = trace.initial_incumbent;
    long evals = config.initial_size;
    for (const IterationRecord& rec : trace.iterations) {
      if (rec.incumbent > incumbent) {
        std::printf("  incumbent increased at iteration %d\n", rec.iteration);
        ok = false;
      }
      incumbent = rec.incumbent;
      evals += rec.suggested.rows();
      if (rec.cumulative_evaluations != evals) {
        std::printf("  evaluation accounting off at iteration %d\n",
                    rec.iteration);
        ok = false;
      }
    }
    if (trace.total_evaluations !=
        config.initial_size + config.iterations * config.good_enough_size) {
      std::printf("  total evaluations %ld, want %d\n", trace.total_evaluations,
                  config.initial_size +
                      config.iterations * config.good_enough_size);
      ok = false;
    }
  }

  // The same accounting holds through trust-region restarts, whose re-init
  // rounds charge their full initial-design cost.
  {
    RunConfig config;
    config.objective = make_objective(BenchName::Levy, 2, -5.0, 10.0, 100.0);
    config.framework = Framework::TrustRegion;
    config.initial_size = 6;
    config.iterations = 60;
    config.candidate_size = 40;
    config.good_enough_size = 1;
    config.train.epochs = 5;
    config.seed = 3;
    const OptimizationTrace trace = run_trust_region(config);
    long evals = config.initial_size;
    bool saw_restart = false;
    for (const IterationRecord& rec : trace.iterations) {
      evals += rec.suggested.rows();
      if (rec.cumulative_evaluations != evals) {
        std::printf("  trust-region accounting off at iteration %d\n",
                    rec.iteration);
        ok = false;
      }
      if (rec.suggested.rows() == config.initial_size) saw_restart = true;
    }
    if (!saw_restart) {
      std::printf("  restart never fired; accounting check incomplete\n");
      ok = false;
    }
    if (trace.total_evaluations != evals) {
      std::printf("  trust-region total %ld, want %ld\n",
                  trace.total_evaluations, evals);
      ok = false;
    }
  }

  // Latin hypercube stratification: one point per stratum per dimension.
  {
    RngStream rng(17);
    const CandidateSet design = latin_hypercube(5, 40, rng);
    for (int j = 0; j < 5 && ok; ++j) {
      std::vector<int> counts(40, 0);
      for (int i = 0; i < 40; ++i) {
        const int stratum = std::min(
            39, static_cast<int>(design.points(i, j) * 40.0));
        counts[stratum]++;
      }
      for (int c : counts) {
        if (c != 1) {
          std::printf("  stratification violated in dimension %d\n", j);
          ok = false;
          break;
        }
      }
    }
  }

  // Top-g selection depends only on the ordering of the acquisition values.
  {
    RngStream rng(29);
    CandidateSet candidates = random_sampling(3, 50, rng);
    Eigen::VectorXd values(50);
    for (int i = 0; i < 50; ++i) values(i) = rng.normal();
    const GoodEnoughSet base = select_top_g(values, candidates, 7);
    const Eigen::VectorXd affine = (2.0 * values.array() + 1.0).matrix();
    const Eigen::VectorXd squashed = values.array().tanh().matrix();
    if (select_top_g(affine, candidates, 7).indices != base.indices ||
        select_top_g(squashed, candidates, 7).indices != base.indices) {
      std::printf("  top-g selection changed under a monotone transform\n");
      ok = false;
    }
  }

  // Expected improvement never goes negative.
  {
    RngStream rng(31);
    PosteriorPrediction pred;
    pred.mean.resize(200);
    pred.std.resize(200);
    for (int i = 0; i < 200; ++i) {
      pred.mean(i) = 4.0 * rng.normal();
      pred.std(i) = i % 10 == 0 ? 0.0 : std::abs(rng.normal());
    }
    for (double best : {-3.0, 0.0, 2.5}) {
      if (expected_improvement(pred, best).minCoeff() < 0.0) {
        std::printf("  expected improvement went negative\n");
        ok = false;
      }
    }
  }

  // Seeded determinism across parallelism levels: identical traces (wall
  // time masked) and identical manifests.
  {
    const fs::path root =
        fs::temp_directory_path() / "opbo_acceptance_parallel";
    fs::remove_all(root);
    nlohmann::json j{
        {"suite", nlohmann::json::array(
                      {{{"function", "levy"}, {"dimension", 2}}})},
        {"algorithms",
         nlohmann::json::array(
             {{{"framework", "rs"},
               {"id", "rs"},
               {"initial_size", 4},
               {"iterations", 3},
               {"good_enough_size", 2}},
              {{"framework", "opbo"},
               {"surrogate", "op"},
               {"id", "opbo-op"},
               {"initial_size", 4},
               {"iterations", 3},
               {"candidate_size", 20},
               {"good_enough_size", 2},
               {"train", {{"epochs", 3}}}}})},
        {"trials_per_cell", 2},
        {"base_seed", 5},
        {"parallelism", 1},
        {"output_dir", (root / "serial").string()}};
    ExperimentConfig serial = experiment_config_from_json(j);
    j["parallelism"] = 4;
    j["output_dir"] = (root / "threaded").string();
    ExperimentConfig threaded = experiment_config_from_json(j);
    const RunOutcome a = run_experiment(serial);
    const RunOutcome b = run_experiment(threaded);

    auto slurp = [](const fs::path& p) {
      std::ifstream in(p);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    auto masked = [&](const fs::path& p) {
      std::istringstream in(slurp(p));
      std::ostringstream out;
      std::string line;
      std::getline(in, line);
      out << line << "\n";
      while (std::getline(in, line)) {
        int field = 0;
        std::string kept;
        std::string cur;
        for (std::size_t i = 0; i <= line.size(); ++i) {
          if (i == line.size() || line[i] == ',') {
            if (field != 6 && field != 7) kept += cur;
            kept += ",";
            ++field;
            cur.clear();
          } else {
            cur += line[i];
          }
        }
        out << kept << "\n";
      }
      return out.str();
    };
    for (const auto& entry : fs::directory_iterator(a.directory / "traces")) {
      const fs::path other = b.directory / "traces" / entry.path().filename();
      if (!fs::exists(other) || masked(entry.path()) != masked(other)) {
        std::printf("  %s differs across parallelism levels\n",
                    entry.path().filename().string().c_str());
        ok = false;
      }
    }
    if (slurp(a.directory / "manifest.json") !=
        slurp(b.directory / "manifest.json")) {
      std::printf("  manifests differ across parallelism levels\n");
      ok = false;
    }
    fs::remove_all(root);
  }

  return ok;
}

struct Criterion {
  const char* name;
  const char* blurb;
  std::function<bool()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"c1", "equal-score listwise loss equals ln(n!)", criterion_ln_factorial},
      {"c2", "analytic ranking gradient matches finite differences",
       criterion_gradient},
      {"c3", "rank correlation matches the pairwise-counting oracle",
       criterion_spearman},
      {"c4", "benchmarks vanish at their analytic minimizers",
       criterion_minima},
      {"c5", "training sees targets only through their order",
       criterion_order_only},
      {"c6", "needle ranking beats the regression baseline",
       criterion_needle_ranking},
      {"c7", "batched optimizer beats random and single-point baselines",
       criterion_optimizer_ordering},
      {"c8", "trust-region state machine follows its script",
       criterion_trust_region},
      {"c9", "cross-cutting invariant suite", criterion_invariants},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_ok = true;
  int ran = 0;
  for (const Criterion& c : criteria()) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) {
      continue;
    }
    ++ran;
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("  unexpected exception: %s\n", e.what());
    }
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", c.name, c.blurb);
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no matching criteria (use c1..c9)\n");
    return 2;
  }
  return all_ok ? 0 : 1;
}
