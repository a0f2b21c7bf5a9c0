#include "opbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "opbo/sampling.hpp"
#include "opbo/svg.hpp"

namespace opbo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      fail(join_path(path, it.key()), "unknown field");
    }
  }
}

int get_int(const json& j, const std::string& path, const std::string& key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(join_path(path, key), "expected an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path,
                      const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(join_path(path, key), "expected an integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto s = v.get<std::int64_t>();
  if (s < 0) fail(join_path(path, key), "must be >= 0");
  return static_cast<std::uint64_t>(s);
}

double get_double(const json& j, const std::string& path,
                  const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(join_path(path, key), "expected a number");
  return v.get<double>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key,
              bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(join_path(path, key), "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

constexpr std::initializer_list<const char*> kOverrideKeys = {
    "initial_size", "iterations",   "candidate_size", "good_enough_size",
    "warm_start",   "gp_max_points", "train",          "acquisition"};

/// Layers the override keys shared by "defaults" and algorithm entries onto a
/// RunConfig, reporting violations by field path.
void apply_overrides(const json& j, const std::string& path, RunConfig& rc) {
  rc.initial_size = get_int(j, path, "initial_size", rc.initial_size);
  rc.iterations = get_int(j, path, "iterations", rc.iterations);
  rc.candidate_size = get_int(j, path, "candidate_size", rc.candidate_size);
  rc.good_enough_size =
      get_int(j, path, "good_enough_size", rc.good_enough_size);
  rc.warm_start = get_bool(j, path, "warm_start", rc.warm_start);
  rc.gp_max_points = get_int(j, path, "gp_max_points", rc.gp_max_points);
  if (j.contains("train")) {
    const json& t = j.at("train");
    const std::string tp = join_path(path, "train");
    require_object(t, tp);
    check_keys(t, tp,
               {"epochs", "learning_rate", "batch_size", "adam_beta1",
                "adam_beta2", "adam_epsilon"});
    rc.train.epochs = get_int(t, tp, "epochs", rc.train.epochs);
    rc.train.learning_rate =
        get_double(t, tp, "learning_rate", rc.train.learning_rate);
    rc.train.batch_size = get_int(t, tp, "batch_size", rc.train.batch_size);
    rc.train.adam_beta1 = get_double(t, tp, "adam_beta1", rc.train.adam_beta1);
    rc.train.adam_beta2 = get_double(t, tp, "adam_beta2", rc.train.adam_beta2);
    rc.train.adam_epsilon =
        get_double(t, tp, "adam_epsilon", rc.train.adam_epsilon);
    if (rc.train.epochs < 1) fail(join_path(tp, "epochs"), "must be >= 1");
    if (rc.train.learning_rate <= 0.0) {
      fail(join_path(tp, "learning_rate"), "must be > 0");
    }
    if (rc.train.batch_size < 2) {
      fail(join_path(tp, "batch_size"), "must be >= 2");
    }
  }
  if (j.contains("acquisition")) {
    const json& a = j.at("acquisition");
    const std::string ap = join_path(path, "acquisition");
    AcquisitionSpec spec = rc.acquisition.value_or(AcquisitionSpec{});
    try {
      if (a.is_string()) {
        spec.kind = acquisition_kind_from_string(a.get<std::string>());
      } else {
        require_object(a, ap);
        check_keys(a, ap, {"kind", "kappa"});
        if (a.contains("kind")) {
          spec.kind = acquisition_kind_from_string(
              get_string(a, ap, "kind", to_string(spec.kind)));
        }
        spec.kappa = get_double(a, ap, "kappa", spec.kappa);
      }
    } catch (const ConfigError& e) {
      fail(ap, e.what());
    }
    if (spec.kappa < 0.0) fail(join_path(ap, "kappa"), "must be >= 0");
    rc.acquisition = spec;
  }
  if (rc.initial_size < 1) fail(join_path(path, "initial_size"), "must be >= 1");
  if (rc.iterations < 1) fail(join_path(path, "iterations"), "must be >= 1");
  if (rc.good_enough_size < 1) {
    fail(join_path(path, "good_enough_size"), "must be >= 1");
  }
  if (rc.candidate_size != 0 && rc.candidate_size < rc.good_enough_size) {
    fail(join_path(path, "candidate_size"),
         "must be 0 (auto) or >= good_enough_size");
  }
  if (rc.gp_max_points < 1) {
    fail(join_path(path, "gp_max_points"), "must be >= 1");
  }
}

ObjectiveFunction parse_suite_entry(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"function", "dimension", "lower_bound", "upper_bound",
              "noise_std"});
  if (!j.contains("function")) fail(join_path(path, "function"), "required");
  const std::string name = get_string(j, path, "function", "");
  const int dim = get_int(j, path, "dimension", 0);
  if (!j.contains("dimension")) fail(join_path(path, "dimension"), "required");
  const double lo = get_double(j, path, "lower_bound", -5.0);
  const double hi = get_double(j, path, "upper_bound", 10.0);
  const double noise = get_double(j, path, "noise_std", 0.0);
  try {
    return make_objective(bench_name_from_string(name), dim, lo, hi, noise);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

AlgorithmEntry parse_algorithm_entry(const json& j, const std::string& path,
                                     const RunConfig& defaults) {
  require_object(j, path);
  if (!j.contains("framework")) fail(join_path(path, "framework"), "required");
  const std::string fw = get_string(j, path, "framework", "");
  AlgorithmEntry entry;
  entry.base = defaults;
  if (fw == "rs") {
    entry.random_search = true;
    check_keys(j, path,
               {"framework", "id", "initial_size", "iterations",
                "good_enough_size"});
    entry.base.initial_size =
        get_int(j, path, "initial_size", entry.base.initial_size);
    entry.base.iterations =
        get_int(j, path, "iterations", entry.base.iterations);
    entry.base.good_enough_size =
        get_int(j, path, "good_enough_size", entry.base.good_enough_size);
    if (entry.base.initial_size < 1) {
      fail(join_path(path, "initial_size"), "must be >= 1");
    }
    if (entry.base.iterations < 1) {
      fail(join_path(path, "iterations"), "must be >= 1");
    }
    if (entry.base.good_enough_size < 1) {
      fail(join_path(path, "good_enough_size"), "must be >= 1");
    }
    entry.id = get_string(j, path, "id", "rs");
    return entry;
  }
  try {
    entry.base.framework = framework_from_string(fw);
  } catch (const ConfigError& e) {
    fail(join_path(path, "framework"), e.what());
  }
  std::vector<const char*> allowed = {"framework", "surrogate", "id"};
  allowed.insert(allowed.end(), kOverrideKeys.begin(), kOverrideKeys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      fail(join_path(path, it.key()), "unknown field");
    }
  }
  if (!j.contains("surrogate")) fail(join_path(path, "surrogate"), "required");
  try {
    entry.base.surrogate =
        surrogate_kind_from_string(get_string(j, path, "surrogate", ""));
  } catch (const ConfigError& e) {
    fail(join_path(path, "surrogate"), e.what());
  }
  apply_overrides(j, path, entry.base);
  if (entry.base.framework == Framework::StandardBO &&
      entry.base.surrogate != SurrogateKind::GP) {
    fail(join_path(path, "surrogate"),
         "framework \"bo\" requires the GP surrogate");
  }
  entry.id = get_string(j, path, "id",
                        to_string(entry.base.framework) + "-" +
                            to_string(entry.base.surrogate));
  return entry;
}

json objective_to_json(const ObjectiveFunction& fn) {
  return json{{"function", to_string(fn.name)},
              {"dimension", fn.dimension},
              {"lower_bound", fn.lower_bound},
              {"upper_bound", fn.upper_bound},
              {"noise_std", fn.noise_std}};
}

json algorithm_to_json(const AlgorithmEntry& entry) {
  json j;
  j["id"] = entry.id;
  if (entry.random_search) {
    j["framework"] = "rs";
    j["initial_size"] = entry.base.initial_size;
    j["iterations"] = entry.base.iterations;
    j["good_enough_size"] = entry.base.good_enough_size;
    return j;
  }
  j["framework"] = to_string(entry.base.framework);
  j["surrogate"] = to_string(entry.base.surrogate);
  if (entry.base.acquisition.has_value()) {
    j["acquisition"] = json{{"kind", to_string(entry.base.acquisition->kind)},
                            {"kappa", entry.base.acquisition->kappa}};
  }
  j["initial_size"] = entry.base.initial_size;
  j["iterations"] = entry.base.iterations;
  j["candidate_size"] = entry.base.candidate_size;
  j["good_enough_size"] = entry.base.good_enough_size;
  j["warm_start"] = entry.base.warm_start;
  j["gp_max_points"] = entry.base.gp_max_points;
  j["train"] = json{{"epochs", entry.base.train.epochs},
                    {"learning_rate", entry.base.train.learning_rate},
                    {"batch_size", entry.base.train.batch_size},
                    {"adam_beta1", entry.base.train.adam_beta1},
                    {"adam_beta2", entry.base.train.adam_beta2},
                    {"adam_epsilon", entry.base.train.adam_epsilon}};
  return j;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Type-7 quantile (linear interpolation between order statistics), the
/// spreadsheet/NumPy default. q = 0.5 of 1..10 gives 5.5.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InvalidSize("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct TraceRow {
  double evals = 0.0;
  double incumbent = 0.0;
};

std::vector<TraceRow> read_trace_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open trace file " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("trial_id,iteration,", 0) != 0) {
    throw Error("unrecognized trace header in " + file.string());
  }
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 6) {
      throw Error("short trace row in " + file.string());
    }
    rows.push_back({std::stod(fields[2]), std::stod(fields[5])});
  }
  return rows;
}

json load_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(file.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnvVar)) {
    if (env[0] != '\0') return fs::path(env);
  }
  return fs::path("opbo-runs");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  require_object(j, "config");
  check_keys(j, "",
             {"suite", "algorithms", "trials_per_cell", "base_seed",
              "parallelism", "output_dir", "defaults"});
  ExperimentConfig config;
  config.trials_per_cell = get_int(j, "", "trials_per_cell", 10);
  if (config.trials_per_cell < 1) fail("trials_per_cell", "must be >= 1");
  config.base_seed = get_u64(j, "", "base_seed", 0);
  config.parallelism = get_int(j, "", "parallelism", 1);
  if (config.parallelism < 1) fail("parallelism", "must be >= 1");
  config.output_dir = get_string(j, "", "output_dir", "");

  RunConfig defaults;
  if (j.contains("defaults")) {
    const json& d = j.at("defaults");
    require_object(d, "defaults");
    check_keys(d, "defaults", kOverrideKeys);
    apply_overrides(d, "defaults", defaults);
  }

  if (!j.contains("suite")) fail("suite", "required");
  const json& suite = j.at("suite");
  if (!suite.is_array() || suite.empty()) {
    fail("suite", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < suite.size(); ++i) {
    config.suite.push_back(
        parse_suite_entry(suite[i], "suite[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < config.suite.size(); ++i) {
    for (std::size_t k = i + 1; k < config.suite.size(); ++k) {
      if (config.suite[i].id() == config.suite[k].id()) {
        fail("suite[" + std::to_string(k) + "]",
             "duplicate problem " + config.suite[k].id());
      }
    }
  }

  if (!j.contains("algorithms")) fail("algorithms", "required");
  const json& algos = j.at("algorithms");
  if (!algos.is_array() || algos.empty()) {
    fail("algorithms", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < algos.size(); ++i) {
    config.algorithms.push_back(parse_algorithm_entry(
        algos[i], "algorithms[" + std::to_string(i) + "]", defaults));
  }
  for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
    for (std::size_t k = i + 1; k < config.algorithms.size(); ++k) {
      if (config.algorithms[i].id == config.algorithms[k].id) {
        fail("algorithms[" + std::to_string(k) + "].id",
             "duplicate id \"" + config.algorithms[k].id + "\"");
      }
    }
  }
  return config;
}

json experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["suite"] = json::array();
  for (const auto& fn : config.suite) j["suite"].push_back(objective_to_json(fn));
  j["algorithms"] = json::array();
  for (const auto& a : config.algorithms) {
    j["algorithms"].push_back(algorithm_to_json(a));
  }
  j["trials_per_cell"] = config.trials_per_cell;
  j["base_seed"] = config.base_seed;
  j["parallelism"] = config.parallelism;
  j["output_dir"] = config.output_dir;
  return j;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
  return experiment_config_from_json(load_json_file(file));
}

ExperimentConfig make_preset(const std::string& name) {
  ExperimentConfig config;
  config.trials_per_cell = 10;
  config.base_seed = 42;
  RunConfig base;
  base.initial_size = 10;
  base.good_enough_size = 10;
  base.candidate_size = 0;

  AlgorithmEntry opbo_op;
  opbo_op.base = base;
  opbo_op.base.framework = Framework::OPBO;
  opbo_op.base.surrogate = SurrogateKind::OP;
  opbo_op.id = "opbo-op";

  AlgorithmEntry bo_gp;
  bo_gp.base = base;
  bo_gp.base.framework = Framework::StandardBO;
  bo_gp.base.surrogate = SurrogateKind::GP;
  bo_gp.id = "bo-gp";

  AlgorithmEntry rs;
  rs.base = base;
  rs.random_search = true;
  rs.id = "rs";

  if (name == "desk") {
    config.suite = make_suite({100});
    for (AlgorithmEntry* e : {&opbo_op, &bo_gp, &rs}) {
      e->base.iterations = 50;
    }
    // Single-point rounds for standard BO at the same evaluation budget as
    // the batched frameworks: k + R*g evaluations each.
    bo_gp.base.iterations = 500;
    config.algorithms = {opbo_op, bo_gp, rs};
    return config;
  }
  if (name == "paper") {
    config.suite = make_suite({600, 700, 800, 900, 1000});
    for (AlgorithmEntry* e : {&opbo_op, &bo_gp, &rs}) {
      e->base.iterations = 500;
    }
    bo_gp.base.iterations = 5000;
    AlgorithmEntry turbo_op = opbo_op;
    turbo_op.base.framework = Framework::TrustRegion;
    turbo_op.id = "turbo-op";
    AlgorithmEntry turbo_gp = turbo_op;
    turbo_gp.base.surrogate = SurrogateKind::GP;
    turbo_gp.id = "turbo-gp";
    AlgorithmEntry turbo_nn = turbo_op;
    turbo_nn.base.surrogate = SurrogateKind::NN;
    turbo_nn.id = "turbo-nn";
    config.algorithms = {opbo_op, turbo_op, turbo_gp, turbo_nn, bo_gp, rs};
    return config;
  }
  throw ConfigError("preset: unknown name \"" + name +
                    "\" (expected \"desk\" or \"paper\")");
}

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& problem_id,
                         int trial) {
  // Hash over the problem only: every algorithm on this problem gets the
  // same trial seed, hence the same initial design.
  return base_seed + detail::fnv1a64(problem_id) +
         static_cast<std::uint64_t>(trial);
}

OptimizationTrace run_random_search(const RunConfig& config) {
  if (config.initial_size < 1) throw ConfigError("initial_size: must be >= 1");
  if (config.iterations < 1) throw ConfigError("iterations: must be >= 1");
  if (config.good_enough_size < 1) {
    throw ConfigError("good_enough_size: must be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const int d = config.objective.dimension;
  RngStream root(config.seed);
  Evaluator evaluator(config.objective, root.fork("noise"));
  Dataset data(d);

  RngStream init_rng = root.fork("init");
  const CandidateSet init = latin_hypercube(d, config.initial_size, init_rng);
  for (Eigen::Index i = 0; i < init.points.rows(); ++i) {
    const Eigen::VectorXd u = init.points.row(i).transpose();
    data.append(u, evaluator.evaluate_unit(u).value);
  }
  OptimizationTrace trace;
  trace.initial_incumbent = data.values().minCoeff();
  double incumbent = trace.initial_incumbent;

  for (int r = 1; r <= config.iterations; ++r) {
    const auto iter_start = std::chrono::steady_clock::now();
    RngStream cand_rng = root.fork("candidates:" + std::to_string(r));
    const CandidateSet batch =
        random_sampling(d, config.good_enough_size, cand_rng);
    Eigen::VectorXd observed(batch.points.rows());
    for (Eigen::Index i = 0; i < batch.points.rows(); ++i) {
      const Eigen::VectorXd u = batch.points.row(i).transpose();
      observed(i) = evaluator.evaluate_unit(u).value;
      data.append(u, observed(i));
    }
    IterationRecord rec;
    rec.iteration = r;
    rec.suggested = batch.points;
    rec.observed = observed;
    rec.batch_best = observed.minCoeff();
    incumbent = std::min(incumbent, rec.batch_best);
    rec.incumbent = incumbent;
    rec.cumulative_evaluations = evaluator.evaluations();
    rec.fit_seconds = 0.0;
    rec.iter_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      iter_start)
            .count();
    trace.iterations.push_back(std::move(rec));
  }

  const Eigen::Index best = data.argmin();
  trace.best_point_unit = data.points().row(best).transpose();
  trace.best_point = from_unit(config.objective, trace.best_point_unit);
  trace.best_value = data.values()(best);
  trace.total_evaluations = evaluator.evaluations();
  trace.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return trace;
}

std::string trace_csv_header() {
  return "trial_id,iteration,evals_cumulative,suggested_count,batch_best_y,"
         "incumbent_y,fit_seconds,iter_seconds,trust_region_L,fit_final_loss,"
         "gp_lengthscale,gp_signal_variance,gp_noise_variance,gp_lml\n";
}

std::string trace_to_csv(const std::string& trial_id,
                         const OptimizationTrace& trace) {
  std::string out = trace_csv_header();
  for (const IterationRecord& rec : trace.iterations) {
    out += trial_id;
    out += ',' + std::to_string(rec.iteration);
    out += ',' + std::to_string(rec.cumulative_evaluations);
    out += ',' + std::to_string(rec.suggested.rows());
    out += ',' + format_double(rec.batch_best);
    out += ',' + format_double(rec.incumbent);
    out += ',' + format_double(rec.fit_seconds);
    out += ',' + format_double(rec.iter_seconds);
    out += ',';
    if (rec.trust_region_side) out += format_double(*rec.trust_region_side);
    out += ',';
    if (rec.fit_final_loss) out += format_double(*rec.fit_final_loss);
    out += ',';
    if (rec.gp) out += format_double(rec.gp->lengthscale);
    out += ',';
    if (rec.gp) out += format_double(rec.gp->signal_variance);
    out += ',';
    if (rec.gp) out += format_double(rec.gp->noise_variance);
    out += ',';
    if (rec.gp) out += format_double(rec.gp->log_marginal_likelihood);
    out += '\n';
  }
  return out;
}

namespace {

struct TrialTask {
  const ObjectiveFunction* problem;
  const AlgorithmEntry* algorithm;
  int trial;
  std::string key;
  std::uint64_t seed;
};

json trial_result_json(const TrialTask& task, const OptimizationTrace& trace) {
  json j;
  j["version"] = kSoftwareVersion;
  j["problem"] = task.problem->id();
  j["algorithm"] = task.algorithm->id;
  j["trial"] = task.trial;
  j["seed"] = task.seed;
  json cfg = algorithm_to_json(*task.algorithm);
  cfg["problem"] = objective_to_json(*task.problem);
  cfg["seed"] = task.seed;
  j["config"] = cfg;
  j["best_value"] = trace.best_value;
  j["best_point"] =
      std::vector<double>(trace.best_point.data(),
                          trace.best_point.data() + trace.best_point.size());
  j["best_point_unit"] = std::vector<double>(
      trace.best_point_unit.data(),
      trace.best_point_unit.data() + trace.best_point_unit.size());
  j["initial_incumbent"] = trace.initial_incumbent;
  j["iterations"] = trace.iterations.size();
  j["total_evaluations"] = trace.total_evaluations;
  j["runtime_seconds"] = trace.total_seconds;
  return j;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config) {
  if (config.suite.empty()) throw ConfigError("suite: must not be empty");
  if (config.algorithms.empty()) {
    throw ConfigError("algorithms: must not be empty");
  }
  if (config.trials_per_cell < 1) {
    throw ConfigError("trials_per_cell: must be >= 1");
  }

  RunOutcome outcome;
  outcome.directory = config.output_dir.empty()
                          ? default_output_root() / "experiment"
                          : fs::path(config.output_dir);
  const fs::path dir = outcome.directory;
  fs::create_directories(dir / "traces");
  fs::create_directories(dir / "results");
  write_file_atomic(dir / "config_resolved.json",
                    experiment_config_to_json(config).dump(2) + "\n");

  const fs::path manifest_path = dir / "manifest.json";
  json manifest;
  if (fs::exists(manifest_path)) {
    manifest = load_json_file(manifest_path);
    if (!manifest.is_object() || !manifest.contains("trials") ||
        !manifest["trials"].is_object()) {
      throw Error("manifest.json: unrecognized structure in " + dir.string());
    }
  } else {
    manifest = json{{"version", kSoftwareVersion}, {"trials", json::object()}};
  }
  json& trials = manifest["trials"];

  std::vector<TrialTask> pending;
  for (const ObjectiveFunction& problem : config.suite) {
    for (const AlgorithmEntry& algorithm : config.algorithms) {
      for (int t = 0; t < config.trials_per_cell; ++t) {
        TrialTask task;
        task.problem = &problem;
        task.algorithm = &algorithm;
        task.trial = t;
        task.key = problem.id() + "__" + algorithm.id + "__t" +
                   std::to_string(t);
        task.seed = trial_seed(config.base_seed, problem.id(), t);
        const bool done =
            trials.contains(task.key) &&
            trials[task.key].value("status", "") == "done" &&
            fs::exists(dir / trials[task.key].value("trace", "")) &&
            fs::exists(dir / trials[task.key].value("result", ""));
        if (done) {
          ++outcome.skipped;
        } else {
          pending.push_back(std::move(task));
        }
      }
    }
  }

  std::mutex manifest_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<int> executed{0};
  std::atomic<int> failed{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const TrialTask& task = pending[i];
      json entry;
      try {
        RunConfig rc = task.algorithm->base;
        rc.objective = *task.problem;
        rc.seed = task.seed;
        const OptimizationTrace trace = task.algorithm->random_search
                                            ? run_random_search(rc)
                                            : run(rc);
        const std::string rel_trace = "traces/" + task.key + ".csv";
        const std::string rel_result = "results/" + task.key + ".json";
        write_file_atomic(dir / rel_trace, trace_to_csv(task.key, trace));
        write_file_atomic(dir / rel_result,
                          trial_result_json(task, trace).dump(2) + "\n");
        entry = json{{"status", "done"},
                     {"seed", task.seed},
                     {"trace", rel_trace},
                     {"result", rel_result}};
        ++executed;
      } catch (const std::exception& e) {
        entry = json{{"status", "failed"},
                     {"seed", task.seed},
                     {"error", e.what()}};
        ++failed;
      }
      {
        std::lock_guard<std::mutex> lock(manifest_mutex);
        trials[task.key] = entry;
        write_file_atomic(manifest_path, manifest.dump(2) + "\n");
      }
    }
  };

  const int workers = static_cast<int>(
      std::min<std::size_t>(config.parallelism, pending.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (pending.empty()) {
    std::lock_guard<std::mutex> lock(manifest_mutex);
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  }

  outcome.executed = executed.load();
  outcome.failed = failed.load();
  return outcome;
}

ExperimentSummary summarize(const fs::path& results_dir, bool write_outputs) {
  const json manifest = load_json_file(results_dir / "manifest.json");
  const json config_echo = load_json_file(results_dir / "config_resolved.json");
  ExperimentSummary summary;
  for (const json& fn : config_echo.at("suite")) {
    summary.problems.push_back(
        fn.at("function").get<std::string>() + "_d" +
        std::to_string(fn.at("dimension").get<int>()));
  }
  for (const json& a : config_echo.at("algorithms")) {
    summary.algorithms.push_back(a.at("id").get<std::string>());
  }

  struct CellData {
    std::vector<std::vector<TraceRow>> traces;
    std::vector<double> finals;
    std::vector<double> initials;
    std::vector<double> runtimes;
  };
  std::map<std::string, std::map<std::string, CellData>> data;

  for (const auto& [key, entry] : manifest.at("trials").items()) {
    (void)key;
    if (entry.value("status", "") != "done") continue;
    const json result =
        load_json_file(results_dir / entry.at("result").get<std::string>());
    const auto rows =
        read_trace_csv(results_dir / entry.at("trace").get<std::string>());
    CellData& cell = data[result.at("problem").get<std::string>()]
                         [result.at("algorithm").get<std::string>()];
    cell.traces.push_back(rows);
    cell.finals.push_back(rows.empty() ? result.at("best_value").get<double>()
                                       : rows.back().incumbent);
    cell.initials.push_back(result.at("initial_incumbent").get<double>());
    cell.runtimes.push_back(result.at("runtime_seconds").get<double>());
  }

  const auto n_problems = summary.problems.size();
  const auto n_algorithms = summary.algorithms.size();
  Eigen::MatrixXd medians(n_problems, n_algorithms);
  medians.setConstant(std::numeric_limits<double>::quiet_NaN());
  std::vector<double> runtime_sum(n_algorithms, 0.0);
  std::vector<int> runtime_count(n_algorithms, 0);

  for (std::size_t p = 0; p < n_problems; ++p) {
    for (std::size_t a = 0; a < n_algorithms; ++a) {
      const auto pit = data.find(summary.problems[p]);
      if (pit == data.end()) continue;
      const auto ait = pit->second.find(summary.algorithms[a]);
      if (ait == pit->second.end() || ait->second.finals.empty()) continue;
      const CellData& cd = ait->second;

      CellSummary cell;
      cell.problem = summary.problems[p];
      cell.algorithm = summary.algorithms[a];
      cell.trials = static_cast<int>(cd.finals.size());
      cell.median_final = quantile(cd.finals, 0.5);
      cell.q1_final = quantile(cd.finals, 0.25);
      cell.q3_final = quantile(cd.finals, 0.75);
      double tsum = 0.0;
      for (double s : cd.runtimes) tsum += s;
      cell.tavg_seconds = tsum / static_cast<double>(cd.runtimes.size());
      runtime_sum[a] += tsum;
      runtime_count[a] += static_cast<int>(cd.runtimes.size());

      std::size_t rows = cd.traces.front().size();
      for (const auto& tr : cd.traces) rows = std::min(rows, tr.size());
      // Row 0 of the curve is the initial design; evaluation counts are
      // aggregated by median because trust-region restarts can make batch
      // sizes differ across trials at the same iteration index.
      std::vector<double> column(cd.traces.size());
      for (std::size_t t = 0; t < cd.traces.size(); ++t) {
        column[t] = cd.initials[t];
      }
      cell.evals.push_back(
          config_echo.at("algorithms")[a].at("initial_size").get<double>());
      cell.median_curve.push_back(quantile(column, 0.5));
      cell.q1_curve.push_back(quantile(column, 0.25));
      cell.q3_curve.push_back(quantile(column, 0.75));
      for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> evals_col(cd.traces.size());
        for (std::size_t t = 0; t < cd.traces.size(); ++t) {
          evals_col[t] = cd.traces[t][r].evals;
          column[t] = cd.traces[t][r].incumbent;
        }
        cell.evals.push_back(quantile(evals_col, 0.5));
        cell.median_curve.push_back(quantile(column, 0.5));
        cell.q1_curve.push_back(quantile(column, 0.25));
        cell.q3_curve.push_back(quantile(column, 0.75));
      }

      medians(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(a)) =
          cell.median_final;
      summary.cells[cell.problem][cell.algorithm] = std::move(cell);
    }
  }

  Eigen::VectorXd avg_runtime(n_algorithms);
  for (std::size_t a = 0; a < n_algorithms; ++a) {
    avg_runtime(static_cast<Eigen::Index>(a)) =
        runtime_count[a] > 0 ? runtime_sum[a] / runtime_count[a] : 0.0;
  }
  summary.rank_table = mean_rank_table(summary.problems, summary.algorithms,
                                       medians, avg_runtime);

  if (write_outputs) {
    fs::create_directories(results_dir / "summary");
    write_file_atomic(results_dir / "summary" / "summary.json",
                      summary_to_json(summary).dump(2) + "\n");
    write_file_atomic(results_dir / "summary" / "rank_table.csv",
                      rank_table_csv(summary.rank_table));
  }
  return summary;
}

json summary_to_json(const ExperimentSummary& summary) {
  json cells = json::object();
  for (const auto& [problem, by_algo] : summary.cells) {
    for (const auto& [algorithm, cell] : by_algo) {
      cells[problem][algorithm] =
          json{{"trials", cell.trials},
               {"median_final", cell.median_final},
               {"q1_final", cell.q1_final},
               {"q3_final", cell.q3_final},
               {"tavg_seconds", cell.tavg_seconds},
               {"curve",
                json{{"evals", cell.evals},
                     {"median", cell.median_curve},
                     {"q1", cell.q1_curve},
                     {"q3", cell.q3_curve}}}};
    }
  }
  return json{{"version", kSoftwareVersion},
              {"problems", summary.problems},
              {"algorithms", summary.algorithms},
              {"cells", cells},
              {"rank_table", rank_table_json(summary.rank_table)}};
}

std::vector<fs::path> export_plots(const ExperimentSummary& summary,
                                   const fs::path& results_dir) {
  fs::create_directories(results_dir / "plots");
  std::vector<fs::path> written;
  for (const std::string& problem : summary.problems) {
    const auto pit = summary.cells.find(problem);
    if (pit == summary.cells.end()) continue;
    std::vector<SeriesBand> series;
    for (const std::string& algorithm : summary.algorithms) {
      const auto ait = pit->second.find(algorithm);
      if (ait == pit->second.end()) continue;
      const CellSummary& cell = ait->second;
      SeriesBand band;
      band.label = algorithm;
      band.x = cell.evals;
      band.median = cell.median_curve;
      if (cell.trials >= 2) {
        band.lower = cell.q1_curve;
        band.upper = cell.q3_curve;
      }
      series.push_back(std::move(band));
    }
    const fs::path file = results_dir / "plots" / (problem + ".svg");
    write_file_atomic(file, render_convergence_svg(problem, series));
    written.push_back(file);
  }
  return written;
}

json diagnose_values(const Eigen::VectorXd& values) {
  if (values.size() < 10) {
    throw TooFewPoints("diagnose: need at least 10 values, got " +
                       std::to_string(values.size()));
  }
  const OpcCurve curve = build_opc(values);
  return json{{"samples", values.size()},
              {"opc_type", to_string(curve.type)},
              {"signed_area", curve.signed_area},
              {"best", values.minCoeff()},
              {"worst", values.maxCoeff()}};
}

json diagnose_surrogate(const OpSurrogateModel& model,
                        const Eigen::MatrixXd& held_points_unit,
                        const Eigen::VectorXd& held_values) {
  if (held_points_unit.rows() != held_values.size()) {
    throw LengthMismatch("diagnose: held-out points/values count mismatch");
  }
  const Eigen::VectorXd scores = score(model, held_points_unit);
  const double rho = spearman_rho(scores, Eigen::VectorXd(-held_values));
  return json{{"held_out", held_values.size()},
              {"spearman_rho_vs_fitness", rho}};
}

json diagnose_function(const ObjectiveFunction& fn, int samples,
                       std::uint64_t seed, bool fit_surrogate) {
  if (samples < 10) {
    throw TooFewPoints("diagnose: need at least 10 samples, got " +
                       std::to_string(samples));
  }
  RngStream root(seed);
  RngStream sample_rng = root.fork("diagnose");
  const CandidateSet points =
      random_sampling(fn.dimension, samples, sample_rng);
  Eigen::VectorXd values(samples);
  for (int i = 0; i < samples; ++i) {
    values(i) =
        evaluate_noiseless(fn, from_unit(fn, points.points.row(i).transpose()));
  }
  json report = diagnose_values(values);
  report["function"] = fn.id();
  report["seed"] = seed;
  if (fit_surrogate) {
    const int held = std::max(1, samples / 4);
    const int train_n = samples - held;
    if (train_n < 2) {
      throw TooFewPoints("diagnose: too few samples to fit a surrogate");
    }
    Dataset train(points.points.topRows(train_n), values.head(train_n));
    const OpSurrogateModel model =
        fit(train, TrainConfig{}, root.fork("fit").root_seed());
    report["surrogate"] = diagnose_surrogate(
        model, points.points.bottomRows(held), values.tail(held));
    report["surrogate"]["train_samples"] = train_n;
  }
  return report;
}

}  // namespace opbo
