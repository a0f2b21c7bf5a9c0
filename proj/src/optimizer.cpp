#include "opbo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "opbo/errors.hpp"
#include "opbo/sampling.hpp"

namespace opbo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int resolve_candidate_size(const RunConfig& config) {
  return config.candidate_size > 0 ? config.candidate_size
                                   : config.objective.dimension * 10;
}

void validate_run_config(const RunConfig& config, int n_candidates, int g) {
  if (config.initial_size < 1) {
    throw ConfigError("run config: initial_size must be >= 1");
  }
  if (config.iterations < 1) {
    throw ConfigError("run config: iterations must be >= 1");
  }
  if (g < 1 || n_candidates < g) {
    throw ConfigError("run config: need candidate_size >= good_enough_size >= 1");
  }
  if (config.framework == Framework::StandardBO &&
      config.surrogate != SurrogateKind::GP) {
    throw ConfigError("run config: the standard loop uses the GP surrogate");
  }
}

AcquisitionSpec resolve_acquisition(const RunConfig& config) {
  if (config.acquisition) {
    return *config.acquisition;
  }
  AcquisitionSpec spec;
  spec.kind = config.surrogate == SurrogateKind::GP
                  ? AcquisitionKind::ThompsonSampling
                  : AcquisitionKind::GreedyScore;
  return spec;
}

}  // namespace

std::string to_string(Framework framework) {
  switch (framework) {
    case Framework::StandardBO: return "bo";
    case Framework::OPBO: return "opbo";
    case Framework::TrustRegion: return "turbo";
  }
  throw Error("to_string: invalid Framework");
}

Framework framework_from_string(const std::string& s) {
  if (s == "bo") return Framework::StandardBO;
  if (s == "opbo") return Framework::OPBO;
  if (s == "turbo") return Framework::TrustRegion;
  throw ConfigError("unknown framework: \"" + s + "\"");
}

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::OP: return "op";
    case SurrogateKind::GP: return "gp";
    case SurrogateKind::NN: return "nn";
  }
  throw Error("to_string: invalid SurrogateKind");
}

SurrogateKind surrogate_kind_from_string(const std::string& s) {
  if (s == "op") return SurrogateKind::OP;
  if (s == "gp") return SurrogateKind::GP;
  if (s == "nn") return SurrogateKind::NN;
  throw ConfigError("unknown surrogate: \"" + s + "\"");
}

TrustRegionState update_trust_region(const TrustRegionState& state,
                                     double batch_best, double incumbent) {
  TrustRegionState next = state;
  next.restart = false;
  const bool success =
      batch_best < incumbent - 1e-8 * std::abs(incumbent);
  if (success) {
    next.success_count = state.success_count + 1;
    next.failure_count = 0;
    if (next.success_count >= next.success_tolerance) {
      next.side_length = std::min(2.0 * next.side_length, next.max_side_length);
      next.success_count = 0;
    }
  } else {
    next.failure_count = state.failure_count + 1;
    next.success_count = 0;
    if (next.failure_count >= next.failure_tolerance) {
      next.side_length *= 0.5;
      next.failure_count = 0;
    }
  }
  if (next.side_length < next.min_side_length) {
    next.restart = true;
  }
  return next;
}

namespace {

/// Shared loop for all three frameworks. StandardBO is the g = 1, GP-only
/// special case; TrustRegion adds region-restricted candidates and restarts.
OptimizationTrace run_engine(const RunConfig& config) {
  const int d = config.objective.dimension;
  const int n_candidates = resolve_candidate_size(config);
  const int g = config.framework == Framework::StandardBO
                    ? 1
                    : config.good_enough_size;
  validate_run_config(config, n_candidates, g);
  const AcquisitionSpec acquisition = resolve_acquisition(config);
  const bool trust_region = config.framework == Framework::TrustRegion;

  const auto run_start = Clock::now();
  const RngStream root(config.seed);
  Evaluator evaluator(config.objective, root.fork("noise"));

  OptimizationTrace trace;

  // Initial design, shared by every framework.
  RngStream init_rng = root.fork("init");
  const CandidateSet init = latin_hypercube(d, config.initial_size, init_rng);
  Dataset all_data(d);
  for (Eigen::Index i = 0; i < init.points.rows(); ++i) {
    const auto record = evaluator.evaluate_unit(init.points.row(i).transpose());
    all_data.append(init.points.row(i).transpose(), record.value);
  }
  trace.initial_incumbent = all_data.values().minCoeff();

  // The trust region fits on its own epoch's data and re-seeds it on restart;
  // the plain loops fit on everything.
  Dataset region_data = all_data;

  TrustRegionState tr_state;
  tr_state.failure_tolerance = std::max(5, (d + g - 1) / g);
  tr_state.center = region_data.points().row(region_data.argmin()).transpose();
  bool restart_pending = false;

  OpSurrogateModel previous_op;
  bool have_previous_op = false;

  for (int r = 1; r <= config.iterations; ++r) {
    const auto iter_start = Clock::now();
    IterationRecord rec;
    rec.iteration = r;
    const double incumbent_before = all_data.values().minCoeff();

    if (trust_region && restart_pending) {
      // Restart round: k fresh space-filling points, no surrogate involved.
      RngStream restart_rng = root.fork("restart:" + std::to_string(r));
      const CandidateSet fresh =
          latin_hypercube(d, config.initial_size, restart_rng);
      region_data = Dataset(d);
      for (Eigen::Index i = 0; i < fresh.points.rows(); ++i) {
        const auto record =
            evaluator.evaluate_unit(fresh.points.row(i).transpose());
        all_data.append(fresh.points.row(i).transpose(), record.value);
        region_data.append(fresh.points.row(i).transpose(), record.value);
      }
      tr_state = TrustRegionState{};
      tr_state.failure_tolerance = std::max(5, (d + g - 1) / g);
      tr_state.center =
          region_data.points().row(region_data.argmin()).transpose();
      restart_pending = false;
      have_previous_op = false;

      rec.suggested = fresh.points;
      rec.observed = region_data.values();
      rec.batch_best = region_data.values().minCoeff();
      rec.incumbent = all_data.values().minCoeff();
      rec.cumulative_evaluations = evaluator.evaluations();
      rec.trust_region_side = tr_state.side_length;
      rec.iter_seconds = seconds_since(iter_start);
      trace.iterations.push_back(std::move(rec));
      continue;
    }

    const Dataset& fit_data = trust_region ? region_data : all_data;
    const std::uint64_t fit_seed =
        root.fork("fit:" + std::to_string(r)).root_seed();

    // Fit the configured surrogate.
    const auto fit_start = Clock::now();
    Surrogate surrogate;
    switch (config.surrogate) {
      case SurrogateKind::OP: {
        OpSurrogateModel model;
        if (config.warm_start && have_previous_op) {
          TrainConfig warm = config.train;
          warm.seed = fit_seed;
          model = refit_warm(previous_op, fit_data, warm);
        } else {
          model = fit(fit_data, config.train, fit_seed);
        }
        if (!model.epoch_loss.empty()) {
          rec.fit_final_loss = model.epoch_loss.back();
        }
        previous_op = model;
        have_previous_op = true;
        surrogate = std::move(model);
        break;
      }
      case SurrogateKind::GP: {
        GpFitConfig gp_config;
        gp_config.max_points = config.gp_max_points;
        gp_config.learn_noise = config.objective.noise_std > 0.0;
        GpModel model = fit_gp(fit_data, gp_config);
        rec.gp = GpIterationInfo{model.lengthscale, model.signal_variance,
                                 model.noise_variance,
                                 model.log_marginal_likelihood};
        surrogate = std::move(model);
        break;
      }
      case SurrogateKind::NN: {
        NnSurrogateModel model = fit_nn(fit_data, config.train, fit_seed);
        if (!model.epoch_loss.empty()) {
          rec.fit_final_loss = model.epoch_loss.back();
        }
        surrogate = std::move(model);
        break;
      }
    }
    rec.fit_seconds = seconds_since(fit_start);

    // Candidates, acquisition, good-enough batch.
    RngStream cand_rng = root.fork("candidates:" + std::to_string(r));
    const CandidateSet candidates =
        trust_region
            ? trust_region_candidates(tr_state.center, tr_state.side_length, d,
                                      n_candidates, cand_rng)
            : latin_hypercube(d, n_candidates, cand_rng);
    RngStream acquire_rng = root.fork("acquire:" + std::to_string(r));
    const Eigen::VectorXd values =
        acquire(surrogate, candidates, acquisition, fit_data, acquire_rng);
    const GoodEnoughSet batch = select_top_g(values, candidates, g);

    Eigen::VectorXd observed(g);
    for (int i = 0; i < g; ++i) {
      const auto record =
          evaluator.evaluate_unit(batch.points.row(i).transpose());
      observed(i) = record.value;
      all_data.append(batch.points.row(i).transpose(), record.value);
      if (trust_region) {
        region_data.append(batch.points.row(i).transpose(), record.value);
      }
    }

    rec.suggested = batch.points;
    rec.observed = observed;
    rec.batch_best = observed.minCoeff();
    rec.incumbent = all_data.values().minCoeff();
    rec.cumulative_evaluations = evaluator.evaluations();

    if (trust_region) {
      tr_state = update_trust_region(tr_state, rec.batch_best, incumbent_before);
      tr_state.center =
          region_data.points().row(region_data.argmin()).transpose();
      restart_pending = tr_state.restart;
      rec.trust_region_side = tr_state.side_length;
    }

    rec.iter_seconds = seconds_since(iter_start);
    trace.iterations.push_back(std::move(rec));
  }

  const Eigen::Index best = all_data.argmin();
  trace.best_point_unit = all_data.points().row(best).transpose();
  trace.best_point = from_unit(config.objective, trace.best_point_unit);
  trace.best_value = all_data.values()(best);
  trace.total_evaluations = evaluator.evaluations();
  trace.total_seconds = seconds_since(run_start);
  return trace;
}

}  // namespace

OptimizationTrace run_standard_bo(const RunConfig& config) {
  if (config.framework != Framework::StandardBO) {
    throw ConfigError("run_standard_bo: framework must be \"bo\"");
  }
  return run_engine(config);
}

OptimizationTrace run_opbo(const RunConfig& config) {
  if (config.framework != Framework::OPBO) {
    throw ConfigError("run_opbo: framework must be \"opbo\"");
  }
  return run_engine(config);
}

OptimizationTrace run_trust_region(const RunConfig& config) {
  if (config.framework != Framework::TrustRegion) {
    throw ConfigError("run_trust_region: framework must be \"turbo\"");
  }
  return run_engine(config);
}

OptimizationTrace run(const RunConfig& config) { return run_engine(config); }

}  // namespace opbo
