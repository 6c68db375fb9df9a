#include "sigre/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sigre {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::uint64_t fnv1a_str(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string cache_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SIGRE_CACHE_DIR"); env && *env) return env;
  return (fs::path(cfg.out_dir) / "cache").string();
}

MhConfig make_mh_config(const ExperimentConfig& cfg, const Model& model) {
  MhConfig mh;
  mh.trial_steps = cfg.mh_trial_steps;
  mh.main_steps = cfg.mh_main_steps;
  mh.thin = cfg.mh_thin;
  mh.init = model.theta_star;
  mh.trial_proposal_std = model.prior.proposal_scale();
  return mh;
}

}  // namespace

TimeSeries pseudo_observation(const Model& model) {
  Rng rng(0);  // reserved seed
  return model.simulate(model.theta_star, rng);
}

std::string cell_settings_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "cell-v1|" << to_string(cfg.model) << "|bmin=" << cfg.b_min() << "|trials="
     << cfg.tuning_trials << "|folds=" << cfg.cv_folds << "|q=" << cfg.q_override
     << "|dyadic=" << cfg.dyadic_order << "|norm=" << cfg.normalize << "|aug=" << cfg.time_augment
     << "|mh=" << cfg.mh_trial_steps << "," << cfg.mh_main_steps << "," << cfg.mh_thin
     << "|sir=" << cfg.sir_prior_draws << "," << cfg.sir_resample_draws << "|smc=" << cfg.smc_budget
     << "," << cfg.smc_population << "," << cfg.smc_decay << "|cap=" << cfg.metric_cap;
  std::ostringstream hex;
  hex << std::hex << fnv1a_str(os.str());
  return hex.str();
}

Dataset simulate_dataset(const Model& model, int n, std::uint64_t data_seed,
                         std::size_t* simulator_calls) {
  Dataset data;
  data.seed = data_seed;
  data.entries.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // one derived stream per entry, so results do not depend on scheduling
    Rng rng(derive_seed(data_seed, static_cast<std::uint64_t>(i)));
    Dataset::Entry e;
    e.theta = model.prior.sample(rng);
    e.series = model.simulate(e.theta, rng);
    if (simulator_calls) ++*simulator_calls;
    data.entries.push_back(std::move(e));
  }
  return data;
}

MethodConfig make_method_config(const ExperimentConfig& cfg, const std::string& method_label) {
  MethodConfig base = MethodConfig::from_label(method_label);
  base.model = cfg.model;
  base.sig.dyadic_order = cfg.dyadic_order;
  base.sig.normalize = cfg.normalize;
  base.sig.time_augment = cfg.time_augment;
  if (cfg.q_override > 0) {
    base.q = cfg.q_override;
  } else {
    base.q = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.b_min()) * (base.K + 1.0)));
  }
  return base;
}

SampleSet reference_posterior(const ExperimentConfig& cfg, const Model& model,
                              std::size_t* simulator_calls) {
  std::ostringstream key;
  key.precision(17);
  key << "ref-v1|" << to_string(cfg.model) << "|star=" << model.theta_star.transpose();
  if (cfg.model == ModelKind::Gse) {
    key << "|smc=" << cfg.smc_budget << "," << cfg.smc_population << "," << cfg.smc_decay
        << "|resample=" << cfg.sir_resample_draws;
  } else {
    key << "|mh=" << cfg.mh_trial_steps << "," << cfg.mh_main_steps << "," << cfg.mh_thin;
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a_str(key.str());
  const fs::path dir = cache_dir(cfg);
  fs::create_directories(dir);
  const fs::path file = dir / ("reference_" + to_string(cfg.model) + "_" + hex.str() + ".csv");

  SampleSet out;
  out.tag = "reference-" + to_string(cfg.model);
  if (fs::exists(file)) {
    out.points = load_samples_csv(file.string());
    return out;
  }

  const TimeSeries obs = pseudo_observation(model);
  if (cfg.model == ModelKind::Gse) {
    std::size_t calls = 0;
    const SimulatorFn sim = [&model, &calls](const Vec& theta, Rng& rng) {
      ++calls;
      return model.simulate(theta, rng);
    };
    SmcAbcConfig smc;
    smc.population = cfg.smc_population;
    smc.epsilon_decay = cfg.smc_decay;
    smc.simulation_budget = cfg.smc_budget;
    Rng rng(derive_seed(0x5e7e0ULL, fnv1a_str(key.str())));
    const SmcAbcResult res = smc_abc(sim, obs, model.prior, smc, rng);
    std::vector<Vec> thetas;
    std::vector<double> lws;
    thetas.reserve(res.population.size());
    for (const auto& p : res.population) {
      thetas.push_back(p.theta);
      lws.push_back(std::log(p.weight));
    }
    SirConfig sir{res.population.size(), cfg.sir_resample_draws};
    out.points = sir_resample(thetas, lws, sir, rng);
    if (simulator_calls) *simulator_calls += calls;
  } else {
    const LogTargetFn target = [&](const Vec& theta) {
      const double lp = model.prior.logpdf(theta);
      if (!std::isfinite(lp)) return lp;
      const double ll = cfg.model == ModelKind::Ou ? ou_loglik(obs, theta, model.ou)
                                                   : ma2_loglik(obs, theta);
      return ll + lp;
    };
    Rng rng(derive_seed(0x5e7e0ULL, fnv1a_str(key.str())));
    const MhResult res = metropolis_hastings(target, make_mh_config(cfg, model), rng);
    out.points = res.samples;
  }
  save_samples_csv(out.points, file.string());
  return out;
}

PosteriorDraw sample_posterior(const ExperimentConfig& cfg, const Model& model,
                               const TimeSeries& obs, const RatioEstimator& estimator, Rng& rng) {
  PosteriorDraw draw;
  const auto profile = estimator.logit_profile(obs);
  if (cfg.model == ModelKind::Gse) {
    std::vector<Vec> thetas;
    std::vector<double> lws;
    thetas.reserve(cfg.sir_prior_draws);
    lws.reserve(cfg.sir_prior_draws);
    for (std::size_t m = 0; m < cfg.sir_prior_draws; ++m) {
      Vec theta = estimator.prior.sample(rng);
      lws.push_back(profile(theta));
      thetas.push_back(std::move(theta));
    }
    SirConfig sir{cfg.sir_prior_draws, cfg.sir_resample_draws};
    draw.samples = sir_resample(thetas, lws, sir, rng);
  } else {
    const LogTargetFn target = [&](const Vec& theta) {
      const double lp = estimator.prior.logpdf(theta);
      if (!std::isfinite(lp)) return lp;
      return profile(theta) + lp;
    };
    const MhResult res = metropolis_hastings(target, make_mh_config(cfg, model), rng);
    draw.samples = res.samples;
    draw.acceptance_rate = res.acceptance_rate;
  }
  return draw;
}

ResultRecord run_cell(const ExperimentConfig& cfg, const Model& model, const TimeSeries& obs,
                      const SampleSet& reference, const std::string& method_label, int budget,
                      std::uint64_t seed, std::size_t* simulator_calls, CellLog* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t data_seed = derive_seed(seed, fnv1a_str("data") ^ static_cast<std::uint64_t>(budget));
  const Dataset data = simulate_dataset(model, budget, data_seed, simulator_calls);

  const MethodConfig base = make_method_config(cfg, method_label);
  TuneSpace space;
  space.trials = cfg.tuning_trials;
  space.folds = cfg.cv_folds;
  Rng train_rng(derive_seed(seed, fnv1a_str("train:" + method_label) ^ static_cast<std::uint64_t>(budget)));
  const TrainResult trained =
      train_ratio_estimator(data, obs, model.prior, base, space, train_rng);

  Rng sample_rng(derive_seed(seed, fnv1a_str("sample:" + method_label) ^ static_cast<std::uint64_t>(budget)));
  const PosteriorDraw draw = sample_posterior(cfg, model, obs, trained.estimator, sample_rng);

  SampleSet est;
  est.tag = method_label;
  est.points = draw.samples;
  const std::uint64_t metric_seed =
      derive_seed(seed, fnv1a_str("metric:" + method_label) ^ static_cast<std::uint64_t>(budget));

  ResultRecord rec;
  rec.method = method_label;
  rec.budget = budget;
  rec.seed = seed;
  rec.wasserstein = wasserstein_capped(est, reference, cfg.metric_cap, metric_seed);
  rec.mean_distance = mean_distance(est, reference);
  rec.config_hash = cell_settings_hash(cfg);
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time = std::chrono::duration<double>(t1 - t0).count();
  if (log) {
    log->method = method_label;
    log->budget = budget;
    log->seed = seed;
    log->wall_time = rec.wall_time;
    log->cv_logloss = trained.cv_logloss;
    log->acceptance_rate = draw.acceptance_rate;
  }
  return rec;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Model model = Model::make(cfg.model);
  const TimeSeries obs = pseudo_observation(model);

  ExperimentOutcome outcome;
  const SampleSet reference = reference_posterior(cfg, model, &outcome.reference_simulator_calls);

  fs::create_directories(cfg.out_dir);
  outcome.records_path = (fs::path(cfg.out_dir) / "records.csv").string();
  const std::string settings_hash = cell_settings_hash(cfg);

  // resumability: records carrying the current settings hash are kept as-is
  std::map<std::string, ResultRecord> existing;
  if (fs::exists(outcome.records_path)) {
    for (const auto& r : load_records_csv(outcome.records_path)) {
      if (r.config_hash == settings_hash) {
        existing[r.method + "|" + std::to_string(r.budget) + "|" + std::to_string(r.seed)] = r;
      }
    }
  }

  for (const auto& method : cfg.methods) {
    for (const int budget : cfg.budgets) {
      for (const std::uint64_t seed : cfg.seeds) {
        const std::string key =
            method + "|" + std::to_string(budget) + "|" + std::to_string(seed);
        if (const auto it = existing.find(key); it != existing.end()) {
          outcome.records.push_back(it->second);
          ++outcome.skipped_cells;
          continue;
        }
        CellLog log;
        try {
          outcome.records.push_back(run_cell(cfg, model, obs, reference, method, budget, seed,
                                             &outcome.cell_simulator_calls, &log));
        } catch (const std::exception& err) {
          log.method = method;
          log.budget = budget;
          log.seed = seed;
          log.error = err.what();
          ++outcome.failed_cells;
        }
        outcome.logs.push_back(log);
        save_records_csv(outcome.records, outcome.records_path);  // persist as we go
      }
    }
  }
  save_records_csv(outcome.records, outcome.records_path);

  // timing and diagnostics go to a sidecar, keeping the CSV deterministic
  {
    std::ofstream f(fs::path(cfg.out_dir) / "cells.jsonl");
    for (const auto& log : outcome.logs) {
      json j;
      j["method"] = log.method;
      j["budget"] = log.budget;
      j["seed"] = log.seed;
      j["wall_time"] = log.wall_time;
      j["cv_logloss"] = log.cv_logloss;
      j["acceptance_rate"] = log.acceptance_rate;
      if (!log.error.empty()) j["error"] = log.error;
      f << j.dump() << "\n";
    }
  }
  cfg.save((fs::path(cfg.out_dir) / "config.toml").string());
  if (!outcome.records.empty()) {
    emit_report(outcome.records, cfg.out_dir, cfg.bootstrap_replicates);
  }
  return outcome;
}

}  // namespace sigre
