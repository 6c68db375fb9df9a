#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sigre/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sigre;

namespace {

Vec parse_theta(const std::string& text) {
  std::vector<double> values;
  std::istringstream is(text);
  std::string cell;
  while (std::getline(is, cell, ',')) values.push_back(std::stod(cell));
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

TimeSeries load_observation(const std::string& path) {
  return load_series_csv(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SignatuRE: amortised likelihood-to-evidence ratio estimation for time series"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a dataset from the prior predictive");
  std::string sim_model = "ou", sim_theta, sim_out = "data.json", sim_obs_out;
  int sim_n = 100;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "ou|ma2|gse")->required();
  sim->add_option("--theta", sim_theta, "fixed parameters t1,t2 (default: prior draws)");
  sim->add_option("--n", sim_n, "number of simulations");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output dataset JSON");
  sim->add_option("--obs", sim_obs_out, "also write the pseudo-observation (seed 0) CSV here");

  // train
  auto* train = app.add_subcommand("train", "fit a ratio estimator on a dataset");
  std::string tr_model = "ou", tr_data, tr_obs, tr_method = "signature", tr_out = "estimator.json";
  int tr_trials = 30, tr_folds = 5;
  double tr_K = 0.0;
  std::size_t tr_q = 0;
  std::uint64_t tr_seed = 1;
  train->add_option("--model", tr_model, "ou|ma2|gse")->required();
  train->add_option("--data", tr_data, "training dataset JSON")->required();
  train->add_option("--obs", tr_obs, "observation CSV")->required();
  train->add_option("--method", tr_method, "signature|k2|bespoke-rbf, optional -<K> suffix");
  train->add_option("--trials", tr_trials, "tuning trials");
  train->add_option("--folds", tr_folds, "cross-validation folds");
  train->add_option("--K", tr_K, "negative-pair proportion (overrides the label suffix)");
  train->add_option("--q", tr_q, "Nystroem landmark budget (0 = all training pairs)");
  train->add_option("--seed", tr_seed, "rng seed");
  train->add_option("--out", tr_out, "output estimator JSON");

  // infer
  auto* infer = app.add_subcommand("infer", "sample the amortised posterior");
  std::string in_model = "ou", in_est, in_data, in_obs, in_out = "samples.csv", in_sampler;
  std::uint64_t in_seed = 1;
  infer->add_option("--model", in_model, "ou|ma2|gse")->required();
  infer->add_option("--estimator", in_est, "estimator JSON")->required();
  infer->add_option("--data", in_data, "dataset JSON the estimator was trained on")->required();
  infer->add_option("--obs", in_obs, "observation CSV")->required();
  infer->add_option("--sampler", in_sampler, "mh|sir (default: mh for ou/ma2, sir for gse)");
  infer->add_option("--seed", in_seed, "rng seed");
  infer->add_option("--out", in_out, "output samples CSV");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "compare two posterior sample sets");
  std::string ev_a, ev_b, ev_out;
  eval->add_option("--a", ev_a, "first samples CSV")->required();
  eval->add_option("--b", ev_b, "second samples CSV")->required();
  eval->add_option("--out", ev_out, "output JSON (stdout if omitted)");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "run a full experiment grid from a TOML config");
  std::string bn_config, bn_out;
  bench->add_option("--config", bn_config, "experiment TOML")->required();
  bench->add_option("--out", bn_out, "override the configured output directory");

  // report
  auto* rep = app.add_subcommand("report", "summaries and plots from a records CSV");
  std::string rp_records, rp_out = "report";
  rep->add_option("--records", rp_records, "records CSV")->required();
  rep->add_option("--out", rp_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const Model model = Model::make(model_kind_from_string(sim_model));
      Dataset data;
      if (sim_theta.empty()) {
        data = simulate_dataset(model, sim_n, sim_seed);
      } else {
        const Vec theta = parse_theta(sim_theta);
        data.seed = sim_seed;
        for (int i = 0; i < sim_n; ++i) {
          Rng rng(derive_seed(sim_seed, static_cast<std::uint64_t>(i)));
          data.entries.push_back({model.simulate(theta, rng), theta});
        }
      }
      save_dataset_json(data, sim_out);
      std::cout << "wrote " << data.size() << " simulations to " << sim_out << "\n";
      if (!sim_obs_out.empty()) {
        save_series_csv(pseudo_observation(model), sim_obs_out);
        std::cout << "wrote pseudo-observation to " << sim_obs_out << "\n";
      }
    } else if (*train) {
      const Model model = Model::make(model_kind_from_string(tr_model));
      const Dataset data = load_dataset_json(tr_data);
      const TimeSeries obs = load_observation(tr_obs);
      MethodConfig base = MethodConfig::from_label(tr_method);
      base.model = model.kind;
      if (tr_K > 0.0) base.K = tr_K;
      base.q = tr_q;
      TuneSpace space;
      space.trials = tr_trials;
      space.folds = tr_folds;
      Rng rng(tr_seed);
      const TrainResult result = train_ratio_estimator(data, obs, model.prior, base, space, rng);
      std::ofstream f(tr_out);
      f << estimator_to_json(result) << "\n";
      std::cout << "trained " << result.config.label() << " (cv log-loss " << result.cv_logloss
                << ", " << result.estimator.nystroem.retained << " components) -> " << tr_out
                << "\n";
    } else if (*infer) {
      const Model model = Model::make(model_kind_from_string(in_model));
      const Dataset data = load_dataset_json(in_data);
      const TimeSeries obs = load_observation(in_obs);
      std::ifstream ef(in_est);
      if (!ef) throw Error("cannot open: " + in_est);
      std::ostringstream ss;
      ss << ef.rdbuf();
      const TrainResult result = estimator_from_json(ss.str(), data, obs);
      ExperimentConfig cfg;
      cfg.model = model.kind;
      Rng rng(in_seed);
      std::string sampler = in_sampler;
      if (sampler.empty()) sampler = model.kind == ModelKind::Gse ? "sir" : "mh";
      PosteriorDraw draw;
      if (sampler == "sir") {
        const auto profile = result.estimator.logit_profile(obs);
        std::vector<Vec> thetas;
        std::vector<double> lws;
        for (std::size_t m = 0; m < cfg.sir_prior_draws; ++m) {
          Vec theta = result.estimator.prior.sample(rng);
          lws.push_back(profile(theta));
          thetas.push_back(std::move(theta));
        }
        draw.samples = sir_resample(thetas, lws, {cfg.sir_prior_draws, cfg.sir_resample_draws}, rng);
      } else if (sampler == "mh") {
        draw = sample_posterior(cfg, model, obs, result.estimator, rng);
      } else {
        throw InvalidArgument("unknown sampler: " + sampler);
      }
      save_samples_csv(draw.samples, in_out);
      json sidecar;
      sidecar["sampler"] = sampler;
      sidecar["seed"] = in_seed;
      sidecar["n_samples"] = draw.samples.size();
      sidecar["acceptance_rate"] = draw.acceptance_rate;
      sidecar["estimator"] = in_est;
      sidecar["config_hash"] = result.config_hash;
      std::ofstream sf(in_out + ".json");
      sf << sidecar.dump(2) << "\n";
      std::cout << "wrote " << draw.samples.size() << " samples to " << in_out << "\n";
    } else if (*eval) {
      SampleSet a, b;
      a.points = load_samples_csv(ev_a);
      b.points = load_samples_csv(ev_b);
      json out;
      out["w1"] = wasserstein(a, b);
      out["mean_dist"] = mean_distance(a, b);
      out["n_a"] = a.points.size();
      out["n_b"] = b.points.size();
      if (ev_out.empty()) {
        std::cout << out.dump(2) << "\n";
      } else {
        std::ofstream f(ev_out);
        f << out.dump(2) << "\n";
        std::cout << "wrote " << ev_out << "\n";
      }
    } else if (*bench) {
      ExperimentConfig cfg = ExperimentConfig::load(bn_config);
      if (!bn_out.empty()) cfg.out_dir = bn_out;
      const ExperimentOutcome outcome = run_experiment(cfg);
      std::cout << "records: " << outcome.records.size() << " (skipped " << outcome.skipped_cells
                << ", failed " << outcome.failed_cells << ")\n"
                << "simulator calls: " << outcome.cell_simulator_calls << " cells, "
                << outcome.reference_simulator_calls << " reference\n"
                << "results in " << cfg.out_dir << "\n";
      return outcome.failed_cells == 0 ? 0 : 1;
    } else if (*rep) {
      const auto records = load_records_csv(rp_records);
      const ReportFiles files = emit_report(records, rp_out);
      std::cout << "wrote " << files.summary_csv << ", " << files.median_csv << ", "
                << files.median_md << ",\n      " << files.wasserstein_svg << ", "
                << files.mean_distance_svg << "\n";
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
