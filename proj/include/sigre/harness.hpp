#ifndef SIGRE_HARNESS_HPP
#define SIGRE_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "sigre/config.hpp"
#include "sigre/metrics.hpp"
#include "sigre/ratio.hpp"
#include "sigre/report.hpp"
#include "sigre/samplers.hpp"

namespace sigre {

struct CellLog {
  std::string method;
  int budget = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  double cv_logloss = 0.0;
  double acceptance_rate = 0.0;  // MH cells only
  std::string error;             // empty on success
};

struct ExperimentOutcome {
  std::vector<ResultRecord> records;
  std::vector<CellLog> logs;
  std::size_t cell_simulator_calls = 0;
  std::size_t reference_simulator_calls = 0;
  std::size_t skipped_cells = 0;
  std::size_t failed_cells = 0;
  std::string records_path;
};

/// Observation simulated at theta* with the reserved seed 0.
TimeSeries pseudo_observation(const Model& model);

/// Settings hash shared by every cell of the experiment (grid axes excluded).
std::string cell_settings_hash(const ExperimentConfig& cfg);

/// Reference posterior samples: exact-likelihood MH for OU/MA2, SMC-ABC plus
/// resampling for GSE. Cached on disk under SIGRE_CACHE_DIR (or
/// <out_dir>/cache) keyed by a content hash of the relevant settings.
SampleSet reference_posterior(const ExperimentConfig& cfg, const Model& model,
                              std::size_t* simulator_calls);

/// One (method, budget, seed) cell: simulate, train, sample, score.
ResultRecord run_cell(const ExperimentConfig& cfg, const Model& model, const TimeSeries& obs,
                      const SampleSet& reference, const std::string& method_label, int budget,
                      std::uint64_t seed, std::size_t* simulator_calls, CellLog* log);

/// The full grid with resumability: cells already present in
/// <out_dir>/records.csv under a matching settings hash are skipped.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// --- building blocks shared with the CLI ---

Dataset simulate_dataset(const Model& model, int n, std::uint64_t data_seed,
                         std::size_t* simulator_calls = nullptr);

MethodConfig make_method_config(const ExperimentConfig& cfg, const std::string& method_label);

struct PosteriorDraw {
  std::vector<Vec> samples;
  double acceptance_rate = 0.0;  // MH only
};

/// MH over the amortised ratio for OU/MA2, SIR for GSE.
PosteriorDraw sample_posterior(const ExperimentConfig& cfg, const Model& model,
                               const TimeSeries& obs, const RatioEstimator& estimator,
                               Rng& rng);

}  // namespace sigre

#endif
