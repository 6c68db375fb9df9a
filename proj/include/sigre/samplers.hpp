#ifndef SIGRE_SAMPLERS_HPP
#define SIGRE_SAMPLERS_HPP

#include <Eigen/Cholesky>
#include <functional>
#include <vector>

#include "sigre/rng.hpp"
#include "sigre/series.hpp"

namespace sigre {

// --- Metropolis-Hastings with a covariance-tuning trial phase ---

struct MhConfig {
  int trial_steps = 50000;
  int main_steps = 100000;
  int thin = 100;
  Vec init;
  /// diagonal proposal std for the trial phase; callers size it from the
  /// prior (10% of the support width, or the prior std for Gamma)
  Vec trial_proposal_std;
};

struct MhResult {
  std::vector<Vec> samples;  // main_steps / thin states
  double acceptance_rate = 0.0;  // main phase
  double trial_acceptance_rate = 0.0;
  Mat proposal_covariance;  // estimated Sigma (before the 2/sqrt(d) scaling)
};

using LogTargetFn = std::function<double(const Vec&)>;

/// Trial phase with diagonal proposals estimates Sigma from the second half
/// of the chain; the main phase proposes N(theta, (2/sqrt(d))^2 Sigma) and
/// retains every thin-th state. Throws ZeroAcceptance below 0.1% acceptance.
MhResult metropolis_hastings(const LogTargetFn& log_target, const MhConfig& cfg, Rng& rng);

// --- sampling-importance-resampling ---

struct SirConfig {
  std::size_t prior_draws = 50000;  // M
  std::size_t resample_draws = 1000;  // M~
};

std::vector<Vec> sir_resample(const std::vector<Vec>& prior_samples,
                              const std::vector<double>& log_weights, const SirConfig& cfg,
                              Rng& rng);

// --- adaptive SMC-ABC ---

struct SmcAbcConfig {
  std::size_t population = 500;
  double epsilon_decay = 0.8;
  std::size_t simulation_budget = 100000;
  double initial_epsilon = -1.0;  // <= 0 means "median of the initial distances"
};

struct WeightedSample {
  Vec theta;
  double weight;
};

struct SmcAbcResult {
  std::vector<WeightedSample> population;
  std::vector<double> epsilon_schedule;
  std::size_t simulations_used = 0;
  int rounds = 0;
};

/// sum_i |x_i - y_i|^2 over time steps (the ABC distance).
double abc_distance(const TimeSeries& a, const TimeSeries& b);

using SimulatorFn = std::function<TimeSeries(const Vec&, Rng&)>;

namespace detail {
Mat weighted_covariance(const std::vector<WeightedSample>& pop);
}

/// Adaptive population Monte Carlo ABC: hard accept at the current tolerance,
/// Gaussian perturbation kernel with covariance twice the weighted population
/// covariance, tolerance decaying by the configured factor each round. Stops
/// when the simulation budget cannot complete another round and returns the
/// last completed population.
template <typename PriorT>
SmcAbcResult smc_abc(const SimulatorFn& simulator, const TimeSeries& observation,
                     const PriorT& prior, const SmcAbcConfig& cfg, Rng& rng) {
  if (cfg.population < 2) throw InvalidArgument("smc_abc: population must be >= 2");
  if (!(cfg.epsilon_decay > 0.0 && cfg.epsilon_decay < 1.0)) {
    throw InvalidArgument("smc_abc: decay must be in (0, 1)");
  }
  if (cfg.simulation_budget < cfg.population) {
    throw BudgetTooSmall("smc_abc: budget smaller than one population");
  }

  SmcAbcResult res;
  std::vector<WeightedSample> pop;
  std::vector<double> distances;
  pop.reserve(cfg.population);
  distances.reserve(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    Vec theta = prior.sample(rng);
    const TimeSeries x = simulator(theta, rng);
    ++res.simulations_used;
    distances.push_back(abc_distance(x, observation));
    pop.push_back({std::move(theta), 1.0 / static_cast<double>(cfg.population)});
  }
  double epsilon;
  if (cfg.initial_epsilon > 0.0) {
    epsilon = cfg.initial_epsilon;
  } else {
    std::vector<double> sorted = distances;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    epsilon = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }

  while (res.simulations_used < cfg.simulation_budget) {
    epsilon *= cfg.epsilon_decay;
    Mat cov = 2.0 * detail::weighted_covariance(pop);
    cov.diagonal().array() += 1e-12;
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NonFinite("smc_abc: perturbation covariance not factorizable");
    }
    const Mat chol = llt.matrixL();

    // cumulative weights for resampling
    std::vector<double> cum(pop.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      acc += pop[i].weight;
      cum[i] = acc;
    }

    std::vector<WeightedSample> next;
    next.reserve(cfg.population);
    bool exhausted = false;
    while (next.size() < cfg.population) {
      if (res.simulations_used >= cfg.simulation_budget) {
        exhausted = true;
        break;
      }
      const double u = rng.uniform() * acc;
      const std::size_t pick =
          static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      const Vec& base = pop[std::min(pick, pop.size() - 1)].theta;
      Vec z(base.size());
      for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
      Vec proposal = base + chol * z;
      const double lp = prior.logpdf(proposal);
      if (!std::isfinite(lp)) continue;  // zero prior mass, no simulation spent
      const TimeSeries x = simulator(proposal, rng);
      ++res.simulations_used;
      if (abc_distance(x, observation) > epsilon) continue;
      // importance weight against the perturbation mixture
      double mix = 0.0;
      for (const auto& p : pop) {
        const Vec diff = proposal - p.theta;
        const Vec sol = chol.template triangularView<Eigen::Lower>().solve(diff);
        mix += p.weight * std::exp(-0.5 * sol.squaredNorm());
      }
      if (!(mix > 0.0)) continue;
      next.push_back({std::move(proposal), std::exp(lp) / mix});
    }
    if (exhausted || next.size() < cfg.population) break;
    double wsum = 0.0;
    for (const auto& p : next) wsum += p.weight;
    if (!(wsum > 0.0)) throw AllWeightsDegenerate("smc_abc: population weights vanished");
    for (auto& p : next) p.weight /= wsum;
    pop = std::move(next);
    res.epsilon_schedule.push_back(epsilon);
    ++res.rounds;
  }
  res.population = std::move(pop);
  return res;
}

}  // namespace sigre

#endif
