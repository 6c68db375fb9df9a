#ifndef SIGRE_RATIO_HPP
#define SIGRE_RATIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigre/kernels.hpp"
#include "sigre/nystroem.hpp"
#include "sigre/rng.hpp"
#include "sigre/simulators.hpp"

namespace sigre {

/// Index pair into Dataset entries: joint pairs have theta_idx == series_idx,
/// marginal (negative) pairs have theta_idx != series_idx.
struct PairRef {
  int series_idx;
  int theta_idx;
};

struct TrainingSet {
  std::vector<PairRef> pairs;  // positives first, then negatives
  std::vector<int> labels;     // 1 joint, 0 marginal
  double K = 1.0;
  std::size_t positives = 0;
  // derangements applied per pass, recorded for reproducibility
  std::vector<std::vector<int>> provenance;
};

/// Marginal pairs built from the given entry indices: full passes use each
/// series once (without replacement) and assign parameters by a random
/// derangement, so no pair is accidentally joint.
std::vector<PairRef> negative_pairs(const std::vector<int>& indices, std::size_t count, Rng& rng,
                                    std::vector<std::vector<int>>* provenance = nullptr);

TrainingSet build_training_set(const Dataset& data, double K, Rng& rng);

// --- regularized logistic regression ---

struct LogisticModel {
  Vec weights;
  double intercept = 0.0;
  double omega = 1.0;
  bool converged = false;
  int iterations = 0;
};

/// sum_i log(1 + exp(-y_i (w.x_i + b))) + (omega/2) |w|^2 with y = 2z - 1;
/// the intercept is the last packed coordinate and is not regularized.
struct LogisticObjective {
  const Mat& features;
  const std::vector<int>& labels;
  double omega;

  double value_and_grad(const Vec& wb, Vec& grad) const;
};

LogisticModel fit_logistic(const Mat& features, const std::vector<int>& labels, double omega,
                           int max_iterations = 500, double grad_tol = 1e-6);

// --- the decision -> ratio -> posterior chain ---

struct RatioEstimator {
  NystroemMap nystroem;
  LogisticModel model;
  Prior prior;

  double logit(const PairSample& v) const;
  double decision(const TimeSeries& x, const Vec& theta) const;
  /// log r(x, theta); equals the classifier logit exactly.
  double log_ratio(const TimeSeries& x, const Vec& theta) const;
  double unnormalized_posterior(const TimeSeries& x, const Vec& theta) const;

  /// Precomputes the series factor against every landmark so repeated
  /// evaluations at fixed x cost one parameter-kernel sweep each.
  std::function<double(const Vec&)> logit_profile(const TimeSeries& x) const;
};

// --- method configuration and tuning ---

enum class MethodKind { Signature, K2, BespokeRbf };

MethodKind method_kind_from_string(const std::string& name);
std::string to_string(MethodKind kind);

/// Per-dimension standardization plus median-heuristic scale for the RBF
/// baseline over bespoke summary statistics.
struct BespokeStandardizer {
  Vec means;
  Vec stds;
  double scale = 1.0;
};

struct MethodConfig {
  MethodKind kind = MethodKind::Signature;
  ModelKind model = ModelKind::Ou;  // selects the bespoke summary set
  double K = 1.0;

  SignatureKernelConfig sig;  // static scale resolved from the observation
  K2KernelConfig k2;
  std::optional<BespokeStandardizer> bespoke;

  Vec lengthscales;  // parameter-kernel lengthscales (tuned)
  double omega = 1.0;
  std::size_t q = 0;  // Nystroem landmark budget; 0 means all training pairs
  double jitter = 1e-8;

  /// "signature", "k2", "bespoke-rbf", with "-<K>" appended when K != 1.
  std::string label() const;
  /// Parses labels of the above form.
  static MethodConfig from_label(const std::string& label);
};

struct TuneSpace {
  double lengthscale_lo = 1e-3, lengthscale_hi = 1e3;
  double omega_lo = 1e-5, omega_hi = 1e4;
  double epsilon_lo = 1e-3, epsilon_hi = 1e3;
  int folds = 5;
  int trials = 30;
  // landmark budget for the fold models during tuning; 0 inherits the
  // method's q. Smaller caps keep the per-trial eigendecompositions cheap.
  std::size_t landmark_cap = 0;
};

/// Cross-validation folds over the positive indices; negatives are rebuilt
/// inside each fold from that fold's members only.
struct CvFold {
  std::vector<int> train_positive;    // dataset entry indices
  std::vector<int> heldout_positive;  // dataset entry indices
  std::vector<PairRef> train_negative;
  std::vector<PairRef> heldout_negative;
};

std::vector<CvFold> make_cv_folds(std::size_t n, double K, int folds, Rng& rng);

/// Series-kernel factor values over the dataset (and against the observation),
/// computed once; hyperparameter-free for the signature and bespoke methods,
/// stored as MMD^2 for K2 so epsilon can vary per tuning trial.
struct SeriesCache {
  bool is_mmd = false;
  Mat gram;        // N x N
  Vec obs_column;  // N
  double factor(int i, int j, double epsilon) const {
    return is_mmd ? std::exp(-gram(i, j) / epsilon) : gram(i, j);
  }
  double obs_factor(int i, double epsilon) const {
    return is_mmd ? std::exp(-obs_column[i] / epsilon) : obs_column[i];
  }
};

SeriesCache build_series_cache(const Dataset& data, const TimeSeries& observation,
                               const MethodConfig& cfg);

struct TuneResult {
  MethodConfig config;
  double cv_logloss = 0.0;
  int best_trial = -1;
  std::vector<double> trial_losses;
};

TuneResult tune(const TuneSpace& space, const Dataset& data, const SeriesCache& cache,
                const MethodConfig& base, Rng& rng);

struct TrainResult {
  RatioEstimator estimator;
  MethodConfig config;  // with tuned hyperparameters filled in
  double cv_logloss = 0.0;
  TrainingSet training;
  std::vector<PairRef> landmark_refs;
  std::string config_hash;
};

/// Full pipeline: cache, tune, final fit. The observation fixes the static
/// kernel scale (signature), the chi bandwidth (k2) and the summary
/// standardization (bespoke).
TrainResult train_ratio_estimator(const Dataset& data, const TimeSeries& observation,
                                  const Prior& prior, const MethodConfig& base,
                                  const TuneSpace& space, Rng& rng);

/// Resolves observation-dependent kernel parameters without training.
MethodConfig resolve_method_config(const MethodConfig& base, const TimeSeries& observation);

BespokeStandardizer make_bespoke_standardizer(const Dataset& data, ModelKind model);

std::string config_hash_hex(const MethodConfig& cfg, const Prior& prior);

std::string estimator_to_json(const TrainResult& result);
TrainResult estimator_from_json(const std::string& text, const Dataset& data,
                                const TimeSeries& observation);

}  // namespace sigre

#endif
