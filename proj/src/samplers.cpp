#include "sigre/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace sigre {

MhResult metropolis_hastings(const LogTargetFn& log_target, const MhConfig& cfg, Rng& rng) {
  const auto d = cfg.init.size();
  if (d == 0) throw InvalidArgument("metropolis_hastings: empty init");
  if (cfg.trial_proposal_std.size() != d) {
    throw DimensionMismatch("metropolis_hastings: trial proposal std size");
  }
  if (cfg.trial_steps < 2 || cfg.main_steps < 1 || cfg.thin < 1 || cfg.main_steps % cfg.thin != 0) {
    throw InvalidArgument("metropolis_hastings: bad step configuration");
  }
  Vec theta = cfg.init;
  double lp = log_target(theta);
  if (!std::isfinite(lp)) throw InvalidArgument("metropolis_hastings: log target not finite at init");

  MhResult res;

  // phase 1: diagonal proposals, used only to estimate Sigma
  Mat trial(cfg.trial_steps, d);
  std::size_t trial_accepts = 0;
  for (int s = 0; s < cfg.trial_steps; ++s) {
    Vec prop = theta;
    for (Eigen::Index k = 0; k < d; ++k) prop[k] += cfg.trial_proposal_std[k] * rng.normal();
    const double lp_prop = log_target(prop);
    const double u = rng.uniform();
    if (std::isfinite(lp_prop) && std::log(u > 0.0 ? u : 1e-300) < lp_prop - lp) {
      theta = std::move(prop);
      lp = lp_prop;
      ++trial_accepts;
    }
    trial.row(s) = theta.transpose();
  }
  res.trial_acceptance_rate = static_cast<double>(trial_accepts) / cfg.trial_steps;

  // Sigma from the second half of the trial chain, lightly regularized
  const auto half = cfg.trial_steps / 2;
  const Mat tail = trial.bottomRows(cfg.trial_steps - half);
  const Vec mean = tail.colwise().mean();
  Mat sigma = (tail.rowwise() - mean.transpose()).transpose() *
              (tail.rowwise() - mean.transpose()) / static_cast<double>(tail.rows() - 1);
  sigma.diagonal().array() += 1e-8;
  res.proposal_covariance = sigma;

  const double ell = 2.0 / std::sqrt(static_cast<double>(d));
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw NonFinite("metropolis_hastings: Sigma not factorizable");
  const Mat chol = llt.matrixL();

  // phase 2
  res.samples.reserve(static_cast<std::size_t>(cfg.main_steps / cfg.thin));
  std::size_t accepts = 0;
  for (int s = 1; s <= cfg.main_steps; ++s) {
    Vec z(d);
    for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
    Vec prop = theta + ell * (chol * z);
    const double lp_prop = log_target(prop);
    const double u = rng.uniform();
    if (std::isfinite(lp_prop) && std::log(u > 0.0 ? u : 1e-300) < lp_prop - lp) {
      theta = std::move(prop);
      lp = lp_prop;
      ++accepts;
    }
    if (s % cfg.thin == 0) res.samples.push_back(theta);
  }
  res.acceptance_rate = static_cast<double>(accepts) / cfg.main_steps;
  if (res.acceptance_rate < 0.001) {
    throw ZeroAcceptance("metropolis_hastings: acceptance rate " +
                         std::to_string(res.acceptance_rate) + " below 0.1%");
  }
  return res;
}

std::vector<Vec> sir_resample(const std::vector<Vec>& prior_samples,
                              const std::vector<double>& log_weights, const SirConfig& cfg,
                              Rng& rng) {
  if (prior_samples.size() != log_weights.size()) {
    throw DimensionMismatch("sir_resample: samples/weights length mismatch");
  }
  if (prior_samples.empty()) throw InvalidArgument("sir_resample: empty input");
  const double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(max_lw)) {
    throw AllWeightsDegenerate("sir_resample: every log-weight is -inf");
  }
  std::vector<double> cum(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - max_lw);
    cum[i] = acc;
  }
  std::vector<Vec> out;
  out.reserve(cfg.resample_draws);
  for (std::size_t k = 0; k < cfg.resample_draws; ++k) {
    const double u = rng.uniform() * acc;
    const auto pick = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    out.push_back(prior_samples[std::min(pick, prior_samples.size() - 1)]);
  }
  return out;
}

double abc_distance(const TimeSeries& a, const TimeSeries& b) {
  if (a.length() != b.length() || a.channels() != b.channels()) {
    throw DimensionMismatch("abc_distance: shape mismatch");
  }
  return (a.values - b.values).squaredNorm();
}

namespace detail {

Mat weighted_covariance(const std::vector<WeightedSample>& pop) {
  if (pop.empty()) throw InvalidArgument("weighted_covariance: empty population");
  const auto d = pop.front().theta.size();
  double wsum = 0.0;
  Vec mean = Vec::Zero(d);
  for (const auto& p : pop) {
    wsum += p.weight;
    mean += p.weight * p.theta;
  }
  if (!(wsum > 0.0)) throw AllWeightsDegenerate("weighted_covariance: zero weight sum");
  mean /= wsum;
  Mat cov = Mat::Zero(d, d);
  for (const auto& p : pop) {
    const Vec c = p.theta - mean;
    cov += (p.weight / wsum) * (c * c.transpose());
  }
  return cov;
}

}  // namespace detail

}  // namespace sigre
