#ifndef SIGRE_SIMULATORS_HPP
#define SIGRE_SIMULATORS_HPP

#include <string>
#include <variant>
#include <vector>

#include "sigre/rng.hpp"
#include "sigre/series.hpp"

namespace sigre {

enum class ModelKind { Ou, Ma2, Gse };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

// --- priors ---

struct UniformBox {
  Vec lows;
  Vec highs;
};

/// Uniform over the MA(2) identifiability triangle theta1 + theta2 > -1,
/// theta1 - theta2 < 1, theta2 < 1 (vertices (-2,1), (2,1), (0,-1), area 4).
struct TriangleMa2 {};

/// Independent Gamma coordinates, shape/scale parameterisation.
struct GammaProduct {
  Vec shapes;
  Vec scales;
};

class Prior {
 public:
  Prior() = default;
  explicit Prior(UniformBox box);
  explicit Prior(TriangleMa2 tri);
  explicit Prior(GammaProduct gp);

  int dim() const;
  Vec sample(Rng& rng) const;
  double logpdf(const Vec& theta) const;
  bool in_support(const Vec& theta) const { return std::isfinite(logpdf(theta)); }

  /// Per-dimension scale used to size trial MH proposals: 10% of the support
  /// width for bounded priors, the prior standard deviation for Gamma.
  Vec proposal_scale() const;

  static Prior for_model(ModelKind kind);

  std::string to_json_string() const;
  static Prior from_json_string(const std::string& text);

 private:
  std::variant<UniformBox, TriangleMa2, GammaProduct> prior_;
};

// --- simulators ---

struct OuConfig {
  double dt = 0.2;
  int steps = 50;  // emitted length is steps + 1, x0 included
  double x0 = 0.0;
};

struct Ma2Config {
  int length = 50;
};

struct GseConfig {
  int population = 100;
  int initial_infected = 5;
  double obs_dt = 0.5;
  int obs_count = 100;  // emitted length is obs_count + 1
};

/// x_i = theta1 e^{theta2} dt + (1 - theta1 dt) x_{i-1} + eps_i / 2 with
/// eps_i ~ N(0, dt); deterministic given the innovation vector.
TimeSeries simulate_ou_path(const Vec& theta, const OuConfig& cfg, const Vec& innovations);
TimeSeries simulate_ou(const Vec& theta, const OuConfig& cfg, Rng& rng);

/// Gaussian transition log-density conditioned on x0.
double ou_loglik(const TimeSeries& x, const Vec& theta, const OuConfig& cfg = {});

/// x_t = eps_t + theta1 eps_{t-1} + theta2 eps_{t-2}; innovations has
/// length + 2 entries (two burn-in draws first).
TimeSeries simulate_ma2_path(const Vec& theta, const Ma2Config& cfg, const Vec& innovations);
TimeSeries simulate_ma2(const Vec& theta, const Ma2Config& cfg, Rng& rng);

/// Zero-mean Gaussian log-density with the banded MA(2) covariance
/// (diagonal 1 + t1^2 + t2^2, band one t1 + t1 t2, band two t2), via a
/// banded Cholesky factorization. Returns -inf when not positive definite.
double ma2_loglik(const TimeSeries& x, const Vec& theta);

struct GseEvent {
  double time;
  int susceptible;
  int infected;
};

/// Exact Gillespie simulation with infection rate beta*X*Y and recovery rate
/// gamma*Y; the full event sequence, for tests and diagnostics.
std::vector<GseEvent> simulate_gse_events(const Vec& theta, const GseConfig& cfg, Rng& rng);

/// (X, Y) sampled on the regular observation grid, last value carried forward.
TimeSeries simulate_gse(const Vec& theta, const GseConfig& cfg, Rng& rng);

// --- bespoke summary statistics ---

/// OU: (lsq intercept, lsq slope, mean); MA2: (variance, acf1, acf2);
/// GSE: (mean X, mean Y, logvar X, logvar Y, acf1 X, acf1 Y, acf2 X, acf2 Y,
/// crosscorr). Zero-variance channels yield acf/crosscorr 0 and logvar
/// log(1e-12).
Vec bespoke_summaries(const TimeSeries& x, ModelKind kind);

// --- model bundle used by the harness ---

struct Model {
  ModelKind kind;
  Prior prior;
  Vec theta_star;
  OuConfig ou;
  Ma2Config ma2;
  GseConfig gse;

  TimeSeries simulate(const Vec& theta, Rng& rng) const;
  static Model make(ModelKind kind);
};

}  // namespace sigre

#endif
