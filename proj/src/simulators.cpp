#include "sigre/simulators.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace sigre {

using json = nlohmann::json;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogVarFloor = -27.631021115928547;  // log(1e-12)
constexpr double kHalfLog2Pi = 0.9189385332046727;
}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "ou") return ModelKind::Ou;
  if (name == "ma2") return ModelKind::Ma2;
  if (name == "gse") return ModelKind::Gse;
  throw InvalidArgument("unknown model kind: " + name);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ou: return "ou";
    case ModelKind::Ma2: return "ma2";
    case ModelKind::Gse: return "gse";
  }
  return "?";
}

// --- priors ---

Prior::Prior(UniformBox box) : prior_(std::move(box)) {
  const auto& b = std::get<UniformBox>(prior_);
  if (b.lows.size() != b.highs.size() || b.lows.size() == 0) {
    throw InvalidArgument("UniformBox: lows/highs mismatch");
  }
  for (Eigen::Index i = 0; i < b.lows.size(); ++i) {
    if (!(b.lows[i] < b.highs[i])) throw InvalidArgument("UniformBox: lows must be < highs");
  }
}

Prior::Prior(TriangleMa2 tri) : prior_(tri) {}

Prior::Prior(GammaProduct gp) : prior_(std::move(gp)) {
  const auto& g = std::get<GammaProduct>(prior_);
  if (g.shapes.size() != g.scales.size() || g.shapes.size() == 0) {
    throw InvalidArgument("GammaProduct: shapes/scales mismatch");
  }
  if ((g.shapes.array() <= 0.0).any() || (g.scales.array() <= 0.0).any()) {
    throw InvalidArgument("GammaProduct: parameters must be positive");
  }
}

int Prior::dim() const {
  if (std::holds_alternative<UniformBox>(prior_)) {
    return static_cast<int>(std::get<UniformBox>(prior_).lows.size());
  }
  if (std::holds_alternative<TriangleMa2>(prior_)) return 2;
  return static_cast<int>(std::get<GammaProduct>(prior_).shapes.size());
}

Vec Prior::sample(Rng& rng) const {
  if (const auto* b = std::get_if<UniformBox>(&prior_)) {
    Vec out(b->lows.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.uniform(b->lows[i], b->highs[i]);
    return out;
  }
  if (std::holds_alternative<TriangleMa2>(prior_)) {
    // rejection from the bounding box [-2,2] x [-1,1]; acceptance 1/2
    for (;;) {
      Vec t(2);
      t[0] = rng.uniform(-2.0, 2.0);
      t[1] = rng.uniform(-1.0, 1.0);
      if (std::isfinite(logpdf(t))) return t;
    }
  }
  const auto& g = std::get<GammaProduct>(prior_);
  Vec out(g.shapes.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.gamma(g.shapes[i], g.scales[i]);
  return out;
}

double Prior::logpdf(const Vec& theta) const {
  if (const auto* b = std::get_if<UniformBox>(&prior_)) {
    if (theta.size() != b->lows.size()) throw DimensionMismatch("Prior::logpdf: dimension");
    double lp = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if (theta[i] < b->lows[i] || theta[i] > b->highs[i]) return kNegInf;
      lp -= std::log(b->highs[i] - b->lows[i]);
    }
    return lp;
  }
  if (std::holds_alternative<TriangleMa2>(prior_)) {
    if (theta.size() != 2) throw DimensionMismatch("Prior::logpdf: dimension");
    const double t1 = theta[0], t2 = theta[1];
    if (t1 + t2 > -1.0 && t1 - t2 < 1.0 && t2 < 1.0) {
      return -std::log(4.0);  // triangle area 4
    }
    return kNegInf;
  }
  const auto& g = std::get<GammaProduct>(prior_);
  if (theta.size() != g.shapes.size()) throw DimensionMismatch("Prior::logpdf: dimension");
  double lp = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double x = theta[i];
    if (x <= 0.0) return kNegInf;
    const double a = g.shapes[i], s = g.scales[i];
    lp += (a - 1.0) * std::log(x) - x / s - std::lgamma(a) - a * std::log(s);
  }
  return lp;
}

Vec Prior::proposal_scale() const {
  if (const auto* b = std::get_if<UniformBox>(&prior_)) {
    return 0.1 * (b->highs - b->lows);
  }
  if (std::holds_alternative<TriangleMa2>(prior_)) {
    Vec s(2);
    s[0] = 0.4;  // 10% of the bounding-box widths
    s[1] = 0.2;
    return s;
  }
  const auto& g = std::get<GammaProduct>(prior_);
  Vec s(g.shapes.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::sqrt(g.shapes[i]) * g.scales[i];
  return s;
}

Prior Prior::for_model(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ou: {
      Vec lo(2), hi(2);
      lo << 0.0, -2.0;
      hi << 1.0, 2.0;
      return Prior(UniformBox{lo, hi});
    }
    case ModelKind::Ma2:
      return Prior(TriangleMa2{});
    case ModelKind::Gse: {
      Vec shapes(2), scales(2);
      shapes << 0.1, 0.2;
      scales << 2.0, 0.5;
      return Prior(GammaProduct{shapes, scales});
    }
  }
  throw InvalidArgument("Prior::for_model: bad kind");
}

std::string Prior::to_json_string() const {
  json j;
  if (const auto* b = std::get_if<UniformBox>(&prior_)) {
    j["kind"] = "uniform_box";
    j["lows"] = std::vector<double>(b->lows.data(), b->lows.data() + b->lows.size());
    j["highs"] = std::vector<double>(b->highs.data(), b->highs.data() + b->highs.size());
  } else if (std::holds_alternative<TriangleMa2>(prior_)) {
    j["kind"] = "triangle_ma2";
  } else {
    const auto& g = std::get<GammaProduct>(prior_);
    j["kind"] = "gamma_product";
    j["shapes"] = std::vector<double>(g.shapes.data(), g.shapes.data() + g.shapes.size());
    j["scales"] = std::vector<double>(g.scales.data(), g.scales.data() + g.scales.size());
  }
  return j.dump();
}

Prior Prior::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  const std::string kind = j.at("kind");
  if (kind == "uniform_box") {
    const auto lows = j.at("lows").get<std::vector<double>>();
    const auto highs = j.at("highs").get<std::vector<double>>();
    return Prior(UniformBox{Eigen::Map<const Vec>(lows.data(), static_cast<Eigen::Index>(lows.size())),
                            Eigen::Map<const Vec>(highs.data(), static_cast<Eigen::Index>(highs.size()))});
  }
  if (kind == "triangle_ma2") return Prior(TriangleMa2{});
  if (kind == "gamma_product") {
    const auto shapes = j.at("shapes").get<std::vector<double>>();
    const auto scales = j.at("scales").get<std::vector<double>>();
    return Prior(GammaProduct{Eigen::Map<const Vec>(shapes.data(), static_cast<Eigen::Index>(shapes.size())),
                              Eigen::Map<const Vec>(scales.data(), static_cast<Eigen::Index>(scales.size()))});
  }
  throw InvalidArgument("Prior::from_json_string: unknown kind " + kind);
}

// --- OU ---

TimeSeries simulate_ou_path(const Vec& theta, const OuConfig& cfg, const Vec& innovations) {
  if (theta.size() != 2) throw DimensionMismatch("simulate_ou_path: theta must be 2-D");
  if (cfg.steps < 2 || !(cfg.dt > 0.0)) throw InvalidArgument("simulate_ou_path: bad config");
  if (innovations.size() != cfg.steps) {
    throw DimensionMismatch("simulate_ou_path: need one innovation per step");
  }
  const double drift = theta[0] * std::exp(theta[1]) * cfg.dt;
  const double decay = 1.0 - theta[0] * cfg.dt;
  Mat values(cfg.steps + 1, 1);
  values(0, 0) = cfg.x0;
  for (int i = 1; i <= cfg.steps; ++i) {
    values(i, 0) = drift + decay * values(i - 1, 0) + 0.5 * innovations[i - 1];
  }
  Vec times = Vec::LinSpaced(cfg.steps + 1, 0.0, cfg.dt * cfg.steps);
  return TimeSeries(std::move(values), std::move(times));
}

TimeSeries simulate_ou(const Vec& theta, const OuConfig& cfg, Rng& rng) {
  Vec eps(cfg.steps);
  const double sd = std::sqrt(cfg.dt);
  for (int i = 0; i < cfg.steps; ++i) eps[i] = rng.normal(0.0, sd);
  return simulate_ou_path(theta, cfg, eps);
}

double ou_loglik(const TimeSeries& x, const Vec& theta, const OuConfig& cfg) {
  if (x.channels() != 1) throw DimensionMismatch("ou_loglik: scalar series expected");
  if (theta.size() != 2) throw DimensionMismatch("ou_loglik: theta must be 2-D");
  const double drift = theta[0] * std::exp(theta[1]) * cfg.dt;
  const double decay = 1.0 - theta[0] * cfg.dt;
  const double var = cfg.dt / 4.0;
  const double log_norm = -kHalfLog2Pi - 0.5 * std::log(var);
  double lp = 0.0;
  for (Eigen::Index i = 1; i < x.length(); ++i) {
    const double mean = drift + decay * x.values(i - 1, 0);
    const double r = x.values(i, 0) - mean;
    lp += log_norm - 0.5 * r * r / var;
  }
  return lp;
}

// --- MA(2) ---

TimeSeries simulate_ma2_path(const Vec& theta, const Ma2Config& cfg, const Vec& innovations) {
  if (theta.size() != 2) throw DimensionMismatch("simulate_ma2_path: theta must be 2-D");
  if (cfg.length < 3) throw InvalidArgument("simulate_ma2_path: length must be >= 3");
  if (innovations.size() != cfg.length + 2) {
    throw DimensionMismatch("simulate_ma2_path: need length + 2 innovations");
  }
  Mat values(cfg.length, 1);
  for (int t = 0; t < cfg.length; ++t) {
    values(t, 0) = innovations[t + 2] + theta[0] * innovations[t + 1] + theta[1] * innovations[t];
  }
  return TimeSeries(std::move(values));
}

TimeSeries simulate_ma2(const Vec& theta, const Ma2Config& cfg, Rng& rng) {
  Vec eps(cfg.length + 2);
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return simulate_ma2_path(theta, cfg, eps);
}

double ma2_loglik(const TimeSeries& x, const Vec& theta) {
  if (x.channels() != 1) throw DimensionMismatch("ma2_loglik: scalar series expected");
  if (theta.size() != 2) throw DimensionMismatch("ma2_loglik: theta must be 2-D");
  const auto n = x.length();
  const double t1 = theta[0], t2 = theta[1];
  const double c0 = 1.0 + t1 * t1 + t2 * t2;
  const double c1 = t1 + t1 * t2;
  const double c2 = t2;

  // banded Cholesky, bandwidth 2; L stored as (diag, sub1, sub2)
  Vec d(n), l1(n), l2(n);
  l1.setZero();
  l2.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = c0;
    if (i >= 1) sum -= l1[i - 1] * l1[i - 1];
    if (i >= 2) sum -= l2[i - 2] * l2[i - 2];
    if (!(sum > 0.0)) return kNegInf;  // outside the invertibility region
    d[i] = std::sqrt(sum);
    if (i + 1 < n) {
      double v = c1;
      if (i >= 1) v -= l1[i - 1] * l2[i - 1];
      l1[i] = v / d[i];
    }
    if (i + 2 < n) l2[i] = c2 / d[i];
  }
  // forward solve L z = x
  Vec z(n);
  double quad = 0.0, logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = x.values(i, 0);
    if (i >= 1) v -= l1[i - 1] * z[i - 1];
    if (i >= 2) v -= l2[i - 2] * z[i - 2];
    z[i] = v / d[i];
    quad += z[i] * z[i];
    logdet += std::log(d[i]);
  }
  return -0.5 * quad - logdet - static_cast<double>(n) * kHalfLog2Pi;
}

// --- GSE ---

std::vector<GseEvent> simulate_gse_events(const Vec& theta, const GseConfig& cfg, Rng& rng) {
  if (theta.size() != 2) throw DimensionMismatch("simulate_gse_events: theta must be 2-D");
  if (theta[0] < 0.0 || theta[1] < 0.0) throw InvalidArgument("simulate_gse_events: rates must be >= 0");
  if (cfg.initial_infected < 1 || cfg.initial_infected >= cfg.population) {
    throw InvalidArgument("simulate_gse_events: need 1 <= initial infected < population");
  }
  const double beta = theta[0], gamma = theta[1];
  const double horizon = cfg.obs_dt * cfg.obs_count;
  int x = cfg.population - cfg.initial_infected;
  int y = cfg.initial_infected;
  double t = 0.0;
  std::vector<GseEvent> events;
  events.push_back({0.0, x, y});
  while (y > 0 && t <= horizon) {
    const double rate_inf = beta * x * y;
    const double rate_rec = gamma * y;
    const double total = rate_inf + rate_rec;
    if (total <= 0.0) break;
    t += rng.exponential(total);
    if (t > horizon) break;
    if (rng.uniform() * total < rate_inf) {
      --x;
      ++y;
    } else {
      --y;
    }
    events.push_back({t, x, y});
  }
  return events;
}

TimeSeries simulate_gse(const Vec& theta, const GseConfig& cfg, Rng& rng) {
  const auto events = simulate_gse_events(theta, cfg, rng);
  Mat values(cfg.obs_count + 1, 2);
  Vec times(cfg.obs_count + 1);
  std::size_t e = 0;
  for (int i = 0; i <= cfg.obs_count; ++i) {
    const double t = cfg.obs_dt * i;
    while (e + 1 < events.size() && events[e + 1].time <= t) ++e;
    values(i, 0) = events[e].susceptible;
    values(i, 1) = events[e].infected;
    times[i] = t;
  }
  return TimeSeries(std::move(values), std::move(times));
}

// --- summaries ---

namespace {

double column_mean(const Vec& v) { return v.mean(); }

double column_var(const Vec& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

// standard sample autocorrelation with the biased (1/n) denominator
double acf(const Vec& v, int lag) {
  const auto n = v.size();
  const double m = v.mean();
  double denom = (v.array() - m).square().sum();
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (Eigen::Index t = 0; t + lag < n; ++t) num += (v[t] - m) * (v[t + lag] - m);
  return num / denom;
}

double crosscorr(const Vec& a, const Vec& b) {
  const double ma = a.mean(), mb = b.mean();
  const double sa = (a.array() - ma).square().sum();
  const double sb = (b.array() - mb).square().sum();
  if (sa <= 0.0 || sb <= 0.0) return 0.0;
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  return cov / std::sqrt(sa * sb);
}

double logvar_floored(const Vec& v) {
  const double var = column_var(v);
  return var > 0.0 ? std::log(var) : kLogVarFloor;
}

}  // namespace

Vec bespoke_summaries(const TimeSeries& x, ModelKind kind) {
  switch (kind) {
    case ModelKind::Ou: {
      if (x.channels() != 1) throw DimensionMismatch("bespoke_summaries: OU expects 1 channel");
      const auto n = x.length();
      // least squares of x_t on x_{t-1}
      Vec prev = x.values.col(0).head(n - 1);
      Vec next = x.values.col(0).tail(n - 1);
      const double mp = prev.mean(), mn = next.mean();
      const double sxx = (prev.array() - mp).square().sum();
      double slope = 0.0;
      if (sxx > 0.0) slope = ((prev.array() - mp) * (next.array() - mn)).sum() / sxx;
      const double intercept = mn - slope * mp;
      Vec out(3);
      out << intercept, slope, x.values.col(0).mean();
      return out;
    }
    case ModelKind::Ma2: {
      if (x.channels() != 1) throw DimensionMismatch("bespoke_summaries: MA2 expects 1 channel");
      Vec v = x.values.col(0);
      Vec out(3);
      out << column_var(v), acf(v, 1), acf(v, 2);
      return out;
    }
    case ModelKind::Gse: {
      if (x.channels() != 2) throw DimensionMismatch("bespoke_summaries: GSE expects 2 channels");
      Vec xs = x.values.col(0);
      Vec ys = x.values.col(1);
      Vec out(9);
      out << column_mean(xs), column_mean(ys), logvar_floored(xs), logvar_floored(ys), acf(xs, 1),
          acf(ys, 1), acf(xs, 2), acf(ys, 2), crosscorr(xs, ys);
      return out;
    }
  }
  throw InvalidArgument("bespoke_summaries: bad model kind");
}

// --- model bundle ---

TimeSeries Model::simulate(const Vec& theta, Rng& rng) const {
  switch (kind) {
    case ModelKind::Ou: return simulate_ou(theta, ou, rng);
    case ModelKind::Ma2: return simulate_ma2(theta, ma2, rng);
    case ModelKind::Gse: return simulate_gse(theta, gse, rng);
  }
  throw InvalidArgument("Model::simulate: bad kind");
}

Model Model::make(ModelKind kind) {
  Model m;
  m.kind = kind;
  m.prior = Prior::for_model(kind);
  m.theta_star.resize(2);
  switch (kind) {
    case ModelKind::Ou: m.theta_star << 0.5, 1.0; break;
    case ModelKind::Ma2: m.theta_star << 0.6, 0.2; break;
    case ModelKind::Gse: m.theta_star << 1e-2, 1e-1; break;
  }
  return m;
}

}  // namespace sigre
