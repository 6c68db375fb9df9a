#include "sigre/ratio.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sigre {

using json = nlohmann::json;

// --- training-set construction ---

namespace {

// uniform random derangement by rejection; n >= 2
std::vector<int> random_derangement(std::size_t n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (;;) {
    rng.shuffle(perm);
    bool fixed_point = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] == static_cast<int>(i)) {
        fixed_point = true;
        break;
      }
    }
    if (!fixed_point) return perm;
  }
}

}  // namespace

std::vector<PairRef> negative_pairs(const std::vector<int>& indices, std::size_t count, Rng& rng,
                                    std::vector<std::vector<int>>* provenance) {
  if (count == 0) return {};
  const std::size_t n = indices.size();
  if (n < 2) throw InvalidArgument("negative_pairs: need at least 2 entries to form j != i");
  std::vector<PairRef> out;
  out.reserve(count);
  std::size_t remaining = count;
  while (remaining > 0) {
    const std::vector<int> sigma = random_derangement(n, rng);
    if (provenance) provenance->push_back(sigma);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (remaining < n) rng.shuffle(order);  // partial pass picks a random subset
    const std::size_t take = std::min(remaining, n);
    for (std::size_t k = 0; k < take; ++k) {
      const int pos = order[k];
      out.push_back({indices[static_cast<std::size_t>(pos)],
                     indices[static_cast<std::size_t>(sigma[static_cast<std::size_t>(pos)])]});
    }
    remaining -= take;
  }
  return out;
}

TrainingSet build_training_set(const Dataset& data, double K, Rng& rng) {
  const std::size_t n = data.size();
  if (n < 2) throw InvalidArgument("build_training_set: need at least 2 entries");
  if (!(K > 0.0)) throw InvalidArgument("build_training_set: K must be positive");
  TrainingSet ts;
  ts.K = K;
  ts.positives = n;
  ts.pairs.reserve(n + static_cast<std::size_t>(std::llround(K * static_cast<double>(n))));
  for (std::size_t i = 0; i < n; ++i) ts.pairs.push_back({static_cast<int>(i), static_cast<int>(i)});
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  const auto negatives = static_cast<std::size_t>(std::llround(K * static_cast<double>(n)));
  const auto neg = negative_pairs(indices, negatives, rng, &ts.provenance);
  ts.pairs.insert(ts.pairs.end(), neg.begin(), neg.end());
  ts.labels.assign(ts.pairs.size(), 0);
  std::fill(ts.labels.begin(), ts.labels.begin() + static_cast<std::ptrdiff_t>(n), 1);
  return ts;
}

// --- logistic regression ---

double LogisticObjective::value_and_grad(const Vec& wb, Vec& grad) const {
  const auto n = features.rows();
  const auto p = features.cols();
  if (wb.size() != p + 1) throw DimensionMismatch("LogisticObjective: packed size");
  const auto w = wb.head(p);
  const double b = wb[p];
  Vec f = features * w;
  f.array() += b;
  double value = 0.0;
  Vec df(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    const double m = y * f[i];
    if (m >= 0.0) {
      const double t = std::exp(-m);
      value += std::log1p(t);
      df[i] = -y * t / (1.0 + t);
    } else {
      const double t = std::exp(m);
      value += -m + std::log1p(t);
      df[i] = -y / (1.0 + t);
    }
  }
  value += 0.5 * omega * w.squaredNorm();
  grad.resize(p + 1);
  grad.head(p) = features.transpose() * df + omega * w;
  grad[p] = df.sum();
  return value;
}

namespace {

struct LbfgsResult {
  Vec x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

LbfgsResult lbfgs_minimize(const std::function<double(const Vec&, Vec&)>& fn, Vec x0,
                           int max_iterations, double grad_tol) {
  constexpr int history = 10;
  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult res;
  res.x = std::move(x0);
  Vec g(res.x.size());
  res.fx = fn(res.x, g);
  Vec d(res.x.size()), g_new(res.x.size());
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) {
      res.converged = true;
      return res;
    }
    res.iterations = it + 1;
    // two-loop recursion
    d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double dg = d.dot(g);
    if (!(dg < 0.0)) {  // not a descent direction; fall back to steepest descent
      d = -g;
      dg = -g.squaredNorm();
    }
    // Armijo backtracking
    double step = (it == 0) ? std::min(1.0, 1.0 / std::max(1e-12, g.norm())) : 1.0;
    constexpr double c1 = 1e-4;
    bool accepted = false;
    Vec x_new;
    double fx_new = res.fx;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * d;
      fx_new = fn(x_new, g_new);
      if (std::isfinite(fx_new) && fx_new <= res.fx + c1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return res;  // stalled; report best point found
    const Vec s = x_new - res.x;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    res.x = std::move(x_new);
    res.fx = fx_new;
    g = g_new;
  }
  return res;
}

}  // namespace

LogisticModel fit_logistic(const Mat& features, const std::vector<int>& labels, double omega,
                           int max_iterations, double grad_tol) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DimensionMismatch("fit_logistic: rows != labels");
  }
  if (!(omega > 0.0)) throw InvalidArgument("fit_logistic: omega must be positive");
  LogisticObjective obj{features, labels, omega};
  const auto fn = [&obj](const Vec& x, Vec& grad) { return obj.value_and_grad(x, grad); };
  LbfgsResult res = lbfgs_minimize(fn, Vec::Zero(features.cols() + 1), max_iterations, grad_tol);
  if (!res.x.allFinite()) throw NonFinite("fit_logistic: non-finite solution");
  LogisticModel model;
  model.weights = res.x.head(features.cols());
  model.intercept = res.x[features.cols()];
  model.omega = omega;
  model.converged = res.converged;
  model.iterations = res.iterations;
  return model;
}

// --- estimator chain ---

namespace {
double sigmoid(double t) { return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }
}  // namespace

double RatioEstimator::logit(const PairSample& v) const {
  return model.weights.dot(nystroem.transform(v)) + model.intercept;
}

double RatioEstimator::decision(const TimeSeries& x, const Vec& theta) const {
  return sigmoid(logit({x, theta}));
}

double RatioEstimator::log_ratio(const TimeSeries& x, const Vec& theta) const {
  return logit({x, theta});
}

double RatioEstimator::unnormalized_posterior(const TimeSeries& x, const Vec& theta) const {
  const double lp = prior.logpdf(theta);
  if (!std::isfinite(lp)) return 0.0;
  return std::exp(log_ratio(x, theta) + lp);
}

std::function<double(const Vec&)> RatioEstimator::logit_profile(const TimeSeries& x) const {
  // weights folded through the projection: logit = sum_j c_j l(theta, theta_j) + b
  Vec folded = nystroem.projection.transpose() * model.weights;
  Vec series_col = nystroem.series_column(x);
  Vec coeff = folded.cwiseProduct(series_col);
  std::vector<Vec> thetas;
  thetas.reserve(nystroem.landmarks.size());
  for (const auto& lm : nystroem.landmarks) thetas.push_back(lm.theta);
  const auto param = nystroem.kernel.param_part;
  if (!param) throw InvalidArgument("logit_profile: kernel has no parameter factor");
  const double b = model.intercept;
  return [coeff = std::move(coeff), thetas = std::move(thetas), param, b](const Vec& theta) {
    double acc = b;
    for (std::size_t j = 0; j < thetas.size(); ++j) acc += coeff[static_cast<Eigen::Index>(j)] * param(theta, thetas[j]);
    return acc;
  };
}

// --- method configuration ---

MethodKind method_kind_from_string(const std::string& name) {
  if (name == "signature") return MethodKind::Signature;
  if (name == "k2") return MethodKind::K2;
  if (name == "bespoke-rbf") return MethodKind::BespokeRbf;
  throw InvalidArgument("unknown method kind: " + name);
}

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::Signature: return "signature";
    case MethodKind::K2: return "k2";
    case MethodKind::BespokeRbf: return "bespoke-rbf";
  }
  return "?";
}

std::string MethodConfig::label() const {
  std::string base = to_string(kind);
  if (K != 1.0) {
    std::ostringstream os;
    os << base << "-";
    if (K == std::floor(K)) {
      os << static_cast<long long>(K);
    } else {
      os << K;
    }
    return os.str();
  }
  return base;
}

MethodConfig MethodConfig::from_label(const std::string& label) {
  MethodConfig cfg;
  std::string name = label;
  double K = 1.0;
  // suffix "-<number>" selects the negative proportion
  const auto pos = label.find_last_of('-');
  if (pos != std::string::npos && pos + 1 < label.size()) {
    const std::string tail = label.substr(pos + 1);
    char* end = nullptr;
    const double parsed = std::strtod(tail.c_str(), &end);
    if (end && *end == '\0' && parsed > 0.0) {
      name = label.substr(0, pos);
      K = parsed;
    }
  }
  cfg.kind = method_kind_from_string(name);
  cfg.K = K;
  return cfg;
}

// --- CV folds ---

std::vector<CvFold> make_cv_folds(std::size_t n, double K, int folds, Rng& rng) {
  if (folds < 2) throw InvalidArgument("make_cv_folds: need >= 2 folds");
  if (n < 2 * static_cast<std::size_t>(folds)) {
    throw InvalidArgument("make_cv_folds: need at least 2 positives per fold");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<CvFold> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i) {
    out[i % static_cast<std::size_t>(folds)].heldout_positive.push_back(order[i]);
  }
  for (int f = 0; f < folds; ++f) {
    auto& fold = out[static_cast<std::size_t>(f)];
    for (int g = 0; g < folds; ++g) {
      if (g == f) continue;
      const auto& src = out[static_cast<std::size_t>(g)].heldout_positive;
      fold.train_positive.insert(fold.train_positive.end(), src.begin(), src.end());
    }
    const auto n_train_neg =
        static_cast<std::size_t>(std::llround(K * static_cast<double>(fold.train_positive.size())));
    const auto n_held_neg =
        static_cast<std::size_t>(std::llround(K * static_cast<double>(fold.heldout_positive.size())));
    fold.train_negative = negative_pairs(fold.train_positive, n_train_neg, rng);
    fold.heldout_negative = negative_pairs(fold.heldout_positive, n_held_neg, rng);
  }
  return out;
}

// --- series cache ---

namespace {

Vec standardized_summary(const TimeSeries& s, ModelKind model, const Vec& means, const Vec& stds) {
  Vec z = bespoke_summaries(s, model);
  return (z - means).cwiseQuotient(stds);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m == 0) throw InvalidArgument("median_of: empty");
  return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

MethodConfig resolve_method_config(const MethodConfig& base, const TimeSeries& observation) {
  MethodConfig cfg = base;
  if (cfg.kind == MethodKind::Signature && cfg.sig.static_kernel.kind == StaticKernel::Kind::Rbf) {
    cfg.sig.static_kernel.scale = median_pairwise_sq_dist(observation);
  }
  if (cfg.kind == MethodKind::K2) {
    cfg.k2 = cfg.k2.resolved(observation);
  }
  return cfg;
}

SeriesCache build_series_cache(const Dataset& data, const TimeSeries& observation,
                               const MethodConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) throw InvalidArgument("build_series_cache: empty dataset");
  SeriesCache cache;
  cache.gram.resize(n, n);
  cache.obs_column.resize(n);
  switch (cfg.kind) {
    case MethodKind::Signature: {
      // augment once up front rather than inside every kernel call
      SignatureKernelConfig sig = cfg.sig;
      const bool aug = sig.time_augment;
      sig.time_augment = false;
      std::vector<TimeSeries> lifted;
      lifted.reserve(static_cast<std::size_t>(n));
      for (const auto& e : data.entries) lifted.push_back(aug ? time_augment(e.series) : e.series);
      const TimeSeries obs = aug ? time_augment(observation) : observation;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
          const double v = signature_kernel_eval(lifted[static_cast<std::size_t>(i)],
                                                 lifted[static_cast<std::size_t>(j)], sig);
          cache.gram(i, j) = v;
          cache.gram(j, i) = v;
        }
        cache.obs_column[i] = signature_kernel_eval(obs, lifted[static_cast<std::size_t>(i)], sig);
      }
      break;
    }
    case MethodKind::K2: {
      if (!cfg.k2.chi_bandwidth) {
        throw InvalidArgument("build_series_cache: k2 chi bandwidth unresolved");
      }
      cache.is_mmd = true;
      const double bw = *cfg.k2.chi_bandwidth;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
          const double v = mmd_sq_unbiased(data.entries[static_cast<std::size_t>(i)].series,
                                           data.entries[static_cast<std::size_t>(j)].series, bw);
          cache.gram(i, j) = v;
          cache.gram(j, i) = v;
        }
        cache.obs_column[i] =
            mmd_sq_unbiased(observation, data.entries[static_cast<std::size_t>(i)].series, bw);
      }
      break;
    }
    case MethodKind::BespokeRbf: {
      if (!cfg.bespoke) throw InvalidArgument("build_series_cache: bespoke standardizer unresolved");
      const auto& st = *cfg.bespoke;
      Mat z(n, st.means.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        z.row(i) = standardized_summary(data.entries[static_cast<std::size_t>(i)].series, cfg.model,
                                        st.means, st.stds)
                       .transpose();
      }
      const Vec zo = standardized_summary(observation, cfg.model, st.means, st.stds);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
          const double v = std::exp(-(z.row(i) - z.row(j)).squaredNorm() / st.scale);
          cache.gram(i, j) = v;
          cache.gram(j, i) = v;
        }
        cache.obs_column[i] = std::exp(-(z.row(i).transpose() - zo).squaredNorm() / st.scale);
      }
      break;
    }
  }
  if (!cache.gram.allFinite() || !cache.obs_column.allFinite()) {
    throw NonFinite("build_series_cache: non-finite kernel value");
  }
  return cache;
}

BespokeStandardizer make_bespoke_standardizer(const Dataset& data, ModelKind model) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n < 2) throw InvalidArgument("make_bespoke_standardizer: need >= 2 entries");
  Mat raw(n, bespoke_summaries(data.entries.front().series, model).size());
  for (Eigen::Index i = 0; i < n; ++i) {
    raw.row(i) = bespoke_summaries(data.entries[static_cast<std::size_t>(i)].series, model).transpose();
  }
  BespokeStandardizer st;
  st.means = raw.colwise().mean();
  st.stds.resize(raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double var =
        (raw.col(c).array() - st.means[c]).square().sum() / static_cast<double>(n - 1);
    st.stds[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec zi = (raw.row(i).transpose() - st.means).cwiseQuotient(st.stds);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Vec zj = (raw.row(j).transpose() - st.means).cwiseQuotient(st.stds);
      d2.push_back((zi - zj).squaredNorm());
    }
  }
  const double med = median_of(d2);
  st.scale = med > 0.0 ? med : 1.0;
  return st;
}

// --- tuning ---

namespace {

struct TrialDraw {
  Vec lengthscales;
  double omega = 1.0;
  double epsilon = 1.0;
};

double log_uniform(double lo, double hi, Rng& rng) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

Mat pair_kernel_matrix(const Dataset& data, const SeriesCache& cache, double epsilon,
                       const AnisoRbfConfig& l_cfg, const std::vector<PairRef>& rows,
                       const std::vector<PairRef>& cols) {
  Mat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& tr = data.entries[static_cast<std::size_t>(rows[r].theta_idx)].theta;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& tc = data.entries[static_cast<std::size_t>(cols[c].theta_idx)].theta;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cache.factor(rows[r].series_idx, cols[c].series_idx, epsilon) *
          aniso_rbf_eval(tr, tc, l_cfg);
    }
  }
  return out;
}

double mean_logloss(const Mat& features, const std::vector<int>& labels, const LogisticModel& m) {
  Vec f = features * m.weights;
  f.array() += m.intercept;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    const double margin = y * f[i];
    acc += margin >= 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
  }
  return acc / static_cast<double>(f.size());
}

std::vector<PairRef> fold_train_pairs(const CvFold& fold) {
  std::vector<PairRef> pairs;
  pairs.reserve(fold.train_positive.size() + fold.train_negative.size());
  for (const int i : fold.train_positive) pairs.push_back({i, i});
  pairs.insert(pairs.end(), fold.train_negative.begin(), fold.train_negative.end());
  return pairs;
}

std::vector<PairRef> fold_heldout_pairs(const CvFold& fold) {
  std::vector<PairRef> pairs;
  pairs.reserve(fold.heldout_positive.size() + fold.heldout_negative.size());
  for (const int i : fold.heldout_positive) pairs.push_back({i, i});
  pairs.insert(pairs.end(), fold.heldout_negative.begin(), fold.heldout_negative.end());
  return pairs;
}

std::vector<int> fold_labels(std::size_t positives, std::size_t total) {
  std::vector<int> labels(total, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  return labels;
}

}  // namespace

TuneResult tune(const TuneSpace& space, const Dataset& data, const SeriesCache& cache,
                const MethodConfig& base, Rng& rng) {
  if (space.trials < 1) throw InvalidArgument("tune: trials must be >= 1");
  const int p = static_cast<int>(data.entries.front().theta.size());

  // trial configurations drawn up front so scoring order cannot perturb them
  std::vector<TrialDraw> draws(static_cast<std::size_t>(space.trials));
  for (auto& d : draws) {
    d.lengthscales.resize(p);
    for (int j = 0; j < p; ++j) {
      d.lengthscales[j] = log_uniform(space.lengthscale_lo, space.lengthscale_hi, rng);
    }
    d.omega = log_uniform(space.omega_lo, space.omega_hi, rng);
    if (base.kind == MethodKind::K2) {
      d.epsilon = log_uniform(space.epsilon_lo, space.epsilon_hi, rng);
    }
  }

  // folds, fold negatives and fold landmark subsets are shared by all trials
  const auto folds = make_cv_folds(data.size(), base.K, space.folds, rng);
  struct FoldPlan {
    std::vector<PairRef> train_pairs;
    std::vector<PairRef> heldout_pairs;
    std::vector<int> train_labels;
    std::vector<int> heldout_labels;
    std::vector<PairRef> landmarks;
  };
  std::vector<FoldPlan> plans;
  plans.reserve(folds.size());
  for (const auto& fold : folds) {
    FoldPlan plan;
    plan.train_pairs = fold_train_pairs(fold);
    plan.heldout_pairs = fold_heldout_pairs(fold);
    plan.train_labels = fold_labels(fold.train_positive.size(), plan.train_pairs.size());
    plan.heldout_labels = fold_labels(fold.heldout_positive.size(), plan.heldout_pairs.size());
    std::size_t q_eff =
        base.q == 0 ? plan.train_pairs.size() : std::min(base.q, plan.train_pairs.size());
    if (space.landmark_cap > 0) q_eff = std::min(q_eff, space.landmark_cap);
    plan.landmarks = plan.train_pairs;
    if (q_eff < plan.landmarks.size()) {
      rng.shuffle(plan.landmarks);
      plan.landmarks.resize(q_eff);
    }
    plans.push_back(std::move(plan));
  }

  TuneResult result;
  result.trial_losses.reserve(draws.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& d = draws[t];
    const AnisoRbfConfig l_cfg{d.lengthscales};
    double loss_sum = 0.0;
    bool failed = false;
    for (const auto& plan : plans) {
      try {
        const Mat lg = pair_kernel_matrix(data, cache, d.epsilon, l_cfg, plan.landmarks, plan.landmarks);
        const NystroemFactor factor = nystroem_factor(lg, base.jitter);
        const Mat train_cross =
            pair_kernel_matrix(data, cache, d.epsilon, l_cfg, plan.train_pairs, plan.landmarks);
        const Mat train_feat = train_cross * factor.projection.transpose();
        const LogisticModel m = fit_logistic(train_feat, plan.train_labels, d.omega);
        const Mat held_cross =
            pair_kernel_matrix(data, cache, d.epsilon, l_cfg, plan.heldout_pairs, plan.landmarks);
        const Mat held_feat = held_cross * factor.projection.transpose();
        loss_sum += mean_logloss(held_feat, plan.heldout_labels, m);
      } catch (const Error&) {
        failed = true;
        break;
      }
    }
    const double loss = failed ? std::numeric_limits<double>::infinity()
                               : loss_sum / static_cast<double>(plans.size());
    result.trial_losses.push_back(loss);
    if (loss < best) {  // strict comparison keeps the first of tied trials
      best = loss;
      result.best_trial = static_cast<int>(t);
    }
  }
  if (result.best_trial < 0) throw Error("tune: every trial failed");

  result.cv_logloss = best;
  result.config = base;
  const auto& win = draws[static_cast<std::size_t>(result.best_trial)];
  result.config.lengthscales = win.lengthscales;
  result.config.omega = win.omega;
  if (base.kind == MethodKind::K2) result.config.k2.epsilon = win.epsilon;
  return result;
}

// --- final training ---

namespace {

SeriesKernelFn make_series_kernel(const MethodConfig& cfg) {
  switch (cfg.kind) {
    case MethodKind::Signature: {
      const SignatureKernelConfig sig = cfg.sig;
      return [sig](const TimeSeries& a, const TimeSeries& b) {
        return signature_kernel_eval(a, b, sig);
      };
    }
    case MethodKind::K2: {
      const K2KernelConfig k2 = cfg.k2;
      return [k2](const TimeSeries& a, const TimeSeries& b) { return k2_kernel_eval(a, b, k2); };
    }
    case MethodKind::BespokeRbf: {
      if (!cfg.bespoke) throw InvalidArgument("make_series_kernel: bespoke standardizer unresolved");
      const BespokeStandardizer st = *cfg.bespoke;
      const ModelKind model = cfg.model;
      return [st, model](const TimeSeries& a, const TimeSeries& b) {
        const Vec za = standardized_summary(a, model, st.means, st.stds);
        const Vec zb = standardized_summary(b, model, st.means, st.stds);
        return std::exp(-(za - zb).squaredNorm() / st.scale);
      };
    }
  }
  throw InvalidArgument("make_series_kernel: bad kind");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string canonical_config_string(const MethodConfig& cfg, const Prior& prior) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(cfg.kind) << "|" << to_string(cfg.model) << "|K=" << cfg.K << "|q=" << cfg.q
     << "|jitter=" << cfg.jitter << "|omega=" << cfg.omega;
  os << "|sig=" << (cfg.sig.static_kernel.kind == StaticKernel::Kind::Rbf ? "rbf" : "linear") << ","
     << cfg.sig.static_kernel.scale << "," << cfg.sig.dyadic_order << "," << cfg.sig.normalize << ","
     << cfg.sig.time_augment;
  os << "|k2=" << cfg.k2.epsilon << "," << (cfg.k2.chi_bandwidth ? *cfg.k2.chi_bandwidth : -1.0);
  os << "|ls=";
  for (Eigen::Index i = 0; i < cfg.lengthscales.size(); ++i) os << cfg.lengthscales[i] << ",";
  if (cfg.bespoke) {
    os << "|bespoke=" << cfg.bespoke->scale << ";";
    for (Eigen::Index i = 0; i < cfg.bespoke->means.size(); ++i) {
      os << cfg.bespoke->means[i] << "," << cfg.bespoke->stds[i] << ";";
    }
  }
  os << "|prior=" << prior.to_json_string();
  return os.str();
}

}  // namespace

std::string config_hash_hex(const MethodConfig& cfg, const Prior& prior) {
  std::ostringstream os;
  os << std::hex << fnv1a(canonical_config_string(cfg, prior));
  return os.str();
}

TrainResult train_ratio_estimator(const Dataset& data, const TimeSeries& observation,
                                  const Prior& prior, const MethodConfig& base,
                                  const TuneSpace& space, Rng& rng) {
  MethodConfig cfg = resolve_method_config(base, observation);
  if (cfg.kind == MethodKind::BespokeRbf && !cfg.bespoke) {
    cfg.bespoke = make_bespoke_standardizer(data, cfg.model);
  }
  const SeriesCache cache = build_series_cache(data, observation, cfg);

  TuneResult tuned = tune(space, data, cache, cfg, rng);
  cfg = tuned.config;

  TrainResult out;
  out.training = build_training_set(data, cfg.K, rng);
  const std::size_t q_eff =
      cfg.q == 0 ? out.training.pairs.size() : std::min(cfg.q, out.training.pairs.size());
  out.landmark_refs = out.training.pairs;
  if (q_eff < out.landmark_refs.size()) {
    rng.shuffle(out.landmark_refs);
    out.landmark_refs.resize(q_eff);
  }

  const AnisoRbfConfig l_cfg{cfg.lengthscales};
  const double eps = cfg.k2.epsilon;
  const Mat lg = pair_kernel_matrix(data, cache, eps, l_cfg, out.landmark_refs, out.landmark_refs);
  NystroemFactor factor = nystroem_factor(lg, cfg.jitter);
  const Mat cross = pair_kernel_matrix(data, cache, eps, l_cfg, out.training.pairs, out.landmark_refs);
  const Mat features = cross * factor.projection.transpose();
  LogisticModel model = fit_logistic(features, out.training.labels, cfg.omega);

  NystroemMap map;
  map.landmarks.reserve(out.landmark_refs.size());
  for (const auto& ref : out.landmark_refs) {
    map.landmarks.push_back({data.entries[static_cast<std::size_t>(ref.series_idx)].series,
                             data.entries[static_cast<std::size_t>(ref.theta_idx)].theta});
  }
  map.projection = std::move(factor.projection);
  map.eigenvalues = std::move(factor.eigenvalues);
  map.retained = factor.retained;
  map.kernel = make_product_kernel(make_series_kernel(cfg), [l_cfg](const Vec& a, const Vec& b) {
    return aniso_rbf_eval(a, b, l_cfg);
  });

  out.estimator.nystroem = std::move(map);
  out.estimator.model = std::move(model);
  out.estimator.prior = prior;
  out.config = cfg;
  out.cv_logloss = tuned.cv_logloss;
  out.config_hash = config_hash_hex(cfg, prior);
  return out;
}

// --- serialization ---

namespace {

json vec_to_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vec vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string estimator_to_json(const TrainResult& result) {
  const MethodConfig& cfg = result.config;
  json j;
  j["method"] = to_string(cfg.kind);
  j["model"] = to_string(cfg.model);
  j["K"] = cfg.K;
  j["q"] = cfg.q;
  j["jitter"] = cfg.jitter;
  j["omega"] = cfg.omega;
  j["lengthscales"] = vec_to_json(cfg.lengthscales);
  j["signature"] = {{"static", cfg.sig.static_kernel.kind == StaticKernel::Kind::Rbf ? "rbf" : "linear"},
                    {"scale", cfg.sig.static_kernel.scale},
                    {"dyadic_order", cfg.sig.dyadic_order},
                    {"normalize", cfg.sig.normalize},
                    {"time_augment", cfg.sig.time_augment}};
  j["k2"] = {{"epsilon", cfg.k2.epsilon},
             {"chi_bandwidth", cfg.k2.chi_bandwidth ? json(*cfg.k2.chi_bandwidth) : json()}};
  if (cfg.bespoke) {
    j["bespoke"] = {{"means", vec_to_json(cfg.bespoke->means)},
                    {"stds", vec_to_json(cfg.bespoke->stds)},
                    {"scale", cfg.bespoke->scale}};
  }
  j["prior"] = json::parse(result.estimator.prior.to_json_string());
  json lms = json::array();
  for (const auto& ref : result.landmark_refs) {
    lms.push_back({ref.series_idx, ref.theta_idx});
  }
  j["landmarks"] = std::move(lms);
  const Mat& p = result.estimator.nystroem.projection;
  json proj = json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) proj.push_back(p(r, c));
  }
  j["projection"] = {{"rows", p.rows()}, {"cols", p.cols()}, {"data", std::move(proj)}};
  j["eigenvalues"] = vec_to_json(result.estimator.nystroem.eigenvalues);
  j["weights"] = vec_to_json(result.estimator.model.weights);
  j["intercept"] = result.estimator.model.intercept;
  j["cv_logloss"] = result.cv_logloss;
  j["config_hash"] = result.config_hash;
  return j.dump(2);
}

TrainResult estimator_from_json(const std::string& text, const Dataset& data,
                                const TimeSeries& observation) {
  const json j = json::parse(text);
  MethodConfig cfg;
  cfg.kind = method_kind_from_string(j.at("method"));
  cfg.model = model_kind_from_string(j.at("model"));
  cfg.K = j.at("K");
  cfg.q = j.at("q");
  cfg.jitter = j.at("jitter");
  cfg.omega = j.at("omega");
  cfg.lengthscales = vec_from_json(j.at("lengthscales"));
  const auto& sig = j.at("signature");
  cfg.sig.static_kernel =
      sig.at("static") == "rbf" ? StaticKernel::rbf(sig.at("scale")) : StaticKernel::linear();
  cfg.sig.dyadic_order = sig.at("dyadic_order");
  cfg.sig.normalize = sig.at("normalize");
  cfg.sig.time_augment = sig.at("time_augment");
  cfg.k2.epsilon = j.at("k2").at("epsilon");
  if (!j.at("k2").at("chi_bandwidth").is_null()) {
    cfg.k2.chi_bandwidth = j.at("k2").at("chi_bandwidth").get<double>();
  }
  if (j.contains("bespoke")) {
    BespokeStandardizer st;
    st.means = vec_from_json(j.at("bespoke").at("means"));
    st.stds = vec_from_json(j.at("bespoke").at("stds"));
    st.scale = j.at("bespoke").at("scale");
    cfg.bespoke = std::move(st);
  }

  TrainResult out;
  out.config = cfg;
  out.config_hash = j.value("config_hash", "");
  out.cv_logloss = j.value("cv_logloss", 0.0);

  for (const auto& lm : j.at("landmarks")) {
    out.landmark_refs.push_back({lm.at(0).get<int>(), lm.at(1).get<int>()});
  }
  NystroemMap map;
  for (const auto& ref : out.landmark_refs) {
    if (ref.series_idx < 0 || ref.series_idx >= static_cast<int>(data.size()) || ref.theta_idx < 0 ||
        ref.theta_idx >= static_cast<int>(data.size())) {
      throw InvalidArgument("estimator_from_json: landmark index outside the dataset");
    }
    map.landmarks.push_back({data.entries[static_cast<std::size_t>(ref.series_idx)].series,
                             data.entries[static_cast<std::size_t>(ref.theta_idx)].theta});
  }
  const auto& proj = j.at("projection");
  const Eigen::Index rows = proj.at("rows"), cols = proj.at("cols");
  map.projection.resize(rows, cols);
  const auto& flat = proj.at("data");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      map.projection(r, c) = flat.at(static_cast<std::size_t>(r * cols + c)).get<double>();
    }
  }
  map.eigenvalues = vec_from_json(j.at("eigenvalues"));
  map.retained = static_cast<int>(rows);
  const AnisoRbfConfig l_cfg{cfg.lengthscales};
  map.kernel = make_product_kernel(make_series_kernel(cfg), [l_cfg](const Vec& a, const Vec& b) {
    return aniso_rbf_eval(a, b, l_cfg);
  });

  out.estimator.nystroem = std::move(map);
  out.estimator.model.weights = vec_from_json(j.at("weights"));
  out.estimator.model.intercept = j.at("intercept");
  out.estimator.model.omega = cfg.omega;
  out.estimator.model.converged = true;
  out.estimator.prior = Prior::from_json_string(j.at("prior").dump());
  (void)observation;
  return out;
}

}  // namespace sigre
