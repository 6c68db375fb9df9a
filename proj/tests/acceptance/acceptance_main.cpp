// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
// Usage: sigre_acceptance [--criteria 1,2,5] [--workdir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "sigre/harness.hpp"

using namespace sigre;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

fs::path g_workdir;

std::string fmt_secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f s", s);
  return buf;
}

TimeSeries random_path(int n, int d, Rng& rng, double scale) {
  Mat v(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) v(i, c) = scale * rng.normal();
  }
  return TimeSeries(std::move(v));
}

TimeSeries random_walk(int n, int d, Rng& rng, double step) {
  Mat v(n, d);
  for (int c = 0; c < d; ++c) v(0, c) = 0.0;
  for (int i = 1; i < n; ++i) {
    for (int c = 0; c < d; ++c) v(i, c) = v(i - 1, c) + step * rng.normal();
  }
  return TimeSeries(std::move(v));
}

// ---------------------------------------------------------------- criterion 1
bool criterion_1(std::string& detail) {
  Timer timer;
  Rng rng(101);
  SignatureKernelConfig cfg;
  cfg.static_kernel = StaticKernel::linear();
  cfg.time_augment = false;
  cfg.dyadic_order = 4;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_int(4));  // 2..5 steps
    const int d = 1 + static_cast<int>(rng.uniform_int(3));  // 1..3 channels
    const double step = 0.5 / std::sqrt(static_cast<double>(d));
    const TimeSeries a = random_walk(n, d, rng, step);
    const TimeSeries b = random_walk(n, d, rng, step);
    const double pde = signature_kernel_eval(a, b, cfg);
    const double oracle = truncated_sig_inner(a, b, 12);
    const double rel = std::fabs(pde - oracle) / std::max(1.0, std::fabs(oracle));
    worst = std::max(worst, rel);
  }
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "worst relative error " << worst << " over 50 paths, " << fmt_secs(secs);
  detail = os.str();
  return worst <= 1e-3 && secs < 30.0;
}

// ---------------------------------------------------------------- criterion 2
bool criterion_2(std::string& detail) {
  Mat v(2, 1);
  v << 0.0, 1.0;
  const TimeSeries seg{TimeSeries(v)};
  SignatureKernelConfig cfg;  // default dyadic_order
  cfg.static_kernel = StaticKernel::linear();
  cfg.time_augment = false;
  // oracle: partial sums of sum 1/(m!)^2 = I0(2)
  double target = 0.0, fact = 1.0;
  for (int m = 0; m <= 40; ++m) {
    if (m > 0) fact *= m;
    target += 1.0 / (fact * fact);
  }
  const double value = signature_kernel_eval(seg, seg, cfg);
  const double rel = std::fabs(value - target) / target;
  std::ostringstream os;
  os << "value " << value << ", I0(2) " << target << ", relative error " << rel;
  detail = os.str();
  return rel <= 1e-3;
}

// ---------------------------------------------------------------- criterion 3
bool criterion_3(std::string& detail) {
  Mat pts(2, 1);
  pts << 0.0, 1.0;
  const TimeSeries s{TimeSeries(pts)};
  const double value = mmd_sq_unbiased(s, s, 1.0);
  const double target = std::exp(-1.0) - 1.0;
  std::ostringstream os;
  os << "value " << value << ", target e^-1 - 1 = " << target;
  detail = os.str();
  return std::fabs(value - target) <= 1e-12;
}

// ---------------------------------------------------------------- criterion 4
bool criterion_4(std::string& detail) {
  Rng rng(104);
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<PairSample> pts;
    for (int i = 0; i < 20; ++i) {
      Vec theta(2);
      theta << rng.normal(), rng.normal();
      pts.push_back({random_path(4, 1, rng, 1.0), theta});
    }
    Vec ls(2);
    ls << 1.0, 1.0;
    const PairKernel kernel = make_product_kernel(
        [](const TimeSeries& a, const TimeSeries& b) {
          return std::exp(-(a.values - b.values).squaredNorm() / 4.0);
        },
        [ls](const Vec& a, const Vec& b) { return aniso_rbf_eval(a, b, {ls}); });
    const GramMatrix gram = gram_matrix(pts, kernel);
    const NystroemMap map = nystroem_fit(pts, kernel, pts.size(), 0.0);
    Mat feats(20, map.retained);
    for (int i = 0; i < 20; ++i) feats.row(i) = map.transform(pts[static_cast<std::size_t>(i)]).transpose();
    const double err = (feats * feats.transpose() - gram.entries).norm();
    worst = std::max(worst, err);
  }
  std::ostringstream os;
  os << "worst Frobenius reconstruction error " << worst << " at q = N = 20";
  detail = os.str();
  return worst <= 1e-8;
}

// ---------------------------------------------------------------- criterion 5
bool criterion_5(std::string& detail) {
  Rng rng(105);
  Mat features(30, 5);
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 5; ++j) features(i, j) = rng.normal();
    labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  const LogisticObjective obj{features, labels, 0.3};
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Vec wb(6);
    for (int j = 0; j < 6; ++j) wb[j] = rng.normal();
    Vec grad;
    obj.value_and_grad(wb, grad);
    const double h = 1e-6;
    for (int j = 0; j < 6; ++j) {
      Vec hi = wb, lo = wb;
      hi[j] += h;
      lo[j] -= h;
      Vec dummy;
      const double fd = (obj.value_and_grad(hi, dummy) - obj.value_and_grad(lo, dummy)) / (2 * h);
      const double rel = std::fabs(grad[j] - fd) / std::max(1.0, std::fabs(fd));
      worst = std::max(worst, rel);
    }
  }
  std::ostringstream os;
  os << "worst gradient relative error " << worst << " at 10 random points";
  detail = os.str();
  return worst <= 1e-5;
}

// ---------------------------------------------------------------- criterion 6

namespace toy {

constexpr int kLength = 10;

TimeSeries simulate(double theta, Rng& rng) {
  Mat v(kLength, 1);
  double walk = 0.0;
  for (int t = 0; t < kLength; ++t) {
    walk += rng.normal();
    v(t, 0) = theta + walk;
  }
  return TimeSeries(std::move(v));
}

double loglik(const TimeSeries& x, double theta) {
  // x1 ~ N(theta, 1); increments ~ N(0, 1)
  double lp = -0.5 * std::log(2.0 * M_PI) - 0.5 * (x.values(0, 0) - theta) * (x.values(0, 0) - theta);
  for (int t = 1; t < kLength; ++t) {
    const double d = x.values(t, 0) - x.values(t - 1, 0);
    lp += -0.5 * std::log(2.0 * M_PI) - 0.5 * d * d;
  }
  return lp;
}

}  // namespace toy

bool criterion_6(std::string& detail) {
  Timer timer;
  const Prior prior(UniformBox{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)});

  // pseudo-observation at theta* = 0.5 with the reserved seed
  Rng obs_rng(0);
  const TimeSeries obs = toy::simulate(0.5, obs_rng);

  // 1000 joint draws -> 2000 training pairs at K = 1
  Dataset data;
  data.seed = 601;
  for (int i = 0; i < 1000; ++i) {
    Rng rng(derive_seed(601, static_cast<std::uint64_t>(i)));
    const double theta = rng.uniform(-2.0, 2.0);
    data.entries.push_back({toy::simulate(theta, rng), Vec::Constant(1, theta)});
  }

  MethodConfig base;
  base.kind = MethodKind::Signature;
  base.q = 500;
  TuneSpace space;
  space.trials = 15;
  space.folds = 5;
  Rng train_rng(602);
  const TrainResult trained = train_ratio_estimator(data, obs, prior, base, space, train_rng);
  const auto profile = trained.estimator.logit_profile(obs);

  // quadrature oracle for log r(x*, theta) over the prior
  const int nodes = 10000;
  const double step = 4.0 / nodes;
  double max_ll = -1e300;
  std::vector<double> lls(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double theta = -2.0 + (j + 0.5) * step;
    lls[static_cast<std::size_t>(j)] = toy::loglik(obs, theta);
    max_ll = std::max(max_ll, lls[static_cast<std::size_t>(j)]);
  }
  double acc = 0.0;
  for (const double ll : lls) acc += std::exp(ll - max_ll);
  const double log_evidence = max_ll + std::log(acc) + std::log(step / 4.0);

  double max_err = 0.0;
  for (int g = 0; g < 21; ++g) {
    const double theta = -2.0 + 4.0 * g / 20.0;
    const double log_r = toy::loglik(obs, theta) - log_evidence;
    const double log_r_hat = profile(Vec::Constant(1, theta));
    max_err = std::max(max_err, std::fabs(log_r_hat - log_r));
  }

  // marginal consistency: mean of r over 2000 fresh marginal pairs
  double r_acc = 0.0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(derive_seed(603, static_cast<std::uint64_t>(i)));
    const double theta_data = rng.uniform(-2.0, 2.0);
    const TimeSeries x = toy::simulate(theta_data, rng);
    const auto x_profile = trained.estimator.logit_profile(x);
    for (int k = 0; k < 10; ++k) {
      r_acc += std::exp(x_profile(Vec::Constant(1, rng.uniform(-2.0, 2.0))));
    }
  }
  const double r_mean = r_acc / 2000.0;

  const double secs = timer.seconds();
  std::ostringstream os;
  os << "max |log r_hat - log r| = " << max_err << " on the 21-point grid, marginal mean r = "
     << r_mean << ", cv log-loss " << trained.cv_logloss << ", " << fmt_secs(secs);
  detail = os.str();
  return max_err <= 0.2 && r_mean >= 0.7 && r_mean <= 1.3 && secs < 600.0;
}

// ------------------------------------------------------- criteria 7, 8 and 9

std::map<std::string, std::map<int, double>> metric_medians(
    const std::vector<ResultRecord>& records, bool use_w1) {
  std::map<std::string, std::map<int, std::vector<double>>> values;
  for (const auto& r : records) {
    values[r.method][r.budget].push_back(use_w1 ? r.wasserstein : r.mean_distance);
  }
  std::map<std::string, std::map<int, double>> medians;
  for (auto& [method, per_budget] : values) {
    for (auto& [budget, v] : per_budget) {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size();
      medians[method][budget] = (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
    }
  }
  return medians;
}

ExperimentConfig trend_config(ModelKind model, const std::vector<std::string>& methods,
                              const std::vector<int>& budgets, int attempt,
                              const std::string& name) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.methods = methods;
  cfg.budgets = budgets;
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 5; ++s) cfg.seeds.push_back(s + 10ULL * (attempt - 1));
  cfg.out_dir = (g_workdir / (name + "_attempt" + std::to_string(attempt))).string();
  if (model == ModelKind::Gse) {
    cfg.smc_budget = 100000;
  }
  return cfg;
}

struct TrendAttempt {
  bool a_ok = true;
  std::vector<int> b_failures;  // budgets where signature median > k2 median
};

// shared protocol for criteria 7 and 8: up to 3 attempts with independent
// seed sets; one attempt may fail the (b) comparison at a single budget
bool run_trend(ModelKind model, bool use_w1, bool check_budget_decrease, const std::string& name,
               double time_limit, std::string& detail) {
  Timer timer;
  const std::vector<int> budgets{100, 250, 500};
  std::ostringstream os;
  int flawed = 0;
  bool clean_seen = false;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    const ExperimentConfig cfg =
        trend_config(model, {"signature", "k2"}, budgets, attempt, name);
    const ExperimentOutcome outcome = run_experiment(cfg);
    if (outcome.failed_cells > 0) {
      detail = "cells failed: see " + cfg.out_dir + "/cells.jsonl";
      return false;
    }
    const auto medians = metric_medians(outcome.records, use_w1);
    TrendAttempt result;
    if (check_budget_decrease) {
      result.a_ok = medians.at("signature").at(500) < medians.at("signature").at(100);
    }
    for (const int b : budgets) {
      if (!(medians.at("signature").at(b) <= medians.at("k2").at(b))) {
        result.b_failures.push_back(b);
      }
    }
    os << "attempt " << attempt << ": signature medians";
    for (const int b : budgets) os << " " << medians.at("signature").at(b);
    os << " vs k2";
    for (const int b : budgets) os << " " << medians.at("k2").at(b);
    os << "; ";

    if (result.a_ok && result.b_failures.empty()) {
      clean_seen = true;
      break;
    }
    if (!result.a_ok || result.b_failures.size() >= 2) {
      os << "intolerable failure; ";
      flawed += 2;  // outright fail
      break;
    }
    ++flawed;  // single-budget (b) miss, tolerated once
  }
  const double secs = timer.seconds();
  os << fmt_secs(secs);
  detail = os.str();
  return clean_seen && flawed <= 1 && secs < time_limit;
}

bool criterion_7(std::string& detail) {
  return run_trend(ModelKind::Ou, /*use_w1=*/true, /*check_budget_decrease=*/true, "c7_ou",
                   4.0 * 3600.0, detail);
}

bool criterion_8(std::string& detail) {
  return run_trend(ModelKind::Ma2, /*use_w1=*/false, /*check_budget_decrease=*/false, "c8_ma2",
                   4.0 * 3600.0, detail);
}

bool criterion_9(std::string& detail) {
  Timer timer;
  ExperimentConfig cfg;
  cfg.model = ModelKind::Gse;
  cfg.methods = {"signature", "signature-5", "k2", "k2-5"};
  cfg.budgets = {50, 100, 200};
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.smc_budget = 100000;
  cfg.out_dir = (g_workdir / "c9_gse").string();
  const ExperimentOutcome outcome = run_experiment(cfg);
  if (outcome.failed_cells > 0) {
    detail = "cells failed: see " + cfg.out_dir + "/cells.jsonl";
    return false;
  }
  const auto medians = metric_medians(outcome.records, true);
  const double sig5 = medians.at("signature-5").at(200);
  const double k25 = medians.at("k2-5").at(200);
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "signature-5 median W1 at budget 200 = " << sig5 << ", k2-5 = " << k25 << ", "
     << fmt_secs(secs);
  detail = os.str();
  return sig5 <= k25 && secs < 8.0 * 3600.0;
}

// --------------------------------------------------------------- criterion 10
bool criterion_10(std::string& detail) {
  const Model model = Model::make(ModelKind::Ou);
  OuConfig long_cfg;
  long_cfg.steps = 500;
  Rng obs_rng(0);
  const TimeSeries obs = simulate_ou(model.theta_star, long_cfg, obs_rng);

  const LogTargetFn target = [&](const Vec& theta) {
    const double lp = model.prior.logpdf(theta);
    if (!std::isfinite(lp)) return lp;
    return ou_loglik(obs, theta, long_cfg) + lp;
  };
  MhConfig mh;
  mh.init = model.theta_star;
  mh.trial_proposal_std = model.prior.proposal_scale();
  Rng rng(1010);
  const MhResult res = metropolis_hastings(target, mh, rng);

  Vec mean = Vec::Zero(2);
  for (const auto& s : res.samples) mean += s;
  mean /= static_cast<double>(res.samples.size());
  Vec sd = Vec::Zero(2);
  for (const auto& s : res.samples) sd += (s - mean).cwiseAbs2();
  sd = (sd / static_cast<double>(res.samples.size() - 1)).cwiseSqrt();

  bool mh_ok = true;
  for (int k = 0; k < 2; ++k) {
    if (std::fabs(mean[k] - model.theta_star[k]) > 3.0 * sd[k]) mh_ok = false;
  }

  // SIR frequency check: weights log 1 vs log 3 over two atoms
  std::vector<Vec> atoms{Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
  Rng sir_rng(1011);
  const auto resampled =
      sir_resample(atoms, {std::log(1.0), std::log(3.0)}, {2, 10000}, sir_rng);
  double second = 0.0;
  for (const auto& s : resampled) second += s[0];
  const double freq = second / 10000.0;
  const bool sir_ok = std::fabs(freq - 0.75) <= 0.02;

  std::ostringstream os;
  os << "posterior mean (" << mean[0] << ", " << mean[1] << ") vs theta* (0.5, 1), sd (" << sd[0]
     << ", " << sd[1] << "), acceptance " << res.acceptance_rate << "; SIR frequency " << freq;
  detail = os.str();
  return mh_ok && sir_ok;
}

// --------------------------------------------------------------- criterion 11
bool criterion_11(std::string& detail) {
  Rng rng(1101);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_int(50));
    SampleSet a, b;
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      const double x = rng.normal() * 2.0;
      const double y = rng.normal() * 1.5 + 0.7;
      a.points.push_back(Vec::Constant(1, x));
      b.points.push_back(Vec::Constant(1, y));
      xs.push_back(x);
      ys.push_back(y);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) oracle += std::fabs(xs[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(i)]);
    oracle /= n;
    worst = std::max(worst, std::fabs(wasserstein(a, b) - oracle));
  }

  // metric axioms on random 2-D triples
  bool axioms_ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(8));
    const auto cloud = [&](double shift) {
      SampleSet s;
      for (int i = 0; i < n; ++i) {
        Vec p(2);
        p << rng.normal() + shift, rng.normal();
        s.points.push_back(std::move(p));
      }
      return s;
    };
    const SampleSet a = cloud(0.0), b = cloud(0.4), c = cloud(-0.6);
    const double ab = wasserstein(a, b);
    if (std::fabs(ab - wasserstein(b, a)) > 1e-10) axioms_ok = false;
    if (wasserstein(a, a) > 1e-12) axioms_ok = false;
    if (ab > wasserstein(a, c) + wasserstein(c, b) + 1e-10) axioms_ok = false;
  }

  std::ostringstream os;
  os << "worst 1-D deviation from the sorted closed form " << worst
     << (axioms_ok ? ", metric axioms hold" : ", metric axioms VIOLATED");
  detail = os.str();
  return worst <= 1e-10 && axioms_ok;
}

// --------------------------------------------------------------- criterion 12
bool criterion_12(std::string& detail) {
  Timer timer;
  // the criterion-7 experiment (first attempt's config) run twice
  const ExperimentConfig base = trend_config(ModelKind::Ou, {"signature", "k2"}, {100, 250, 500},
                                             1, "c7_ou");
  ExperimentConfig again = base;
  again.out_dir = (g_workdir / "c12_rerun").string();
  fs::remove_all(again.out_dir);

  // reuse criterion 7's first run when present, otherwise produce it
  if (!fs::exists(fs::path(base.out_dir) / "records.csv")) {
    const ExperimentOutcome first = run_experiment(base);
    if (first.failed_cells > 0) {
      detail = "cells failed in the baseline run";
      return false;
    }
  }
  const ExperimentOutcome second = run_experiment(again);
  if (second.failed_cells > 0) {
    detail = "cells failed in the rerun";
    return false;
  }

  const auto slurp = [](const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(fs::path(base.out_dir) / "records.csv");
  const std::string b = slurp(fs::path(again.out_dir) / "records.csv");
  const double secs = timer.seconds();
  std::ostringstream os;
  os << "records CSVs " << (a == b && !a.empty() ? "byte-identical" : "DIFFER") << " ("
     << a.size() << " bytes), " << fmt_secs(secs);
  detail = os.str();
  return !a.empty() && a == b;
}

using CriterionFn = bool (*)(std::string&);

struct Criterion {
  int id;
  const char* name;
  CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, "signature-kernel PDE vs truncated oracle", criterion_1},
    {2, "single-segment closed form I0(2)", criterion_2},
    {3, "unbiased MMD hand value", criterion_3},
    {4, "Nystroem full-rank exactness", criterion_4},
    {5, "logistic gradient vs finite differences", criterion_5},
    {6, "ratio calibration on the analytic toy", criterion_6},
    {7, "OU end-to-end Wasserstein trend", criterion_7},
    {8, "MA(2) posterior-mean trend", criterion_8},
    {9, "GSE pipeline vs SMC-ABC reference", criterion_9},
    {10, "sampler sanity (exact-likelihood MH, SIR)", criterion_10},
    {11, "Wasserstein 1-D oracle and metric axioms", criterion_11},
    {12, "full-experiment determinism", criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string workdir = "acceptance_work";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criteria" && i + 1 < argc) {
      std::istringstream is(argv[++i]);
      std::string tok;
      while (std::getline(is, tok, ',')) selected.insert(std::stoi(tok));
    } else if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (arg == "--help" || arg == "-h") {
      std::cout << "usage: sigre_acceptance [--criteria 1,2,...] [--workdir DIR]\n";
      return 0;
    }
  }
  if (selected.empty()) {
    for (const auto& c : kCriteria) selected.insert(c.id);
  }
  g_workdir = workdir;
  fs::create_directories(g_workdir);
  // share one reference-posterior cache across criteria and invocations
  if (!std::getenv("SIGRE_CACHE_DIR")) {
    setenv("SIGRE_CACHE_DIR", (g_workdir / "cache").c_str(), 0);
  }

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.count(c.id)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& err) {
      detail = std::string("exception: ") + err.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name << " ("
              << detail << ")" << std::endl;
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
