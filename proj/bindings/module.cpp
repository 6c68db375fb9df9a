#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sigre/harness.hpp"

namespace py = pybind11;
using namespace sigre;

namespace {

TimeSeries to_series(const Mat& values) { return TimeSeries(values); }

TimeSeries to_series_timed(const Mat& values, const Vec& times) {
  return TimeSeries(values, times);
}

SignatureKernelConfig sig_config(const std::string& static_kernel, double scale, int dyadic_order,
                                 bool normalize, bool time_augment) {
  SignatureKernelConfig cfg;
  cfg.static_kernel =
      static_kernel == "linear" ? StaticKernel::linear() : StaticKernel::rbf(scale);
  cfg.dyadic_order = dyadic_order;
  cfg.normalize = normalize;
  cfg.time_augment = time_augment;
  return cfg;
}

struct PyRatioEstimator {
  TrainResult result;

  double log_ratio(const Mat& x, const Vec& theta) const {
    return result.estimator.log_ratio(to_series(x), theta);
  }
  double decision(const Mat& x, const Vec& theta) const {
    return result.estimator.decision(to_series(x), theta);
  }
  double unnormalized_posterior(const Mat& x, const Vec& theta) const {
    return result.estimator.unnormalized_posterior(to_series(x), theta);
  }
  Vec log_ratio_profile(const Mat& x, const Mat& thetas) const {
    const auto profile = result.estimator.logit_profile(to_series(x));
    Vec out(thetas.rows());
    for (Eigen::Index i = 0; i < thetas.rows(); ++i) out[i] = profile(thetas.row(i).transpose());
    return out;
  }
  double cv_logloss() const { return result.cv_logloss; }
  std::string label() const { return result.config.label(); }
  std::string to_json() const { return estimator_to_json(result); }
};

PyRatioEstimator fit_ratio(const std::vector<Mat>& series, const Mat& thetas, const Mat& obs,
                           const Vec& prior_lows, const Vec& prior_highs,
                           const std::string& method, double K, std::size_t q, int trials,
                           int folds, int dyadic_order, std::uint64_t seed) {
  if (series.size() != static_cast<std::size_t>(thetas.rows())) {
    throw InvalidArgument("fit_ratio: series count must match theta rows");
  }
  Dataset data;
  data.seed = seed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    data.entries.push_back(
        {to_series(series[i]), thetas.row(static_cast<Eigen::Index>(i)).transpose()});
  }
  const Prior prior(UniformBox{prior_lows, prior_highs});
  MethodConfig base = MethodConfig::from_label(method);
  if (K > 0.0) base.K = K;
  base.q = q;
  base.sig.dyadic_order = dyadic_order;
  TuneSpace space;
  space.trials = trials;
  space.folds = folds;
  Rng rng(seed);
  return PyRatioEstimator{
      train_ratio_estimator(data, to_series(obs), prior, base, space, rng)};
}

}  // namespace

PYBIND11_MODULE(_sigre, m) {
  m.doc() = "Signature-kernel likelihood-to-evidence ratio estimation";

  py::register_exception<Error>(m, "SigreError");

  // series utilities
  m.def(
      "time_augment",
      [](const Mat& values) { return time_augment(to_series(values)).values; },
      py::arg("values"), "Prepend a [0,1] time channel to a regularly sampled series.");
  m.def(
      "time_augment_timed",
      [](const Mat& values, const Vec& times) {
        return time_augment(to_series_timed(values, times)).values;
      },
      py::arg("values"), py::arg("times"));
  m.def(
      "median_pairwise_sq_dist",
      [](const Mat& values) { return median_pairwise_sq_dist(to_series(values)); },
      py::arg("values"));

  // kernels
  m.def(
      "signature_kernel",
      [](const Mat& x, const Mat& y, const std::string& static_kernel, double scale,
         int dyadic_order, bool normalize, bool time_augment) {
        return signature_kernel_eval(to_series(x), to_series(y),
                                     sig_config(static_kernel, scale, dyadic_order, normalize,
                                                time_augment));
      },
      py::arg("x"), py::arg("y"), py::arg("static_kernel") = "rbf", py::arg("scale") = 1.0,
      py::arg("dyadic_order") = 2, py::arg("normalize") = false, py::arg("time_augment") = true,
      "Goursat-PDE signature kernel of two series.");
  m.def(
      "truncated_sig_inner",
      [](const Mat& x, const Mat& y, int depth) {
        return truncated_sig_inner(to_series(x), to_series(y), depth);
      },
      py::arg("x"), py::arg("y"), py::arg("depth"),
      "Brute-force truncated signature inner product (linear static kernel).");
  m.def(
      "mmd_sq_unbiased",
      [](const Mat& x, const Mat& y, double bandwidth) {
        return mmd_sq_unbiased(to_series(x), to_series(y), bandwidth);
      },
      py::arg("x"), py::arg("y"), py::arg("bandwidth"));
  m.def(
      "k2_kernel",
      [](const Mat& x, const Mat& y, double epsilon, double chi_bandwidth) {
        K2KernelConfig cfg;
        cfg.epsilon = epsilon;
        cfg.chi_bandwidth = chi_bandwidth;
        return k2_kernel_eval(to_series(x), to_series(y), cfg);
      },
      py::arg("x"), py::arg("y"), py::arg("epsilon") = 1.0, py::arg("chi_bandwidth") = 1.0);

  // simulators
  m.def(
      "simulate_ou",
      [](double theta1, double theta2, std::uint64_t seed, int steps, double dt) {
        OuConfig cfg;
        cfg.steps = steps;
        cfg.dt = dt;
        Vec theta(2);
        theta << theta1, theta2;
        Rng rng(seed);
        return simulate_ou(theta, cfg, rng).values;
      },
      py::arg("theta1"), py::arg("theta2"), py::arg("seed") = 0, py::arg("steps") = 50,
      py::arg("dt") = 0.2);
  m.def(
      "simulate_ma2",
      [](double theta1, double theta2, std::uint64_t seed, int length) {
        Ma2Config cfg;
        cfg.length = length;
        Vec theta(2);
        theta << theta1, theta2;
        Rng rng(seed);
        return simulate_ma2(theta, cfg, rng).values;
      },
      py::arg("theta1"), py::arg("theta2"), py::arg("seed") = 0, py::arg("length") = 50);
  m.def(
      "simulate_gse",
      [](double beta, double gamma, std::uint64_t seed, int population, int initial_infected,
         double obs_dt, int obs_count) {
        GseConfig cfg;
        cfg.population = population;
        cfg.initial_infected = initial_infected;
        cfg.obs_dt = obs_dt;
        cfg.obs_count = obs_count;
        Vec theta(2);
        theta << beta, gamma;
        Rng rng(seed);
        return simulate_gse(theta, cfg, rng).values;
      },
      py::arg("beta"), py::arg("gamma"), py::arg("seed") = 0, py::arg("population") = 100,
      py::arg("initial_infected") = 5, py::arg("obs_dt") = 0.5, py::arg("obs_count") = 100);
  m.def(
      "ou_loglik",
      [](const Mat& x, double theta1, double theta2, double dt) {
        OuConfig cfg;
        cfg.dt = dt;
        Vec theta(2);
        theta << theta1, theta2;
        return ou_loglik(to_series(x), theta, cfg);
      },
      py::arg("x"), py::arg("theta1"), py::arg("theta2"), py::arg("dt") = 0.2);
  m.def(
      "ma2_loglik",
      [](const Mat& x, double theta1, double theta2) {
        Vec theta(2);
        theta << theta1, theta2;
        return ma2_loglik(to_series(x), theta);
      },
      py::arg("x"), py::arg("theta1"), py::arg("theta2"));
  m.def(
      "bespoke_summaries",
      [](const Mat& x, const std::string& model) {
        return bespoke_summaries(to_series(x), model_kind_from_string(model));
      },
      py::arg("x"), py::arg("model"));

  // metrics
  m.def(
      "wasserstein",
      [](const Mat& a, const Mat& b) {
        SampleSet sa, sb;
        for (Eigen::Index i = 0; i < a.rows(); ++i) sa.points.push_back(a.row(i).transpose());
        for (Eigen::Index i = 0; i < b.rows(); ++i) sb.points.push_back(b.row(i).transpose());
        return wasserstein(sa, sb);
      },
      py::arg("a"), py::arg("b"), "Exact 1-Wasserstein distance between two sample clouds.");
  m.def(
      "mean_distance",
      [](const Mat& a, const Mat& b) {
        SampleSet sa, sb;
        for (Eigen::Index i = 0; i < a.rows(); ++i) sa.points.push_back(a.row(i).transpose());
        for (Eigen::Index i = 0; i < b.rows(); ++i) sb.points.push_back(b.row(i).transpose());
        return mean_distance(sa, sb);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& values, double level, int replicates, std::uint64_t seed) {
        Rng rng(seed);
        const BootstrapCi ci = bootstrap_ci(values, level, replicates, rng);
        return py::make_tuple(ci.low, ci.mean, ci.high);
      },
      py::arg("values"), py::arg("level") = 0.95, py::arg("replicates") = 10000,
      py::arg("seed") = 0);

  // samplers
  m.def(
      "sir_resample",
      [](const Mat& samples, const std::vector<double>& log_weights, std::size_t draws,
         std::uint64_t seed) {
        std::vector<Vec> atoms;
        for (Eigen::Index i = 0; i < samples.rows(); ++i) {
          atoms.push_back(samples.row(i).transpose());
        }
        Rng rng(seed);
        const auto out = sir_resample(atoms, log_weights, {atoms.size(), draws}, rng);
        Mat result(static_cast<Eigen::Index>(out.size()), samples.cols());
        for (std::size_t i = 0; i < out.size(); ++i) {
          result.row(static_cast<Eigen::Index>(i)) = out[i].transpose();
        }
        return result;
      },
      py::arg("samples"), py::arg("log_weights"), py::arg("draws") = 1000, py::arg("seed") = 0);
  m.def(
      "metropolis_hastings",
      [](const std::function<double(const Vec&)>& log_target, const Vec& init,
         const Vec& trial_std, int trial_steps, int main_steps, int thin, std::uint64_t seed) {
        MhConfig cfg;
        cfg.init = init;
        cfg.trial_proposal_std = trial_std;
        cfg.trial_steps = trial_steps;
        cfg.main_steps = main_steps;
        cfg.thin = thin;
        Rng rng(seed);
        const MhResult res = metropolis_hastings(log_target, cfg, rng);
        Mat samples(static_cast<Eigen::Index>(res.samples.size()), init.size());
        for (std::size_t i = 0; i < res.samples.size(); ++i) {
          samples.row(static_cast<Eigen::Index>(i)) = res.samples[i].transpose();
        }
        return py::make_tuple(samples, res.acceptance_rate);
      },
      py::arg("log_target"), py::arg("init"), py::arg("trial_std"), py::arg("trial_steps") = 50000,
      py::arg("main_steps") = 100000, py::arg("thin") = 100, py::arg("seed") = 0,
      "Adaptive two-phase Metropolis-Hastings; returns (samples, acceptance_rate).");

  // amortised ratio estimation
  py::class_<PyRatioEstimator>(m, "RatioEstimator")
      .def("log_ratio", &PyRatioEstimator::log_ratio, py::arg("x"), py::arg("theta"))
      .def("decision", &PyRatioEstimator::decision, py::arg("x"), py::arg("theta"))
      .def("unnormalized_posterior", &PyRatioEstimator::unnormalized_posterior, py::arg("x"),
           py::arg("theta"))
      .def("log_ratio_profile", &PyRatioEstimator::log_ratio_profile, py::arg("x"),
           py::arg("thetas"), "log r(x, theta) for each row of thetas at fixed x.")
      .def_property_readonly("cv_logloss", &PyRatioEstimator::cv_logloss)
      .def_property_readonly("label", &PyRatioEstimator::label)
      .def("to_json", &PyRatioEstimator::to_json);

  m.def("fit_ratio", &fit_ratio, py::arg("series"), py::arg("thetas"), py::arg("obs"),
        py::arg("prior_lows"), py::arg("prior_highs"), py::arg("method") = "signature",
        py::arg("K") = 1.0, py::arg("q") = 0, py::arg("trials") = 10, py::arg("folds") = 5,
        py::arg("dyadic_order") = 2, py::arg("seed") = 1,
        "Train an amortised likelihood-to-evidence ratio estimator under a uniform-box prior.");

  m.attr("__version__") = "0.1.0";
}
