#ifndef SIGRE_METRICS_HPP
#define SIGRE_METRICS_HPP

#include <string>
#include <vector>

#include "sigre/rng.hpp"
#include "sigre/series.hpp"

namespace sigre {

struct SampleSet {
  std::vector<Vec> points;
  std::string tag;

  void validate() const;
  Eigen::Index dim() const;
};

/// Exact 1-Wasserstein distance between the two empirical measures under
/// Euclidean ground cost, solved as a transportation problem (successive
/// shortest augmenting paths with potentials). Equal-size sets reduce to a
/// minimum-cost perfect matching divided by n.
double wasserstein(const SampleSet& a, const SampleSet& b);

/// Subsamples both sets to at most cap points (without replacement, metric
/// seed) before the exact solve; bounds the cubic cost on large clouds.
double wasserstein_capped(const SampleSet& a, const SampleSet& b, std::size_t cap,
                          std::uint64_t seed);

/// |mean(a) - mean(b)|_2
double mean_distance(const SampleSet& a, const SampleSet& b);

struct BootstrapCi {
  double low = 0.0;
  double mean = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap of the mean; the middle value is the plain arithmetic
/// mean of the inputs.
BootstrapCi bootstrap_ci(const std::vector<double>& values, double level, int replicates,
                         Rng& rng);

inline BootstrapCi bootstrap_ci(const std::vector<double>& values, Rng& rng) {
  return bootstrap_ci(values, 0.95, 10000, rng);
}

}  // namespace sigre

#endif
