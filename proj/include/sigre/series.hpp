#ifndef SIGRE_SERIES_HPP
#define SIGRE_SERIES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sigre/errors.hpp"

namespace sigre {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A d-channel time series: values is n x d (rows are time steps), times is a
/// strictly increasing grid of length n.
struct TimeSeries {
  Mat values;
  Vec times;

  TimeSeries() = default;
  TimeSeries(Mat v, Vec t);

  // values with an implicit regular grid 0..n-1
  explicit TimeSeries(Mat v);

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }

  void validate() const;
};

/// Simulated (series, parameter) pairs plus the seed that produced them.
struct Dataset {
  struct Entry {
    TimeSeries series;
    Vec theta;
  };
  std::vector<Entry> entries;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
  void validate() const;
};

/// Prepends a time channel rescaled to [0, 1]; data channels are untouched.
TimeSeries time_augment(const TimeSeries& s);

/// Median of squared Euclidean distances over all unordered row pairs i < j.
/// Self-pairs are excluded. Throws DegenerateScale when every pair coincides.
double median_pairwise_sq_dist(const TimeSeries& s);

// --- serialization ---

/// CSV with header "time,ch0,ch1,...", one row per time step.
std::string series_to_csv(const TimeSeries& s);
TimeSeries series_from_csv(const std::string& text);

void save_series_csv(const TimeSeries& s, const std::string& path);
TimeSeries load_series_csv(const std::string& path);

/// JSON layout: {"seed": ..., "entries": [{"theta": [...], "times": [...],
/// "values": [[...]]}]}
std::string dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const std::string& text);

void save_dataset_json(const Dataset& d, const std::string& path);
Dataset load_dataset_json(const std::string& path);

}  // namespace sigre

#endif
