#include "sigre/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sigre {

using json = nlohmann::json;

TimeSeries::TimeSeries(Mat v, Vec t) : values(std::move(v)), times(std::move(t)) {
  validate();
}

TimeSeries::TimeSeries(Mat v) : values(std::move(v)) {
  times = Vec::LinSpaced(values.rows(), 0.0, static_cast<double>(values.rows() - 1));
  validate();
}

void TimeSeries::validate() const {
  if (values.rows() != times.size()) {
    throw DimensionMismatch("TimeSeries: values rows and times length differ");
  }
  if (!values.allFinite() || !times.allFinite()) {
    throw NonFinite("TimeSeries: non-finite entry");
  }
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument("TimeSeries: times must be strictly increasing");
    }
  }
}

void Dataset::validate() const {
  if (entries.empty()) return;
  const auto d = entries.front().series.channels();
  const auto p = entries.front().theta.size();
  for (const auto& e : entries) {
    e.series.validate();
    if (e.series.channels() != d) throw DimensionMismatch("Dataset: mixed channel counts");
    if (e.theta.size() != p) throw DimensionMismatch("Dataset: mixed parameter dimensions");
  }
}

TimeSeries time_augment(const TimeSeries& s) {
  const auto n = s.length();
  const auto d = s.channels();
  Mat out(n, d + 1);
  const double t0 = s.times[0];
  const double span = s.times[n - 1] - t0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, 0) = span > 0.0 ? (s.times[i] - t0) / span : 0.0;
  }
  out.rightCols(d) = s.values;
  return TimeSeries(std::move(out), s.times);
}

double median_pairwise_sq_dist(const TimeSeries& s) {
  const auto n = s.length();
  if (n < 2) throw InvalidArgument("median_pairwise_sq_dist: need at least 2 time steps");
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d2.push_back((s.values.row(i) - s.values.row(j)).squaredNorm());
    }
  }
  std::sort(d2.begin(), d2.end());
  if (d2.back() == 0.0) {
    throw DegenerateScale("median_pairwise_sq_dist: all pairwise distances are zero");
  }
  const std::size_t m = d2.size();
  return (m % 2 == 1) ? d2[m / 2] : 0.5 * (d2[m / 2 - 1] + d2[m / 2]);
}

namespace {

std::string fmt_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string series_to_csv(const TimeSeries& s) {
  std::ostringstream os;
  os << "time";
  for (Eigen::Index c = 0; c < s.channels(); ++c) os << ",ch" << c;
  os << "\n";
  for (Eigen::Index i = 0; i < s.length(); ++i) {
    os << fmt_double(s.times[i]);
    for (Eigen::Index c = 0; c < s.channels(); ++c) os << "," << fmt_double(s.values(i, c));
    os << "\n";
  }
  return os.str();
}

TimeSeries series_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("series_from_csv: no data rows");
  const std::size_t cols = rows.front().size();
  if (cols < 2) throw InvalidArgument("series_from_csv: need time plus one channel");
  Mat values(rows.size(), cols - 1);
  Vec times(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InvalidArgument("series_from_csv: ragged rows");
    times[static_cast<Eigen::Index>(i)] = rows[i][0];
    for (std::size_t c = 1; c < cols; ++c) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) = rows[i][c];
    }
  }
  return TimeSeries(std::move(values), std::move(times));
}

void save_series_csv(const TimeSeries& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open for writing: " + path);
  f << series_to_csv(s);
}

TimeSeries load_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return series_from_csv(ss.str());
}

std::string dataset_to_json(const Dataset& d) {
  json j;
  j["seed"] = d.seed;
  j["entries"] = json::array();
  for (const auto& e : d.entries) {
    json je;
    je["theta"] = std::vector<double>(e.theta.data(), e.theta.data() + e.theta.size());
    je["times"] = std::vector<double>(e.series.times.data(), e.series.times.data() + e.series.times.size());
    json values = json::array();
    for (Eigen::Index i = 0; i < e.series.length(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < e.series.channels(); ++c) row.push_back(e.series.values(i, c));
      values.push_back(std::move(row));
    }
    je["values"] = std::move(values);
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2);
}

Dataset dataset_from_json(const std::string& text) {
  const json j = json::parse(text);
  Dataset d;
  d.seed = j.value("seed", std::uint64_t{0});
  for (const auto& je : j.at("entries")) {
    Dataset::Entry e;
    const auto theta = je.at("theta").get<std::vector<double>>();
    e.theta = Eigen::Map<const Vec>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    const auto times = je.at("times").get<std::vector<double>>();
    const auto& values = je.at("values");
    const auto n = values.size();
    if (n == 0) throw InvalidArgument("dataset_from_json: empty series");
    const auto ch = values.at(0).size();
    Mat v(n, ch);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = values.at(i).get<std::vector<double>>();
      if (row.size() != ch) throw InvalidArgument("dataset_from_json: ragged values");
      for (std::size_t c = 0; c < ch; ++c) {
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
    e.series = TimeSeries(std::move(v), Eigen::Map<const Vec>(times.data(), static_cast<Eigen::Index>(times.size())));
    d.entries.push_back(std::move(e));
  }
  d.validate();
  return d;
}

void save_dataset_json(const Dataset& d, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open for writing: " + path);
  f << dataset_to_json(d) << "\n";
}

Dataset load_dataset_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return dataset_from_json(ss.str());
}

}  // namespace sigre
