#include <catch2/catch_amalgamated.hpp>

#include "sigre/rng.hpp"
#include "sigre/series.hpp"

using namespace sigre;
using Catch::Approx;

namespace {

TimeSeries scalar_series(std::initializer_list<double> values) {
  Mat v(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (const double x : values) v(i++, 0) = x;
  return TimeSeries(std::move(v));
}

TimeSeries random_series(int n, int d, Rng& rng, double scale = 1.0) {
  Mat v(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) v(i, c) = scale * rng.normal();
  }
  return TimeSeries(std::move(v));
}

}  // namespace

TEST_CASE("time_augment prepends a [0,1] time channel", "[series]") {
  SECTION("two points at times 0,1") {
    Mat v(2, 1);
    v << 5.0, 7.0;
    Vec t(2);
    t << 0.0, 1.0;
    const TimeSeries out = time_augment(TimeSeries(v, t));
    REQUIRE(out.channels() == 2);
    REQUIRE(out.values(0, 0) == 0.0);
    REQUIRE(out.values(1, 0) == 1.0);
    REQUIRE(out.values(0, 1) == 5.0);
    REQUIRE(out.values(1, 1) == 7.0);
  }
  SECTION("regular grid of length 3 rescales to 0, 0.5, 1") {
    const TimeSeries out = time_augment(scalar_series({4.0, 4.0, 4.0}));
    REQUIRE(out.values(0, 0) == Approx(0.0));
    REQUIRE(out.values(1, 0) == Approx(0.5));
    REQUIRE(out.values(2, 0) == Approx(1.0));
  }
  SECTION("augmenting twice stacks two identical time channels") {
    const TimeSeries out = time_augment(time_augment(scalar_series({1.0, 2.0, 3.0})));
    REQUIRE(out.channels() == 3);
    REQUIRE((out.values.col(0) - out.values.col(1)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("time_augment properties", "[series]") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_int(8));
    const int d = 1 + static_cast<int>(rng.uniform_int(3));
    const TimeSeries s = random_series(n, d, rng);
    const TimeSeries a = time_augment(s);
    REQUIRE(a.length() == s.length());
    REQUIRE(a.channels() == s.channels() + 1);
    for (Eigen::Index i = 1; i < a.length(); ++i) {
      REQUIRE(a.values(i, 0) > a.values(i - 1, 0));
    }
    REQUIRE((a.values.rightCols(d) - s.values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("median_pairwise_sq_dist on hand examples", "[series]") {
  REQUIRE(median_pairwise_sq_dist(scalar_series({0.0, 3.0})) == Approx(9.0));
  // pairs {1, 4, 1} -> median 1
  REQUIRE(median_pairwise_sq_dist(scalar_series({0.0, 1.0, 2.0})) == Approx(1.0));
  REQUIRE_THROWS_AS(median_pairwise_sq_dist(scalar_series({2.0, 2.0, 2.0})), DegenerateScale);
}

TEST_CASE("median_pairwise_sq_dist invariances", "[series]") {
  Rng rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(8));
    const int d = 1 + static_cast<int>(rng.uniform_int(3));
    const TimeSeries s = random_series(n, d, rng);
    const double base = median_pairwise_sq_dist(s);

    // permutation of time steps
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Mat pv(n, d);
    for (int i = 0; i < n; ++i) pv.row(i) = s.values.row(perm[static_cast<std::size_t>(i)]);
    REQUIRE(median_pairwise_sq_dist(TimeSeries(pv)) == Approx(base));

    // translation
    Mat tv = s.values;
    tv.rowwise() += Eigen::RowVectorXd::Constant(d, 2.5);
    REQUIRE(median_pairwise_sq_dist(TimeSeries(tv)) == Approx(base));

    // scaling by c multiplies the median by c^2
    const double c = 0.5 + rng.uniform();
    REQUIRE(median_pairwise_sq_dist(TimeSeries(Mat(c * s.values))) == Approx(c * c * base));
  }
}

TEST_CASE("series CSV round trip", "[series]") {
  Rng rng(13);
  const TimeSeries s = random_series(6, 2, rng);
  const TimeSeries back = series_from_csv(series_to_csv(s));
  REQUIRE(back.length() == s.length());
  REQUIRE(back.channels() == s.channels());
  REQUIRE((back.values - s.values).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.times - s.times).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset JSON round trip", "[series]") {
  Rng rng(14);
  Dataset d;
  d.seed = 99;
  for (int i = 0; i < 4; ++i) {
    Vec theta(2);
    theta << rng.normal(), rng.normal();
    d.entries.push_back({random_series(5, 2, rng), theta});
  }
  const Dataset back = dataset_from_json(dataset_to_json(d));
  REQUIRE(back.seed == 99);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE((back.entries[i].theta - d.entries[i].theta).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((back.entries[i].series.values - d.entries[i].series.values).cwiseAbs().maxCoeff() ==
            0.0);
  }
}

TEST_CASE("series validation rejects bad input", "[series]") {
  Mat v(2, 1);
  v << 0.0, 1.0;
  Vec bad_times(2);
  bad_times << 1.0, 1.0;  // not strictly increasing
  REQUIRE_THROWS_AS(TimeSeries(v, bad_times), InvalidArgument);
  Mat nan(2, 1);
  nan << 0.0, std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(TimeSeries(nan), NonFinite);
}
