#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sigre/metrics.hpp"

using namespace sigre;
using Catch::Approx;

namespace {

SampleSet from_values(const std::vector<double>& xs) {
  SampleSet s;
  for (const double x : xs) s.points.push_back(Vec::Constant(1, x));
  return s;
}

SampleSet random_cloud(int n, int d, Rng& rng, double shift = 0.0) {
  SampleSet s;
  for (int i = 0; i < n; ++i) {
    Vec p(d);
    for (int j = 0; j < d; ++j) p[j] = rng.normal() + shift;
    s.points.push_back(std::move(p));
  }
  return s;
}

double sorted_oracle_w1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("wasserstein trivial cases", "[metrics]") {
  const SampleSet a = from_values({0.0, 1.0, 2.5});
  REQUIRE(wasserstein(a, a) == Approx(0.0).margin(1e-14));
  REQUIRE(wasserstein(from_values({0.0}), from_values({1.0})) == Approx(1.0));
}

TEST_CASE("1-D equal-size W1 equals the order-statistics closed form", "[metrics]") {
  Rng rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_int(40));
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      xs.push_back(rng.normal() * (1.0 + rep % 3));
      ys.push_back(rng.normal() * 2.0 + 0.4);
    }
    const double w = wasserstein(from_values(xs), from_values(ys));
    REQUIRE(w == Approx(sorted_oracle_w1(xs, ys)).margin(1e-10));
  }
}

TEST_CASE("unequal-size W1 hand values", "[metrics]") {
  REQUIRE(wasserstein(from_values({0.0, 1.0}), from_values({0.5})) == Approx(0.5));
  // quantile-function oracle: thirds against halves
  REQUIRE(wasserstein(from_values({0.0, 1.0, 2.0}), from_values({0.0, 3.0})) ==
          Approx(5.0 / 6.0).margin(1e-12));
}

TEST_CASE("wasserstein metric axioms on random triples", "[metrics]") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(10));
    const SampleSet a = random_cloud(n, 2, rng);
    const SampleSet b = random_cloud(n, 2, rng, 0.5);
    const SampleSet c = random_cloud(n, 2, rng, -0.3);
    const double ab = wasserstein(a, b);
    const double ba = wasserstein(b, a);
    const double ac = wasserstein(a, c);
    const double cb = wasserstein(c, b);
    REQUIRE(ab == Approx(ba).margin(1e-10));
    REQUIRE(wasserstein(a, a) == Approx(0.0).margin(1e-12));
    REQUIRE(ab <= ac + cb + 1e-10);
    REQUIRE(ab >= 0.0);
  }
}

TEST_CASE("wasserstein translation invariance", "[metrics]") {
  Rng rng(43);
  const SampleSet a = random_cloud(15, 2, rng);
  const SampleSet b = random_cloud(15, 2, rng, 1.0);
  const double base = wasserstein(a, b);
  Vec shift(2);
  shift << 2.0, -1.0;
  SampleSet as = a, bs = b;
  for (auto& p : as.points) p += shift;
  for (auto& p : bs.points) p += shift;
  REQUIRE(wasserstein(as, bs) == Approx(base).margin(1e-10));
}

TEST_CASE("downsampling stability on a common cloud", "[metrics]") {
  Rng rng(44);
  const SampleSet cloud = random_cloud(5000, 2, rng);
  double diameter = 0.0;
  for (int rep = 0; rep < 4000; ++rep) {
    const auto i = rng.uniform_int(cloud.points.size());
    const auto j = rng.uniform_int(cloud.points.size());
    diameter = std::max(diameter, (cloud.points[i] - cloud.points[j]).norm());
  }
  const double w = wasserstein_capped(cloud, cloud, 1000, 777);
  REQUIRE(w <= 0.05 * diameter);
}

TEST_CASE("mean_distance basics", "[metrics]") {
  const SampleSet a = from_values({0.0, 2.0});
  REQUIRE(mean_distance(a, a) == 0.0);

  SampleSet u, v;
  Vec p(2), q(2);
  p << 0.0, 0.0;
  q << 3.0, 4.0;
  u.points = {p};
  v.points = {q};
  REQUIRE(mean_distance(u, v) == Approx(5.0));

  Vec shift(2);
  shift << -1.0, 2.0;
  SampleSet us = u, vs = v;
  us.points[0] += shift;
  vs.points[0] += shift;
  REQUIRE(mean_distance(us, vs) == Approx(mean_distance(u, v)));
}

TEST_CASE("bootstrap confidence intervals", "[metrics]") {
  SECTION("constant values collapse the interval") {
    Rng rng(45);
    const BootstrapCi ci = bootstrap_ci({2.5, 2.5, 2.5, 2.5}, rng);
    REQUIRE(ci.low == Approx(2.5));
    REQUIRE(ci.mean == Approx(2.5));
    REQUIRE(ci.high == Approx(2.5));
  }

  SECTION("mean equals the arithmetic mean exactly") {
    Rng rng(46);
    const std::vector<double> values{1.0, 2.0, 4.0, 8.0};
    const BootstrapCi ci = bootstrap_ci(values, rng);
    REQUIRE(ci.mean == Approx(3.75));
    REQUIRE(ci.low <= ci.mean);
    REQUIRE(ci.mean <= ci.high);
  }

  SECTION("width shrinks roughly as 1/sqrt(n)") {
    Rng data_rng(47);
    std::vector<double> widths;
    for (const int n : {10, 40, 160}) {
      std::vector<double> values;
      for (int i = 0; i < n; ++i) values.push_back(data_rng.normal());
      Rng rng(48);
      const BootstrapCi ci = bootstrap_ci(values, 0.95, 10000, rng);
      widths.push_back(ci.high - ci.low);
    }
    REQUIRE(widths[1] < widths[0]);
    REQUIRE(widths[2] < widths[1]);
    // quadrupling n roughly halves the width
    REQUIRE(widths[0] / widths[1] == Approx(2.0).epsilon(0.5));
    REQUIRE(widths[1] / widths[2] == Approx(2.0).epsilon(0.5));
  }

  SECTION("too few values raise") {
    Rng rng(49);
    REQUIRE_THROWS_AS(bootstrap_ci({1.0}, rng), TooFewValues);
  }
}
