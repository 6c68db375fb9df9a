#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sigre/nystroem.hpp"
#include "sigre/rng.hpp"

using namespace sigre;
using Catch::Approx;

namespace {

PairSample tagged_pair(double tag) {
  Mat v(2, 1);
  v << 0.0, tag;
  Vec theta(1);
  theta << tag;
  return {TimeSeries(v), theta};
}

// product kernel that is smooth in the tag; full rank for distinct tags
PairKernel smooth_kernel() {
  return make_product_kernel(
      [](const TimeSeries& a, const TimeSeries& b) {
        return std::exp(-(a.values - b.values).squaredNorm() / 4.0);
      },
      [](const Vec& a, const Vec& b) { return std::exp(-(a - b).squaredNorm()); });
}

// kernel driven by the theta tag only: 1 when equal, otherwise 0
PairKernel indicator_kernel() {
  PairKernel k;
  k.eval = [](const PairSample& p, const PairSample& q) {
    return p.theta[0] == q.theta[0] ? 1.0 : 0.0;
  };
  return k;
}

}  // namespace

TEST_CASE("identity landmark Gram gives unit features", "[nystroem]") {
  const std::vector<PairSample> landmarks{tagged_pair(0.0), tagged_pair(1.0)};
  const NystroemMap map = nystroem_fit(landmarks, indicator_kernel(), 2, 0.0);
  REQUIRE(map.retained == 2);
  const Vec f0 = map.transform(landmarks[0]);
  const Vec f1 = map.transform(landmarks[1]);
  // up to sign and component order the features are the unit vectors
  REQUIRE(f0.squaredNorm() == Approx(1.0).margin(1e-12));
  REQUIRE(f1.squaredNorm() == Approx(1.0).margin(1e-12));
  REQUIRE(f0.dot(f1) == Approx(0.0).margin(1e-12));
}

TEST_CASE("full-rank Nystroem reproduces the Gram", "[nystroem]") {
  Rng rng(31);
  std::vector<PairSample> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(tagged_pair(rng.normal()));
  const PairKernel kernel = smooth_kernel();
  const NystroemMap map = nystroem_fit(pts, kernel, pts.size(), 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec fi = map.transform(pts[i]);
    for (std::size_t j = i; j < pts.size(); ++j) {
      const Vec fj = map.transform(pts[j]);
      REQUIRE(fi.dot(fj) == Approx(kernel.eval(pts[i], pts[j])).margin(1e-8));
    }
  }
}

TEST_CASE("duplicated landmark discards one component", "[nystroem]") {
  const std::vector<PairSample> landmarks{tagged_pair(0.7), tagged_pair(0.7)};
  const NystroemMap map = nystroem_fit(landmarks, smooth_kernel(), 2, 0.0);
  REQUIRE(map.retained == 1);
}

TEST_CASE("transform of a landmark matches its fitted feature row", "[nystroem]") {
  Rng rng(32);
  std::vector<PairSample> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(tagged_pair(rng.normal()));
  const PairKernel kernel = smooth_kernel();
  const NystroemMap map = nystroem_fit(pts, kernel, pts.size(), 1e-8);
  const GramMatrix g = gram_matrix(pts, kernel);
  Mat jittered = g.entries;
  jittered.diagonal().array() += 1e-8 * jittered.diagonal().mean();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec direct = map.transform(pts[i]);
    const Vec via_gram = map.projection * g.entries.col(static_cast<Eigen::Index>(i));
    REQUIRE((direct - via_gram).cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("held-out inner products approximate the kernel", "[nystroem]") {
  Rng rng(33);
  std::vector<PairSample> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(tagged_pair(rng.normal()));
  const PairKernel kernel = smooth_kernel();
  const NystroemMap map = nystroem_fit(pts, kernel, pts.size(), 0.0);
  for (int rep = 0; rep < 20; ++rep) {
    const PairSample a = tagged_pair(rng.normal() * 0.5);
    const PairSample b = tagged_pair(rng.normal() * 0.5);
    const double approx_val = map.transform(a).dot(map.transform(b));
    // landmarks cover the tag range densely enough for a loose bound
    REQUIRE(approx_val == Approx(kernel.eval(a, b)).margin(0.05));
  }
}

TEST_CASE("vanishing kernel column maps to the zero vector", "[nystroem]") {
  std::vector<PairSample> pts{tagged_pair(0.0), tagged_pair(1.0), tagged_pair(2.0)};
  const NystroemMap map = nystroem_fit(pts, smooth_kernel(), 3, 0.0);
  const PairSample far = tagged_pair(1e6);
  REQUIRE(map.transform(far).cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-12));
}

TEST_CASE("reconstruction error is monotone in retained components", "[nystroem]") {
  Rng rng(34);
  std::vector<PairSample> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(tagged_pair(rng.normal()));
  const PairKernel kernel = smooth_kernel();
  const GramMatrix g = gram_matrix(pts, kernel);
  const NystroemFactor f = nystroem_factor(g.entries, 0.0);

  // features restricted to the leading r components reconstruct K with
  // non-increasing Frobenius error
  const Mat features = g.entries * f.projection.transpose();  // N x retained
  double prev = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= f.retained; ++r) {
    const Mat fr = features.leftCols(r);
    const double err = (fr * fr.transpose() - g.entries).norm();
    REQUIRE(err <= prev + 1e-10);
    prev = err;
  }
}

TEST_CASE("rank collapse raises", "[nystroem]") {
  PairKernel zero;
  zero.eval = [](const PairSample&, const PairSample&) { return 0.0; };
  const std::vector<PairSample> pts{tagged_pair(0.0), tagged_pair(1.0)};
  REQUIRE_THROWS_AS(nystroem_fit(pts, zero, 2, 0.0), RankCollapse);
}

TEST_CASE("fit is deterministic", "[nystroem]") {
  Rng rng(35);
  std::vector<PairSample> pts;
  for (int i = 0; i < 9; ++i) pts.push_back(tagged_pair(rng.normal()));
  const NystroemMap a = nystroem_fit(pts, smooth_kernel(), 9, 1e-8);
  const NystroemMap b = nystroem_fit(pts, smooth_kernel(), 9, 1e-8);
  REQUIRE(a.retained == b.retained);
  REQUIRE((a.projection - b.projection).cwiseAbs().maxCoeff() == 0.0);
}
