#include "sigre/nystroem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace sigre {

namespace {
constexpr double kEigenFloorRel = 1e-10;
}

NystroemFactor nystroem_factor(const Mat& landmark_gram, double jitter) {
  const auto q = landmark_gram.rows();
  if (q == 0 || landmark_gram.cols() != q) {
    throw InvalidArgument("nystroem_factor: Gram matrix must be square and nonempty");
  }
  if (jitter < 0.0) throw InvalidArgument("nystroem_factor: jitter must be >= 0");
  Mat g = landmark_gram;
  if (jitter > 0.0) {
    const double mean_diag = g.diagonal().mean();
    g.diagonal().array() += jitter * mean_diag;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  if (eig.info() != Eigen::Success) {
    throw NonFinite("nystroem_factor: eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues; we keep them descending. Equal
  // eigenvalues keep their original (ascending-output) relative order, which
  // is deterministic for a fixed Gram.
  const Vec evals = eig.eigenvalues();
  const Mat evecs = eig.eigenvectors();
  const double lambda_max = evals[q - 1];
  const double floor = kEigenFloorRel * lambda_max;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = q - 1; i >= 0; --i) {
    if (evals[i] > floor && evals[i] > 0.0) kept.push_back(i);
  }
  if (kept.empty()) {
    throw RankCollapse("nystroem_factor: no eigenvalue above the floor");
  }
  NystroemFactor f;
  f.retained = static_cast<int>(kept.size());
  f.projection.resize(f.retained, q);
  f.eigenvalues.resize(f.retained);
  for (int r = 0; r < f.retained; ++r) {
    const auto src = kept[static_cast<std::size_t>(r)];
    f.eigenvalues[r] = evals[src];
    f.projection.row(r) = evecs.col(src).transpose() / std::sqrt(evals[src]);
  }
  return f;
}

NystroemMap nystroem_fit(const std::vector<PairSample>& landmarks, const PairKernel& kernel,
                         std::size_t q, double jitter) {
  if (q == 0 || q > landmarks.size()) {
    throw InvalidArgument("nystroem_fit: q must be in [1, #landmarks]");
  }
  std::vector<PairSample> lm(landmarks.begin(), landmarks.begin() + static_cast<std::ptrdiff_t>(q));
  const GramMatrix g = gram_matrix(lm, kernel, "nystroem-landmarks");
  NystroemFactor f = nystroem_factor(g.entries, jitter);
  NystroemMap map;
  map.landmarks = std::move(lm);
  map.projection = std::move(f.projection);
  map.eigenvalues = std::move(f.eigenvalues);
  map.retained = f.retained;
  map.kernel = kernel;
  return map;
}

Vec NystroemMap::transform(const PairSample& v) const {
  const auto q = static_cast<Eigen::Index>(landmarks.size());
  Vec col(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    col[j] = kernel.eval(v, landmarks[static_cast<std::size_t>(j)]);
  }
  return projection * col;
}

Vec NystroemMap::series_column(const TimeSeries& x) const {
  if (!kernel.series_part) {
    throw InvalidArgument("NystroemMap: kernel has no series factor");
  }
  const auto q = static_cast<Eigen::Index>(landmarks.size());
  Vec col(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    col[j] = kernel.series_part(x, landmarks[static_cast<std::size_t>(j)].series);
  }
  return col;
}

Vec NystroemMap::transform_product(const Vec& series_column, const Vec& theta) const {
  if (!kernel.param_part) {
    throw InvalidArgument("NystroemMap: kernel has no parameter factor");
  }
  const auto q = static_cast<Eigen::Index>(landmarks.size());
  if (series_column.size() != q) {
    throw DimensionMismatch("transform_product: series column length != q");
  }
  Vec col(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    col[j] = series_column[j] * kernel.param_part(theta, landmarks[static_cast<std::size_t>(j)].theta);
  }
  return projection * col;
}

}  // namespace sigre
