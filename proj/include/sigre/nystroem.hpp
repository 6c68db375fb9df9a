#ifndef SIGRE_NYSTROEM_HPP
#define SIGRE_NYSTROEM_HPP

#include <vector>

#include "sigre/kernels.hpp"

namespace sigre {

/// Low-rank feature map phi(v) = D^{-1/2} U' [m(v, v1), ..., m(v, vq)]' built
/// from the eigendecomposition of the landmark Gram matrix. Components with
/// eigenvalue at or below 1e-10 * lambda_max are discarded.
struct NystroemMap {
  std::vector<PairSample> landmarks;
  Mat projection;   // retained x q, rows are D^{-1/2} U' for kept components
  Vec eigenvalues;  // retained eigenvalues, descending
  int retained = 0;
  PairKernel kernel;

  Vec transform(const PairSample& v) const;

  /// Fast path exploiting the product structure: the series factor against
  /// every landmark is computed once, after which features are a function of
  /// theta alone.
  Vec transform_product(const Vec& series_column, const Vec& theta) const;

  /// Column of series-kernel values k(x, landmark_j.series); requires a
  /// factorized kernel.
  Vec series_column(const TimeSeries& x) const;
};

/// Fits the map on the first q landmarks of the list. jitter is relative to
/// the mean Gram diagonal and is added before the eigendecomposition.
NystroemMap nystroem_fit(const std::vector<PairSample>& landmarks, const PairKernel& kernel,
                         std::size_t q, double jitter);

/// Same decomposition for a precomputed Gram matrix (cache-backed training).
struct NystroemFactor {
  Mat projection;
  Vec eigenvalues;
  int retained = 0;
};

NystroemFactor nystroem_factor(const Mat& landmark_gram, double jitter);

}  // namespace sigre

#endif
