#ifndef SIGRE_KERNELS_HPP
#define SIGRE_KERNELS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigre/series.hpp"

namespace sigre {

// --- static (pointwise) kernels ---

struct RbfConfig {
  double scale = 1.0;  // squared-distance divisor
};

/// exp(-|a-b|^2 / scale)
double rbf_eval(const Vec& a, const Vec& b, const RbfConfig& cfg);

struct AnisoRbfConfig {
  Vec lengthscales;
};

/// exp(-sum_j (a_j-b_j)^2 / ls_j^2)
double aniso_rbf_eval(const Vec& a, const Vec& b, const AnisoRbfConfig& cfg);

/// Pointwise kernel that lifts observations before the signature map. The
/// linear variant exists for oracle comparisons against truncated signatures.
struct StaticKernel {
  enum class Kind { Rbf, Linear };
  Kind kind = Kind::Rbf;
  double scale = 1.0;  // used by Rbf only

  static StaticKernel rbf(double scale) { return {Kind::Rbf, scale}; }
  static StaticKernel linear() { return {Kind::Linear, 1.0}; }

  double eval(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const;
};

struct SignatureKernelConfig {
  StaticKernel static_kernel = StaticKernel::rbf(1.0);
  int dyadic_order = 2;  // each original grid cell is split 2^order per axis
  bool normalize = false;
  bool time_augment = true;

  void validate() const;
};

struct K2KernelConfig {
  double epsilon = 1.0;
  // unset means "resolve by median heuristic from the observation"
  std::optional<double> chi_bandwidth;

  K2KernelConfig resolved(const TimeSeries& observation) const;
};

// --- truncated signatures (oracle path) ---

/// Signature levels 0..depth of a piecewise-linear path in R^d; level m is the
/// order-m tensor flattened row-major (d^m entries), level 0 is the scalar 1.
struct SignatureTensors {
  int depth = 0;
  std::vector<std::vector<double>> levels;
};

SignatureTensors truncated_signature(const TimeSeries& s, int depth);

/// sum_m <S_m(s1), S_m(s2)>; brute-force oracle for the PDE solver under the
/// linear static kernel.
double truncated_sig_inner(const TimeSeries& s1, const TimeSeries& s2, int depth);

// --- untruncated signature kernel via the Goursat PDE ---

double signature_kernel_eval(const TimeSeries& s1, const TimeSeries& s2,
                             const SignatureKernelConfig& cfg);

// --- K2 kernel (MMD over the series' points, time discarded) ---

/// Three-term unbiased MMD^2 estimator with Gaussian RBF chi of the given
/// bandwidth. Legitimately negative for close distributions.
double mmd_sq_unbiased(const TimeSeries& s1, const TimeSeries& s2, double chi_bandwidth);

/// exp(-MMD^2/epsilon); exceeds 1 when the unbiased estimate is negative.
double k2_kernel_eval(const TimeSeries& s1, const TimeSeries& s2, const K2KernelConfig& cfg);

// --- product kernel on (series, parameter) pairs ---

struct PairSample {
  TimeSeries series;
  Vec theta;
};

using SeriesKernelFn = std::function<double(const TimeSeries&, const TimeSeries&)>;
using ParamKernelFn = std::function<double(const Vec&, const Vec&)>;

/// k(x, x~) * l(theta, theta~). The factor functions are kept so callers can
/// exploit the product structure (e.g. fixing x and sweeping theta).
struct PairKernel {
  std::function<double(const PairSample&, const PairSample&)> eval;
  SeriesKernelFn series_part;  // may be null for opaque kernels
  ParamKernelFn param_part;
};

PairKernel make_product_kernel(SeriesKernelFn series_kernel, ParamKernelFn param_kernel);

double product_kernel_eval(const PairSample& p1, const PairSample& p2, const PairKernel& kernel);

// --- Gram assembly ---

struct GramMatrix {
  Mat entries;
  std::string kind;
};

/// Symmetric Gram over the points; any non-finite entry aborts with the
/// offending index pair in the message.
GramMatrix gram_matrix(const std::vector<PairSample>& points, const PairKernel& kernel,
                       const std::string& kind = "product");

/// Same contract for a plain series kernel, used for cached factor matrices.
Mat series_gram(const std::vector<TimeSeries>& series, const SeriesKernelFn& kernel);

}  // namespace sigre

#endif
