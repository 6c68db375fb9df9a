#include "sigre/kernels.hpp"

#include <cmath>

namespace sigre {

double rbf_eval(const Vec& a, const Vec& b, const RbfConfig& cfg) {
  if (a.size() != b.size()) throw DimensionMismatch("rbf_eval: dimension mismatch");
  if (!(cfg.scale > 0.0)) throw InvalidArgument("rbf_eval: scale must be positive");
  return std::exp(-(a - b).squaredNorm() / cfg.scale);
}

double aniso_rbf_eval(const Vec& a, const Vec& b, const AnisoRbfConfig& cfg) {
  if (a.size() != b.size() || a.size() != cfg.lengthscales.size()) {
    throw DimensionMismatch("aniso_rbf_eval: dimension mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double ls = cfg.lengthscales[j];
    if (!(ls > 0.0)) throw InvalidArgument("aniso_rbf_eval: lengthscales must be positive");
    const double g = (a[j] - b[j]) / ls;
    acc += g * g;
  }
  return std::exp(-acc);
}

double StaticKernel::eval(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
  switch (kind) {
    case Kind::Linear:
      return a.dot(b);
    case Kind::Rbf:
      if (!(scale > 0.0)) throw InvalidArgument("StaticKernel: rbf scale must be positive");
      return std::exp(-(a - b).squaredNorm() / scale);
  }
  return 0.0;
}

void SignatureKernelConfig::validate() const {
  if (dyadic_order < 0 || dyadic_order > 6) {
    throw InvalidArgument("SignatureKernelConfig: dyadic_order must be in [0, 6]");
  }
}

K2KernelConfig K2KernelConfig::resolved(const TimeSeries& observation) const {
  K2KernelConfig out = *this;
  if (!out.chi_bandwidth) out.chi_bandwidth = median_pairwise_sq_dist(observation);
  return out;
}

namespace {

// Signature of one linear segment with increment delta: level m = delta^{(x)m}/m!.
SignatureTensors segment_signature(const Eigen::RowVectorXd& delta, int depth) {
  const int d = static_cast<int>(delta.size());
  SignatureTensors sig;
  sig.depth = depth;
  sig.levels.resize(depth + 1);
  sig.levels[0] = {1.0};
  for (int m = 1; m <= depth; ++m) {
    const auto& prev = sig.levels[m - 1];
    auto& cur = sig.levels[m];
    cur.assign(prev.size() * d, 0.0);
    const double inv_m = 1.0 / m;
    std::size_t idx = 0;
    for (const double p : prev) {
      for (int j = 0; j < d; ++j) cur[idx++] = p * delta[j] * inv_m;
    }
  }
  return sig;
}

// Chen's relation: levels of the concatenation are sums of tensor products of
// complementary levels.
SignatureTensors chen_concat(const SignatureTensors& a, const SignatureTensors& b, int d) {
  SignatureTensors out;
  out.depth = a.depth;
  out.levels.resize(a.depth + 1);
  out.levels[0] = {1.0};
  for (int m = 1; m <= a.depth; ++m) {
    std::vector<double> level(a.levels[m].size(), 0.0);
    for (int i = 0; i <= m; ++i) {
      const auto& ai = a.levels[i];
      const auto& bj = b.levels[m - i];
      std::size_t idx = 0;
      for (const double av : ai) {
        for (const double bv : bj) level[idx++] += av * bv;
      }
    }
    out.levels[m] = std::move(level);
  }
  (void)d;
  return out;
}

}  // namespace

SignatureTensors truncated_signature(const TimeSeries& s, int depth) {
  if (depth < 0) throw InvalidArgument("truncated_signature: depth must be >= 0");
  const int d = static_cast<int>(s.channels());
  const auto n = s.length();
  SignatureTensors sig;
  sig.depth = depth;
  sig.levels.resize(depth + 1);
  sig.levels[0] = {1.0};
  std::size_t size = 1;
  for (int m = 1; m <= depth; ++m) {
    size *= static_cast<std::size_t>(d);
    sig.levels[m].assign(size, 0.0);
  }
  if (n < 2) return sig;  // constant path: (1, 0, 0, ...)
  sig = segment_signature(s.values.row(1) - s.values.row(0), depth);
  for (Eigen::Index i = 2; i < n; ++i) {
    sig = chen_concat(sig, segment_signature(s.values.row(i) - s.values.row(i - 1), depth), d);
  }
  return sig;
}

double truncated_sig_inner(const TimeSeries& s1, const TimeSeries& s2, int depth) {
  if (s1.channels() != s2.channels()) {
    throw DimensionMismatch("truncated_sig_inner: channel mismatch");
  }
  const SignatureTensors a = truncated_signature(s1, depth);
  const SignatureTensors b = truncated_signature(s2, depth);
  double acc = 0.0;
  for (int m = 0; m <= depth; ++m) {
    const auto& am = a.levels[m];
    const auto& bm = b.levels[m];
    double lvl = 0.0;
    for (std::size_t i = 0; i < am.size(); ++i) lvl += am[i] * bm[i];
    acc += lvl;
  }
  return acc;
}

namespace {

// Second-order finite-difference sweep of the Goursat problem
// d^2 K / ds dt = A(s, t) K over the dyadically refined grid, where A is the
// double increment of the static Gram surface spread evenly over subcells.
double goursat_sweep(const Mat& inc, int dyadic_order) {
  const Eigen::Index rows = inc.rows() << dyadic_order;
  const Eigen::Index cols = inc.cols() << dyadic_order;
  const double cell_scale = 1.0 / static_cast<double>(1LL << (2 * dyadic_order));

  std::vector<double> prev(cols + 1, 1.0), cur(cols + 1, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    cur[0] = 1.0;
    const Eigen::Index oi = i >> dyadic_order;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double a = inc(oi, j >> dyadic_order) * cell_scale;
      const double half = 0.5 * a;
      const double twelfth = a * a / 12.0;
      cur[j + 1] = (cur[j] + prev[j + 1]) * (1.0 + half + twelfth) - prev[j] * (1.0 - twelfth);
    }
    std::swap(prev, cur);
  }
  return prev[cols];
}

// The sweep error shrinks by ~4x per dyadic level; one Richardson step across
// adjacent levels removes the leading term at a quarter of the fine-grid cost.
double goursat_solve(const Mat& inc, int dyadic_order) {
  const double fine = goursat_sweep(inc, dyadic_order);
  if (dyadic_order == 0) return fine;
  const double coarse = goursat_sweep(inc, dyadic_order - 1);
  return fine + (fine - coarse) / 3.0;
}

double signature_kernel_raw(const TimeSeries& a, const TimeSeries& b,
                            const SignatureKernelConfig& cfg) {
  const auto n1 = a.length();
  const auto n2 = b.length();
  if (n1 < 2 || n2 < 2) throw InvalidArgument("signature_kernel_eval: series need >= 2 steps");
  Mat gram(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      gram(i, j) = cfg.static_kernel.eval(a.values.row(i), b.values.row(j));
    }
  }
  Mat inc = gram.bottomRightCorner(n1 - 1, n2 - 1) - gram.bottomLeftCorner(n1 - 1, n2 - 1) -
            gram.topRightCorner(n1 - 1, n2 - 1) + gram.topLeftCorner(n1 - 1, n2 - 1);
  const double value = goursat_solve(inc, cfg.dyadic_order);
  if (!std::isfinite(value)) {
    throw NonFinite("signature_kernel_eval: PDE solution overflowed");
  }
  return value;
}

}  // namespace

double signature_kernel_eval(const TimeSeries& s1, const TimeSeries& s2,
                             const SignatureKernelConfig& cfg) {
  cfg.validate();
  if (s1.channels() != s2.channels()) {
    throw DimensionMismatch("signature_kernel_eval: channel mismatch");
  }
  const TimeSeries a = cfg.time_augment ? time_augment(s1) : s1;
  const TimeSeries b = cfg.time_augment ? time_augment(s2) : s2;
  const double kxy = signature_kernel_raw(a, b, cfg);
  if (!cfg.normalize) return kxy;
  const double kxx = signature_kernel_raw(a, a, cfg);
  const double kyy = signature_kernel_raw(b, b, cfg);
  if (!(kxx > 0.0) || !(kyy > 0.0)) {
    throw NonFinite("signature_kernel_eval: degenerate normalization");
  }
  return kxy / std::sqrt(kxx * kyy);
}

double mmd_sq_unbiased(const TimeSeries& s1, const TimeSeries& s2, double chi_bandwidth) {
  if (!(chi_bandwidth > 0.0)) throw InvalidArgument("mmd_sq_unbiased: bandwidth must be positive");
  if (s1.channels() != s2.channels()) throw DimensionMismatch("mmd_sq_unbiased: channel mismatch");
  const auto nx = s1.length();
  const auto ny = s2.length();
  if (nx < 2 || ny < 2) {
    throw TooFewPoints("mmd_sq_unbiased: unbiased estimator needs >= 2 points per side");
  }
  const auto chi = [&](const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
    return std::exp(-(u - v).squaredNorm() / chi_bandwidth);
  };
  double within_x = 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < nx; ++j) {
      if (j != i) within_x += chi(s1.values.row(i), s1.values.row(j));
    }
  }
  double within_y = 0.0;
  for (Eigen::Index i = 0; i < ny; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      if (j != i) within_y += chi(s2.values.row(i), s2.values.row(j));
    }
  }
  double cross = 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      cross += chi(s1.values.row(i), s2.values.row(j));
    }
  }
  return within_x / (static_cast<double>(nx) * (nx - 1)) +
         within_y / (static_cast<double>(ny) * (ny - 1)) -
         2.0 * cross / (static_cast<double>(nx) * static_cast<double>(ny));
}

double k2_kernel_eval(const TimeSeries& s1, const TimeSeries& s2, const K2KernelConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("k2_kernel_eval: epsilon must be positive");
  if (!cfg.chi_bandwidth) {
    throw InvalidArgument("k2_kernel_eval: chi bandwidth not resolved; call resolved() first");
  }
  return std::exp(-mmd_sq_unbiased(s1, s2, *cfg.chi_bandwidth) / cfg.epsilon);
}

PairKernel make_product_kernel(SeriesKernelFn series_kernel, ParamKernelFn param_kernel) {
  PairKernel k;
  k.series_part = series_kernel;
  k.param_part = param_kernel;
  k.eval = [series_kernel, param_kernel](const PairSample& p, const PairSample& q) {
    return series_kernel(p.series, q.series) * param_kernel(p.theta, q.theta);
  };
  return k;
}

double product_kernel_eval(const PairSample& p1, const PairSample& p2, const PairKernel& kernel) {
  return kernel.eval(p1, p2);
}

GramMatrix gram_matrix(const std::vector<PairSample>& points, const PairKernel& kernel,
                       const std::string& kind) {
  if (points.empty()) throw InvalidArgument("gram_matrix: empty point list");
  const auto n = static_cast<Eigen::Index>(points.size());
  GramMatrix g;
  g.kind = kind;
  g.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel.eval(points[i], points[j]);
      if (!std::isfinite(v)) {
        throw NonFinite("gram_matrix: non-finite entry at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  return g;
}

Mat series_gram(const std::vector<TimeSeries>& series, const SeriesKernelFn& kernel) {
  if (series.empty()) throw InvalidArgument("series_gram: empty series list");
  const auto n = static_cast<Eigen::Index>(series.size());
  Mat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel(series[i], series[j]);
      if (!std::isfinite(v)) {
        throw NonFinite("series_gram: non-finite entry at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace sigre
