#include "sigre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sigre {

void SampleSet::validate() const {
  if (points.empty()) throw InvalidArgument("SampleSet: empty");
  const auto d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) throw DimensionMismatch("SampleSet: mixed dimensions");
    if (!p.allFinite()) throw NonFinite("SampleSet: non-finite point");
  }
}

Eigen::Index SampleSet::dim() const {
  return points.empty() ? 0 : points.front().size();
}

namespace {

long long gcd_ll(long long a, long long b) { return b == 0 ? a : gcd_ll(b, a % b); }

// Transportation problem on the dense bipartite graph with integer supplies
// (scaled so both marginals are uniform integers). Successive shortest
// augmenting paths with Johnson potentials; each augmentation exhausts at
// least one source or sink, so at most n + m rounds run.
double transport_cost(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const long long lcm = static_cast<long long>(n) / gcd_ll(n, m) * m;
  const long long supply_each = lcm / n;
  const long long demand_each = lcm / m;

  Mat cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) cost(i, j) = (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]).norm();
  }

  std::vector<long long> supply(static_cast<std::size_t>(n), supply_each);
  std::vector<long long> demand(static_cast<std::size_t>(m), demand_each);
  // sparse flows: per sink, list of (source, units)
  std::vector<std::vector<std::pair<int, long long>>> flow(static_cast<std::size_t>(m));

  const int V = n + m;  // nodes: sources 0..n-1, sinks n..n+m-1
  std::vector<double> pot(static_cast<std::size_t>(V), 0.0);
  std::vector<double> dist(static_cast<std::size_t>(V));
  std::vector<int> parent(static_cast<std::size_t>(V));
  std::vector<char> done(static_cast<std::size_t>(V));
  constexpr double inf = std::numeric_limits<double>::infinity();

  long long remaining = lcm;
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    for (int i = 0; i < n; ++i) {
      if (supply[static_cast<std::size_t>(i)] > 0) dist[static_cast<std::size_t>(i)] = 0.0;
    }
    int target = -1;
    for (;;) {
      int u = -1;
      double best = inf;
      for (int v = 0; v < V; ++v) {
        if (!done[static_cast<std::size_t>(v)] && dist[static_cast<std::size_t>(v)] < best) {
          best = dist[static_cast<std::size_t>(v)];
          u = v;
        }
      }
      if (u < 0) break;  // disconnected残 (should not happen)
      done[static_cast<std::size_t>(u)] = 1;
      if (u >= n && demand[static_cast<std::size_t>(u - n)] > 0) {
        target = u;
        break;  // nearest deficit sink reached
      }
      if (u < n) {
        const int i = u;
        const double base = dist[static_cast<std::size_t>(u)];
        for (int j = 0; j < m; ++j) {
          const int v = n + j;
          if (done[static_cast<std::size_t>(v)]) continue;
          double rc = cost(i, j) + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(v)];
          if (rc < 0.0) rc = 0.0;  // float guard; analytically >= 0
          if (base + rc < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = base + rc;
            parent[static_cast<std::size_t>(v)] = u;
          }
        }
      } else {
        const int j = u - n;
        const double base = dist[static_cast<std::size_t>(u)];
        for (const auto& [i, units] : flow[static_cast<std::size_t>(j)]) {
          (void)units;
          const int v = i;
          if (done[static_cast<std::size_t>(v)]) continue;
          double rc = -cost(i, j) + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(v)];
          if (rc < 0.0) rc = 0.0;
          if (base + rc < dist[static_cast<std::size_t>(v)]) {
            dist[static_cast<std::size_t>(v)] = base + rc;
            parent[static_cast<std::size_t>(v)] = u;
          }
        }
      }
    }
    if (target < 0) throw Error("wasserstein: augmenting path not found");
    const double dt = dist[static_cast<std::size_t>(target)];
    for (int v = 0; v < V; ++v) {
      pot[static_cast<std::size_t>(v)] += std::min(dist[static_cast<std::size_t>(v)], dt);
    }

    // bottleneck along the path
    long long push = demand[static_cast<std::size_t>(target - n)];
    for (int v = target; parent[static_cast<std::size_t>(v)] >= 0; v = parent[static_cast<std::size_t>(v)]) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (u < n && v >= n) continue;  // forward arc, unbounded
      if (u >= n && v < n) {          // backward arc: limited by existing flow
        auto& lst = flow[static_cast<std::size_t>(u - n)];
        for (const auto& [src, units] : lst) {
          if (src == v) {
            push = std::min(push, units);
            break;
          }
        }
      }
    }
    {
      int v = target;
      while (parent[static_cast<std::size_t>(v)] >= 0) v = parent[static_cast<std::size_t>(v)];
      push = std::min(push, supply[static_cast<std::size_t>(v)]);
    }

    // apply
    for (int v = target; parent[static_cast<std::size_t>(v)] >= 0; v = parent[static_cast<std::size_t>(v)]) {
      const int u = parent[static_cast<std::size_t>(v)];
      if (u < n && v >= n) {
        auto& lst = flow[static_cast<std::size_t>(v - n)];
        bool found = false;
        for (auto& [src, units] : lst) {
          if (src == u) {
            units += push;
            found = true;
            break;
          }
        }
        if (!found) lst.push_back({u, push});
      } else {
        auto& lst = flow[static_cast<std::size_t>(u - n)];
        for (std::size_t k = 0; k < lst.size(); ++k) {
          if (lst[k].first == v) {
            lst[k].second -= push;
            if (lst[k].second == 0) {
              lst.erase(lst.begin() + static_cast<std::ptrdiff_t>(k));
            }
            break;
          }
        }
      }
    }
    {
      int v = target;
      while (parent[static_cast<std::size_t>(v)] >= 0) v = parent[static_cast<std::size_t>(v)];
      supply[static_cast<std::size_t>(v)] -= push;
    }
    demand[static_cast<std::size_t>(target - n)] -= push;
    remaining -= push;
  }

  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    for (const auto& [i, units] : flow[static_cast<std::size_t>(j)]) {
      total += static_cast<double>(units) * cost(i, j);
    }
  }
  return total / static_cast<double>(lcm);
}

}  // namespace

double wasserstein(const SampleSet& a, const SampleSet& b) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) throw DimensionMismatch("wasserstein: dimension mismatch");
  return transport_cost(a.points, b.points);
}

double wasserstein_capped(const SampleSet& a, const SampleSet& b, std::size_t cap,
                          std::uint64_t seed) {
  if (cap == 0) throw InvalidArgument("wasserstein_capped: cap must be positive");
  Rng rng(seed);
  const auto subsample = [&rng, cap](const SampleSet& s) {
    if (s.points.size() <= cap) return s;
    std::vector<int> order(s.points.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    SampleSet out;
    out.tag = s.tag;
    out.points.reserve(cap);
    for (std::size_t k = 0; k < cap; ++k) {
      out.points.push_back(s.points[static_cast<std::size_t>(order[k])]);
    }
    return out;
  };
  const SampleSet sa = subsample(a);
  const SampleSet sb = subsample(b);
  return wasserstein(sa, sb);
}

double mean_distance(const SampleSet& a, const SampleSet& b) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) throw DimensionMismatch("mean_distance: dimension mismatch");
  Vec ma = Vec::Zero(a.dim());
  for (const auto& p : a.points) ma += p;
  ma /= static_cast<double>(a.points.size());
  Vec mb = Vec::Zero(b.dim());
  for (const auto& p : b.points) mb += p;
  mb /= static_cast<double>(b.points.size());
  return (ma - mb).norm();
}

namespace {

// type-7 quantile on a sorted vector
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = h - std::floor(h);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

BootstrapCi bootstrap_ci(const std::vector<double>& values, double level, int replicates,
                         Rng& rng) {
  if (values.size() < 2) throw TooFewValues("bootstrap_ci: need at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("bootstrap_ci: level in (0,1)");
  if (replicates < 1) throw InvalidArgument("bootstrap_ci: replicates must be >= 1");
  const auto n = values.size();
  std::vector<double> means(static_cast<std::size_t>(replicates));
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += values[rng.uniform_int(n)];
    m = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  BootstrapCi ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  const double alpha = (1.0 - level) / 2.0;
  ci.low = quantile_sorted(means, alpha);
  ci.high = quantile_sorted(means, 1.0 - alpha);
  return ci;
}

}  // namespace sigre
