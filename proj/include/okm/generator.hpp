#pragma once

// Deterministic instance generators. Euclidean instances are uniform points
// in the unit square; random metric instances draw bipartite edge costs and
// close them under shortest paths, which makes the quadruple inequality
// hold by construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "okm/errors.hpp"
#include "okm/instance.hpp"
#include "okm/rng.hpp"

namespace okm {

inline std::vector<double> weights_rectangle(int n, int ell) {
  if (ell < 1 || ell > n) throw error("ell must satisfy 1 <= ell <= n");
  std::vector<double> w(n, 0.0);
  std::fill(w.begin(), w.begin() + ell, 1.0);
  return w;
}

inline std::vector<double> weights_geometric(int n, double ratio) {
  if (!(ratio > 0) || ratio > 1) throw error("ratio must lie in (0, 1]");
  std::vector<double> w(n);
  double v = 1.0;
  for (int j = 0; j < n; ++j, v *= ratio) w[j] = v;
  return w;
}

struct GeneratedInstance {
  Instance inst;
  std::vector<double> points;  // x y per facility then per client; empty for metrics
};

inline GeneratedInstance gen_euclidean(int m, int n, int k, std::vector<double> weights,
                                       std::uint64_t seed) {
  SplitMix64 rng(mix_seed(seed, 0xe5c11d));
  std::vector<double> pts(2 * std::size_t(m + n));
  for (double& v : pts) v = rng.next_double();
  std::vector<double> costs(std::size_t(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      costs[std::size_t(i) * n + j] =
          std::hypot(pts[2 * i] - pts[2 * (m + j)], pts[2 * i + 1] - pts[2 * (m + j) + 1]);
  GeneratedInstance out;
  out.inst = make_instance(m, n, k, std::move(costs), std::move(weights));
  out.points = std::move(pts);
  return out;
}

inline GeneratedInstance gen_random_metric(int m, int n, int k, std::vector<double> weights,
                                           std::uint64_t seed) {
  SplitMix64 rng(mix_seed(seed, 0x3e7a1c));
  const int v = m + n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(std::size_t(v) * v, inf);
  for (int a = 0; a < v; ++a) d[std::size_t(a) * v + a] = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double w = 0.5 + rng.next_double();
      d[std::size_t(i) * v + (m + j)] = d[std::size_t(m + j) * v + i] = w;
    }
  for (int mid = 0; mid < v; ++mid)
    for (int a = 0; a < v; ++a)
      for (int b = 0; b < v; ++b)
        d[std::size_t(a) * v + b] =
            std::min(d[std::size_t(a) * v + b],
                     d[std::size_t(a) * v + mid] + d[std::size_t(mid) * v + b]);
  std::vector<double> costs(std::size_t(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) costs[std::size_t(i) * n + j] = d[std::size_t(i) * v + (m + j)];
  GeneratedInstance out;
  out.inst = make_instance(m, n, k, std::move(costs), std::move(weights));
  return out;
}

// points form keeps euclidean files small and exactly reproducible
inline std::string serialize_generated(const GeneratedInstance& g) {
  if (g.points.empty()) return serialize_instance(g.inst);
  std::ostringstream out;
  out << "m " << g.inst.m << "\n";
  out << "n " << g.inst.n << "\n";
  out << "k " << g.inst.k << "\n";
  out << "weights";
  for (double w : g.inst.weights) out << " " << detail::format_real(w);
  out << "\npoints\n";
  for (int t = 0; t < g.inst.m + g.inst.n; ++t)
    out << detail::format_real(g.points[2 * t]) << " " << detail::format_real(g.points[2 * t + 1])
        << "\n";
  return out.str();
}

}  // namespace okm
