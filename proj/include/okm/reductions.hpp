#pragma once

// Reduced cost functions. Each reduction rewrites the connection costs so
// that minimizing the plain sum under the rewritten costs approximates the
// ordered objective. All reductions produced here are dominated
// (cr <= c entrywise) and order-preserving (larger original cost never
// gets a smaller reduced cost), which is what the rounding analysis needs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "okm/errors.hpp"
#include "okm/instance.hpp"

namespace okm {

struct ReducedCostMatrix {
  int m = 0, n = 0;
  std::vector<double> values;  // m*n, facility-major

  double at(int i, int j) const { return values[std::size_t(i) * n + j]; }
  double& at(int i, int j) { return values[std::size_t(i) * n + j]; }
};

using PairList = std::vector<std::pair<int, int>>;  // (facility, client)

inline bool is_forbidden(const PairList& forbidden, int i, int j) {
  return std::binary_search(forbidden.begin(), forbidden.end(), std::make_pair(i, j));
}

// cr <= c entrywise, up to float noise
inline bool is_dominated(const ReducedCostMatrix& cr, const Instance& inst) {
  const double tol = 1e-12 * std::max(1.0, inst.max_cost());
  for (std::size_t t = 0; t < cr.values.size(); ++t)
    if (cr.values[t] > inst.costs[t] + tol) return false;
  return true;
}

// c(i,j) <= c(i',j') implies cr(i,j) <= cr(i',j'); forbidden pairs carry no
// flow and are excluded from the scan
inline bool is_order_preserving(const ReducedCostMatrix& cr, const Instance& inst,
                                const PairList& forbidden = {}) {
  const double tol = 1e-12 * std::max(1.0, inst.max_cost());
  std::vector<std::pair<double, double>> pairs;  // (c, cr)
  pairs.reserve(cr.values.size());
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j)
      if (!is_forbidden(forbidden, i, j)) pairs.push_back({inst.cost(i, j), cr.at(i, j)});
  std::sort(pairs.begin(), pairs.end());
  // sweep groups of equal original cost; within a group reduced costs must
  // agree, across groups the running max must not exceed later entries
  double run_max = -std::numeric_limits<double>::infinity();
  std::size_t t = 0;
  while (t < pairs.size()) {
    std::size_t e = t;
    double lo = pairs[t].second, hi = pairs[t].second;
    while (e < pairs.size() && pairs[e].first == pairs[t].first) {
      lo = std::min(lo, pairs[e].second);
      hi = std::max(hi, pairs[e].second);
      ++e;
    }
    if (hi - lo > tol) return false;
    if (run_max > lo + tol) return false;
    run_max = std::max(run_max, hi);
    t = e;
  }
  return true;
}

// ---------------------------------------------------------------------------
// single rectangle

// keep costs >= T, zero the rest
inline ReducedCostMatrix threshold_cost(const Instance& inst, double T) {
  ReducedCostMatrix cr{inst.m, inst.n, inst.costs};
  for (double& v : cr.values)
    if (v < T) v = 0.0;
  return cr;
}

// every distinct cost value plus 0; exactly one candidate equals the
// unknown optimal threshold
inline std::vector<double> threshold_candidates(const Instance& inst) {
  std::vector<double> v = inst.costs;
  v.push_back(0.0);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// multiple rectangles

struct WeightDecomposition {
  std::vector<double> values;  // distinct weights, strictly decreasing
  std::vector<int> ell;        // ell[r] = last 1-based position carrying values[r]
};

// groups equal weights (exact float equality; weights are input data or
// grid values computed once, so ties are bitwise)
inline WeightDecomposition distinct_weights(const std::vector<double>& weights) {
  WeightDecomposition d;
  for (int j = 0; j < (int)weights.size(); ++j) {
    if (d.values.empty() || weights[j] != d.values.back()) {
      d.values.push_back(weights[j]);
      d.ell.push_back(j + 1);
    } else {
      d.ell.back() = j + 1;
    }
  }
  return d;
}

// ordered_cost(W) == sum_r (wbar_r - wbar_{r+1}) * rect_cost(W, ell_r)
inline double decomposed_cost(const Instance& inst, const SolutionSet& w) {
  WeightDecomposition d = distinct_weights(inst.weights);
  double total = 0;
  for (std::size_t r = 0; r < d.values.size(); ++r) {
    double next = r + 1 < d.values.size() ? d.values[r + 1] : 0.0;
    if (d.values[r] - next == 0.0) continue;
    total += (d.values[r] - next) * rect_cost(inst, w, d.ell[r]);
  }
  return total;
}

// cr(i,j) = c(i,j) * wbar_r where thresholds[r] <= c(i,j) < thresholds[r-1]
// (thresholds strictly decreasing, bracket 0 reaches infinity); costs below
// the last threshold keep the smallest weight
inline ReducedCostMatrix multi_rect_cost(const Instance& inst,
                                         const std::vector<double>& thresholds,
                                         const std::vector<double>& wbar) {
  const int R = (int)thresholds.size();
  if (R == 0 || (int)wbar.size() != R)
    throw error("multi_rect_cost needs matching non-empty thresholds and weights");
  for (int r = 0; r < R; ++r) {
    if (r > 0 && !(thresholds[r] < thresholds[r - 1]))
      throw error("thresholds must be strictly decreasing");
    if (r > 0 && !(wbar[r] < wbar[r - 1])) throw error("weights must be strictly decreasing");
    if (!(wbar[r] >= 0) || wbar[r] > 1.0 + 1e-12) throw error("weights must lie in [0,1]");
  }
  ReducedCostMatrix cr{inst.m, inst.n, inst.costs};
  for (double& v : cr.values) {
    int r = R - 1;
    for (int t = 0; t < R; ++t)
      if (v >= thresholds[t]) {
        r = t;
        break;
      }
    v *= wbar[r];
  }
  return cr;
}

// Lazily enumerates strictly decreasing R-tuples over the threshold
// candidates, largest component first. The full count is checked against
// the cap up front.
class ThresholdTupleIter {
 public:
  ThresholdTupleIter(const Instance& inst, int R, double cap = 1e6)
      : candidates_(threshold_candidates(inst)), r_(R) {
    std::sort(candidates_.begin(), candidates_.end(), std::greater<double>());
    if (R < 1 || R > (int)candidates_.size())
      throw error("tuple length must be between 1 and the candidate count");
    if (binomial_capped((int)candidates_.size(), R, cap) > cap)
      throw cap_exceeded("threshold tuple count exceeds cap");
    idx_.resize(R);
    for (int t = 0; t < R; ++t) idx_[t] = t;
  }

  std::uint64_t count() const {
    return (std::uint64_t)binomial_capped((int)candidates_.size(), r_,
                                          std::numeric_limits<double>::infinity());
  }

  std::optional<std::vector<double>> next() {
    if (done_) return std::nullopt;
    std::vector<double> out(r_);
    for (int t = 0; t < r_; ++t) out[t] = candidates_[idx_[t]];
    // advance the index combination
    int v = (int)candidates_.size();
    int pos = r_ - 1;
    while (pos >= 0 && idx_[pos] == v - r_ + pos) --pos;
    if (pos < 0) {
      done_ = true;
    } else {
      ++idx_[pos];
      for (int t = pos + 1; t < r_; ++t) idx_[t] = idx_[t - 1] + 1;
    }
    return out;
  }

 private:
  std::vector<double> candidates_;  // descending
  int r_;
  std::vector<int> idx_;
  bool done_ = false;
};

// ---------------------------------------------------------------------------
// weight bucketing

namespace detail {

// largest power of base not exceeding v, robust against log() drift on
// values that sit exactly on the grid
inline int floor_log(double v, double base) {
  int e = (int)std::floor(std::log(v) / std::log(base));
  while (std::pow(base, e) > v * (1.0 + 1e-12)) --e;
  while (std::pow(base, e + 1) <= v * (1.0 + 1e-12)) ++e;
  return e;
}

}  // namespace detail

// Rounds each weight down to a power of 1+eps; entries at or below
// eps*w_1/n become 0 and the leading weight stays exact. Sandwich bound:
// cost under the bucketed weights is within a 1+eps factor of the original.
inline std::vector<double> bucket_weights(const std::vector<double>& weights, double eps, int n) {
  if (!(eps > 0)) throw error("eps must be positive");
  if (weights.empty()) throw error("empty weight vector");
  std::vector<double> out(weights.size());
  out[0] = weights[0];
  const double cutoff = eps * weights[0] / n;
  for (std::size_t j = 1; j < weights.size(); ++j) {
    if (weights[j] <= cutoff + 0.0) {
      out[j] = 0.0;
    } else {
      out[j] = std::pow(1.0 + eps, detail::floor_log(weights[j], 1.0 + eps));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// distance bucketing

// Geometric distance classes below a guessed maximum connection cost:
//   D_s = (c_max (1+eps)^-(s+1), c_max (1+eps)^-s]   for s < S
//   D_S = [0, c_max (1+eps)^-S]
// Boundaries are nudged up by tiny factors until no input distance sits
// exactly on one, which keeps class membership stable under the open/closed
// interval ends.
struct DistanceBuckets {
  double c_max = 0;
  double eps = 0;
  int S = 0;
  std::vector<double> boundary;  // nudged, boundary[s] = sup D_s, size S+1
  int nudges = 0;

  // class index for d <= c_max; the caller must not pass larger distances
  int class_of(double d) const {
    for (int s = 0; s < S; ++s)
      if (d > boundary[s + 1]) return s;
    return S;
  }
};

inline DistanceBuckets build_buckets(double c_max, double eps, int n,
                                     const std::vector<double>& distances) {
  if (!(c_max > 0)) throw error("c_max must be positive");
  if (!(eps > 0)) throw error("eps must be positive");
  DistanceBuckets b;
  b.c_max = c_max;
  b.eps = eps;
  b.S = std::max(0, (int)std::ceil(std::log(double(n) / eps) / std::log(1.0 + eps)));

  const double nudge = 1.0 + 1e-12;
  for (b.nudges = 1; b.nudges <= 3; ++b.nudges) {
    b.boundary.assign(b.S + 1, 0.0);
    double factor = std::pow(nudge, b.nudges);
    for (int s = 0; s <= b.S; ++s) b.boundary[s] = c_max * std::pow(1.0 + eps, -s) * factor;
    bool clean = true;
    for (double d : distances) {
      if (d > c_max) continue;
      for (double bd : b.boundary)
        if (d == bd) {
          clean = false;
          break;
        }
      if (!clean) break;
    }
    if (clean) return b;
  }
  throw error("could not nudge bucket boundaries clear of the input distances");
}

// ---------------------------------------------------------------------------
// weight guesses for the distance classes

struct WeightGuess {
  std::vector<double> values;  // length S+1, non-increasing, grid powers or 0
};

// Lazily enumerates all non-increasing (S+1)-vectors over the grid
// {(1+eps)^0, ..., (1+eps)^-t_max, 0} with t_max = ceil(log_{1+eps}(n/eps)).
// The grid is anchored at the normalized leading weight 1; one enumerated
// vector dominates the per-class average weights of the unknown optimum
// within a factor 1+eps.
class WeightGuessIter {
 public:
  WeightGuessIter(const DistanceBuckets& buckets, double cap = 1e6) {
    len_ = buckets.S + 1;
    for (int t = 0; t <= buckets.S; ++t) grid_.push_back(std::pow(1.0 + buckets.eps, -t));
    grid_.push_back(0.0);
    // non-increasing vectors over |grid| values = multisets
    double count = binomial_capped(len_ + (int)grid_.size() - 1, len_, cap);
    if (count > cap) throw cap_exceeded("weight guess count exceeds cap");
    count_ = (std::uint64_t)count;
    level_.assign(len_, 0);
  }

  std::uint64_t count() const { return count_; }

  std::optional<WeightGuess> next() {
    if (done_) return std::nullopt;
    WeightGuess g;
    g.values.resize(len_);
    for (int t = 0; t < len_; ++t) g.values[t] = grid_[level_[t]];
    // next non-decreasing level sequence in lexicographic order
    int pos = len_ - 1;
    while (pos >= 0 && level_[pos] == (int)grid_.size() - 1) --pos;
    if (pos < 0) {
      done_ = true;
    } else {
      int v = level_[pos] + 1;
      for (int t = pos; t < len_; ++t) level_[t] = v;
    }
    return g;
  }

  const std::vector<double>& grid() const { return grid_; }

 private:
  std::vector<double> grid_;  // descending, ends with 0
  int len_ = 0;
  std::vector<int> level_;
  std::uint64_t count_ = 0;
  bool done_ = false;
};

// cr(i,j) = guess[class(c_ij)] * c_ij for distances up to c_max; larger
// distances become forbidden pairs that the LP pins to zero flow
inline std::pair<ReducedCostMatrix, PairList> bucketed_cost(const Instance& inst,
                                                            const DistanceBuckets& buckets,
                                                            const WeightGuess& guess) {
  if ((int)guess.values.size() != buckets.S + 1) throw error("weight guess length mismatch");
  ReducedCostMatrix cr{inst.m, inst.n, std::vector<double>(inst.costs.size(), 0.0)};
  PairList forbidden;
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j) {
      double d = inst.cost(i, j);
      if (d > buckets.c_max) {
        forbidden.push_back({i, j});
      } else {
        cr.at(i, j) = guess.values[buckets.class_of(d)] * d;
      }
    }
  return {std::move(cr), std::move(forbidden)};
}

}  // namespace okm
