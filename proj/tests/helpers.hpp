#pragma once

// Shared fixtures and independent oracles for the test suite.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "okm/instance.hpp"

namespace tst {

// 3 facilities on a line at {0,4,10}, 4 clients at {0,5,10,11}, absolute
// difference costs, k=2; the hand-checkable fixture used throughout
inline okm::Instance line34(std::vector<double> w = {1, 1, 0, 0}) {
  std::vector<double> costs = {0, 5, 10, 11, 4, 1, 6, 7, 10, 5, 0, 1};
  return okm::make_instance(3, 4, 2, std::move(costs), std::move(w));
}

// independent of okm::ordered_cost on purpose: ascending sort dotted with
// the reversed weight vector
inline double naive_ordered(const okm::Instance& inst, const std::vector<int>& open) {
  std::vector<double> conn;
  for (int j = 0; j < inst.n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i : open) best = std::min(best, inst.cost(i, j));
    conn.push_back(best);
  }
  std::sort(conn.begin(), conn.end());
  double total = 0;
  for (int j = 0; j < inst.n; ++j) total += conn[j] * inst.weights[std::size_t(inst.n) - 1 - j];
  return total;
}

inline void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == m - k + pos) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int t = pos + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
}

}  // namespace tst
