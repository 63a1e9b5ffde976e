#pragma once

// Ordered k-median instance model. An instance is a bipartite cost matrix
// between m facilities and n clients, an opening budget k, and a
// non-increasing weight vector. The objective applies the weights to the
// client connection costs sorted in non-increasing order, so the largest
// cost is scaled by the largest weight.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "okm/errors.hpp"

namespace okm {

struct Instance {
  int m = 0;  // facilities
  int n = 0;  // clients
  int k = 0;  // facilities to open
  std::vector<double> costs;    // m*n, facility-major: costs[i*n+j]
  std::vector<double> weights;  // length n, non-increasing, weights[0] == 1
  bool metric = false;          // quadruple inequality verified

  double cost(int i, int j) const { return costs[std::size_t(i) * n + j]; }

  double max_cost() const {
    double v = 0;
    for (double c : costs) v = std::max(v, c);
    return v;
  }

  bool operator==(const Instance& o) const {
    return m == o.m && n == o.n && k == o.k && costs == o.costs && weights == o.weights;
  }
};

// open facility indices, sorted ascending, pairwise distinct
struct SolutionSet {
  std::vector<int> open;

  bool operator==(const SolutionSet& o) const { return open == o.open; }
  bool operator<(const SolutionSet& o) const { return open < o.open; }
};

struct MetricViolation {
  int i, j, i2, j2;  // c(i,j) > c(i,j2) + c(i2,j2) + c(i2,j)
  double lhs, rhs;
};

// Checks the quadruple inequality c(i,j) <= c(i,j') + c(i',j') + c(i',j),
// the bipartite analogue of the triangle inequality. Tolerance absorbs
// float noise from distance computations and tie perturbation.
inline std::optional<MetricViolation> validate_metric(const std::vector<double>& costs, int m,
                                                      int n) {
  double maxc = 0;
  for (double c : costs) maxc = std::max(maxc, c);
  const double tol = 1e-8 * std::max(1.0, maxc);
  auto at = [&](int i, int j) { return costs[std::size_t(i) * n + j]; };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      for (int i2 = 0; i2 < m; ++i2)
        for (int j2 = 0; j2 < n; ++j2) {
          double rhs = at(i, j2) + at(i2, j2) + at(i2, j);
          if (at(i, j) > rhs + tol) return MetricViolation{i, j, i2, j2, at(i, j), rhs};
        }
  return std::nullopt;
}

inline std::optional<MetricViolation> validate_metric(const Instance& inst) {
  return validate_metric(inst.costs, inst.m, inst.n);
}

// Validates and normalizes raw fields into an Instance. Weights are scaled
// so the largest is 1; all-zero weight vectors are rejected.
inline Instance make_instance(int m, int n, int k, std::vector<double> costs,
                              std::vector<double> weights) {
  if (m < 1 || n < 1) throw invalid_instance("need at least one facility and one client");
  if (k < 1 || k > m) throw invalid_instance("k must satisfy 1 <= k <= m");
  if ((int)costs.size() != m * n) throw invalid_instance("cost matrix size mismatch");
  if ((int)weights.size() != n) throw invalid_instance("weight vector size mismatch");
  for (double c : costs)
    if (!(c >= 0) || !std::isfinite(c)) throw invalid_instance("costs must be finite and >= 0");
  for (int j = 0; j < n; ++j) {
    if (!(weights[j] >= 0) || !std::isfinite(weights[j]))
      throw invalid_instance("weights must be finite and >= 0");
    if (j > 0 && weights[j] > weights[j - 1] + 1e-15)
      throw invalid_instance("weights must be non-increasing");
  }
  if (weights[0] <= 0) throw invalid_instance("weights must not be all zero");
  if (weights[0] != 1.0) {
    double w1 = weights[0];
    for (double& w : weights) w /= w1;
    weights[0] = 1.0;
  }
  Instance inst;
  inst.m = m;
  inst.n = n;
  inst.k = k;
  inst.costs = std::move(costs);
  inst.weights = std::move(weights);
  inst.metric = !validate_metric(inst.costs, m, n).has_value();
  return inst;
}

inline void check_solution(const Instance& inst, const SolutionSet& w) {
  if ((int)w.open.size() != inst.k) throw error("solution must open exactly k facilities");
  for (std::size_t t = 0; t < w.open.size(); ++t) {
    if (w.open[t] < 0 || w.open[t] >= inst.m) throw std::out_of_range("facility index out of range");
    if (t > 0 && w.open[t] <= w.open[t - 1]) throw error("solution indices must be sorted distinct");
  }
}

// connection cost of each client to its nearest open facility
inline std::vector<double> connection_costs(const Instance& inst, const SolutionSet& w) {
  check_solution(inst, w);
  std::vector<double> out(inst.n);
  for (int j = 0; j < inst.n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i : w.open) best = std::min(best, inst.cost(i, j));
    out[j] = best;
  }
  return out;
}

// weighted objective: weights applied to connection costs sorted non-increasingly
inline double ordered_cost(const Instance& inst, const SolutionSet& w) {
  std::vector<double> d = connection_costs(inst, w);
  std::sort(d.begin(), d.end(), std::greater<double>());
  double total = 0;
  for (int j = 0; j < inst.n; ++j) total += inst.weights[j] * d[j];
  return total;
}

// sum of the ell largest connection costs (ell = 1 is k-center, ell = n is k-median)
inline double rect_cost(const Instance& inst, const SolutionSet& w, int ell) {
  if (ell < 1 || ell > inst.n) throw error("ell must satisfy 1 <= ell <= n");
  std::vector<double> d = connection_costs(inst, w);
  std::sort(d.begin(), d.end(), std::greater<double>());
  double total = 0;
  for (int j = 0; j < ell; ++j) total += d[j];
  return total;
}

// Induced client-client distance: shortest facility hop min_i c(i,j) + c(i,j').
// Under the quadruple inequality this equals the shortest-path distance in
// the bipartite cost graph, so it is a consistent metric on the clients.
inline std::vector<double> client_distances(const Instance& inst) {
  std::vector<double> d(std::size_t(inst.n) * inst.n, 0.0);
  for (int j = 0; j < inst.n; ++j)
    for (int j2 = j + 1; j2 < inst.n; ++j2) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < inst.m; ++i) best = std::min(best, inst.cost(i, j) + inst.cost(i, j2));
      d[std::size_t(j) * inst.n + j2] = d[std::size_t(j2) * inst.n + j] = best;
    }
  return d;
}

// Makes all cost entries pairwise distinct with deterministic cumulative
// nudges of relative size 1e-12 applied in sorted order. Tied groups of
// zeros are lifted to small positives scaled by the largest cost. Values
// that are already distinct stay untouched.
inline Instance perturb_distances(const Instance& inst) {
  const double delta = 1e-12;
  const double scale = inst.max_cost() > 0 ? inst.max_cost() : 1.0;
  const double eps_abs = 1e-12 * scale;

  std::vector<int> order(inst.costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (inst.costs[a] != inst.costs[b]) return inst.costs[a] < inst.costs[b];
    return a < b;
  });

  std::vector<double> costs = inst.costs;
  double prev = -1.0;
  for (std::size_t t = 0; t < order.size(); ++t) {
    double v = costs[order[t]];
    if (t == 0) {
      // a tied group of zeros has no room below, lift the whole group
      if (v == 0.0 && order.size() > 1 && costs[order[1]] == 0.0) v = eps_abs;
    } else if (v <= prev) {
      v = prev == 0.0 ? eps_abs : prev * (1.0 + delta);
    }
    costs[order[t]] = v;
    prev = v;
  }
  return make_instance(inst.m, inst.n, inst.k, std::move(costs), inst.weights);
}

inline double binomial_capped(int m, int k, double cap) {
  double c = 1;
  for (int t = 1; t <= k; ++t) {
    c = c * (m - k + t) / t;
    if (c > cap) return cap + 1;
  }
  return c;
}

// Exact optimum by enumerating all k-subsets in lexicographic order; ties
// keep the lexicographically smallest subset. Refuses instances where
// C(m,k) exceeds the budget.
inline std::pair<SolutionSet, double> brute_force_opt(const Instance& inst,
                                                      double budget = 1e6) {
  if (binomial_capped(inst.m, inst.k, budget) > budget)
    throw cap_exceeded("subset count exceeds oracle budget");
  std::vector<int> pick(inst.k);
  std::iota(pick.begin(), pick.end(), 0);
  SolutionSet best;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    SolutionSet w{pick};
    double c = ordered_cost(inst, w);
    if (c < best_cost) {
      best_cost = c;
      best = w;
    }
    int pos = inst.k - 1;
    while (pos >= 0 && pick[pos] == inst.m - inst.k + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int t = pos + 1; t < inst.k; ++t) pick[t] = pick[t - 1] + 1;
  }
  return {best, best_cost};
}

// ---------------------------------------------------------------------------
// instance files
//
// Line-oriented text, '#' starts a comment, tokens split on whitespace:
//   m <int>      n <int>      k <int>
//   weights <n reals>
//   costs <m*n reals>            row-major, one facility per row by convention
//   points <2*(m+n) reals>       x y per facility then per client; costs become
//                                euclidean distances; alternative to "costs"
// m, n and k must appear before weights/costs/points.

namespace detail {

struct Token {
  std::string text;
  int line;
};

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  std::string cur;
  bool comment = false;
  auto flush = [&]() {
    if (!cur.empty()) {
      out.push_back({cur, line});
      cur.clear();
    }
  };
  for (char ch : text) {
    if (ch == '\n') {
      flush();
      comment = false;
      ++line;
    } else if (comment) {
      continue;
    } else if (ch == '#') {
      flush();
      comment = true;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

inline double parse_real(const Token& t) {
  try {
    std::size_t used = 0;
    double v = std::stod(t.text, &used);
    if (used != t.text.size()) throw std::invalid_argument(t.text);
    return v;
  } catch (const std::exception&) {
    throw parse_error(t.line, "expected a number, got '" + t.text + "'");
  }
}

inline int parse_int(const Token& t) {
  try {
    std::size_t used = 0;
    int v = std::stoi(t.text, &used);
    if (used != t.text.size()) throw std::invalid_argument(t.text);
    return v;
  } catch (const std::exception&) {
    throw parse_error(t.line, "expected an integer, got '" + t.text + "'");
  }
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Instance parse_instance(const std::string& text) {
  using detail::Token;
  std::vector<Token> toks = detail::tokenize(text);
  std::size_t pos = 0;
  auto more = [&]() { return pos < toks.size(); };
  auto take = [&]() -> const Token& {
    if (!more()) throw parse_error(toks.empty() ? 1 : toks.back().line, "unexpected end of file");
    return toks[pos++];
  };

  int m = -1, n = -1, k = -1;
  std::vector<double> weights, costs, points;
  bool have_weights = false, have_costs = false, have_points = false;

  auto need_dims = [&](const Token& key) {
    if (m < 0 || n < 0 || k < 0)
      throw parse_error(key.line, "'" + key.text + "' requires m, n and k to be set first");
  };
  auto take_reals = [&](std::size_t count, std::vector<double>& out) {
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) out.push_back(detail::parse_real(take()));
  };

  while (more()) {
    const Token& key = take();
    if (key.text == "m") {
      m = detail::parse_int(take());
    } else if (key.text == "n") {
      n = detail::parse_int(take());
    } else if (key.text == "k") {
      k = detail::parse_int(take());
    } else if (key.text == "weights") {
      need_dims(key);
      if (have_weights) throw parse_error(key.line, "duplicate weights");
      take_reals(n, weights);
      have_weights = true;
    } else if (key.text == "costs") {
      need_dims(key);
      if (have_costs || have_points) throw parse_error(key.line, "duplicate cost specification");
      take_reals(std::size_t(m) * n, costs);
      have_costs = true;
    } else if (key.text == "points") {
      need_dims(key);
      if (have_costs || have_points) throw parse_error(key.line, "duplicate cost specification");
      take_reals(2 * std::size_t(m + n), points);
      have_points = true;
    } else {
      throw parse_error(key.line, "unknown key '" + key.text + "'");
    }
  }

  if (m < 0 || n < 0 || k < 0) throw parse_error(1, "missing m, n or k");
  if (!have_weights) throw parse_error(1, "missing weights");
  if (!have_costs && !have_points) throw parse_error(1, "missing costs or points");

  if (have_points) {
    costs.resize(std::size_t(m) * n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double dx = points[2 * i] - points[2 * (m + j)];
        double dy = points[2 * i + 1] - points[2 * (m + j) + 1];
        costs[std::size_t(i) * n + j] = std::hypot(dx, dy);
      }
  }
  return make_instance(m, n, k, std::move(costs), std::move(weights));
}

inline std::string serialize_instance(const Instance& inst) {
  std::ostringstream out;
  out << "m " << inst.m << "\n";
  out << "n " << inst.n << "\n";
  out << "k " << inst.k << "\n";
  out << "weights";
  for (double w : inst.weights) out << " " << detail::format_real(w);
  out << "\ncosts\n";
  for (int i = 0; i < inst.m; ++i) {
    for (int j = 0; j < inst.n; ++j) out << (j ? " " : "") << detail::format_real(inst.cost(i, j));
    out << "\n";
  }
  return out.str();
}

}  // namespace okm
