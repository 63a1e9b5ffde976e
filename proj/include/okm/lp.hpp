#pragma once

// LP relaxation of ordered k-median under a reduced cost function:
//   minimize  sum_ij cr(i,j) x_ij
//   s.t.      x_ij <= y_i,       sum_i x_ij = 1  (each j),
//             sum_i y_i = k,     0 <= x, y <= 1,
//             x_ij = 0 on forbidden pairs.
// Also turns a fractional solution into canonical form: x is distance
// optimal, every positive x_ij equals the opening of its facility, and
// facilities are split into co-located copies to make that exact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "okm/errors.hpp"
#include "okm/instance.hpp"
#include "okm/reductions.hpp"
#include "okm/simplex.hpp"

namespace okm {

struct LpProblem {
  ReducedCostMatrix cost;
  PairList forbidden;  // sorted, pairs pinned to x_ij = 0
  int k = 0;

  int m() const { return cost.m; }
  int n() const { return cost.n; }
  int x_count() const { return cost.m * cost.n; }
  int y_count() const { return cost.m; }
  // assignment rows + coupling rows + the opening budget row; bounds and
  // forbidden-pair pins are not counted
  int constraint_count() const { return cost.m * cost.n + cost.n + 1; }
};

inline LpProblem build_lp(const Instance& inst, ReducedCostMatrix cr, PairList forbidden = {}) {
  if (cr.m != inst.m || cr.n != inst.n) throw error("reduced cost matrix shape mismatch");
  std::sort(forbidden.begin(), forbidden.end());
  forbidden.erase(std::unique(forbidden.begin(), forbidden.end()), forbidden.end());
  for (auto [i, j] : forbidden)
    if (i < 0 || i >= inst.m || j < 0 || j >= inst.n)
      throw std::out_of_range("forbidden pair out of range");
  return LpProblem{std::move(cr), std::move(forbidden), inst.k};
}

struct FractionalSolution {
  int m = 0, n = 0;
  std::vector<double> x;  // m*n, facility-major
  std::vector<double> y;  // m
  double objective = 0;
  bool canonical = false;

  double xv(int i, int j) const { return x[std::size_t(i) * n + j]; }
  double& xv(int i, int j) { return x[std::size_t(i) * n + j]; }
};

// mean connection cost of each client under the given cost matrix,
// c_av(j) = sum_i cost(i,j) x_ij
inline std::vector<double> avg_cost(const FractionalSolution& sol,
                                    const std::vector<double>& costs) {
  std::vector<double> out(sol.n, 0.0);
  for (int i = 0; i < sol.m; ++i)
    for (int j = 0; j < sol.n; ++j)
      if (sol.xv(i, j) > 0) out[j] += costs[std::size_t(i) * sol.n + j] * sol.xv(i, j);
  return out;
}

namespace detail {

inline void snap_solution(FractionalSolution& sol) {
  for (double& v : sol.y) {
    if (v < 1e-12) v = 0.0;
    if (v > 1.0 - 1e-12) v = 1.0;
  }
  for (int i = 0; i < sol.m; ++i)
    for (int j = 0; j < sol.n; ++j) {
      double& v = sol.xv(i, j);
      if (v < 1e-12) v = 0.0;
      if (v > sol.y[i]) v = sol.y[i];
    }
}

}  // namespace detail

// feasibility of the relaxation constraints, absolute tolerance 1e-9
inline std::vector<std::string> check_lp_feasible(const LpProblem& lp,
                                                  const FractionalSolution& sol) {
  std::vector<std::string> bad;
  const double tol = 1e-9;
  auto complain = [&](const std::string& s) { bad.push_back(s); };
  double ysum = 0;
  for (int i = 0; i < lp.m(); ++i) {
    if (sol.y[i] < -tol || sol.y[i] > 1 + tol) complain("y out of [0,1] at " + std::to_string(i));
    ysum += sol.y[i];
  }
  if (std::abs(ysum - lp.k) > tol * lp.m()) complain("sum y != k");
  for (int j = 0; j < lp.n(); ++j) {
    double xsum = 0;
    for (int i = 0; i < lp.m(); ++i) {
      double v = sol.xv(i, j);
      if (v < -tol) complain("negative x");
      if (v > sol.y[i] + tol) complain("x exceeds y");
      xsum += v;
    }
    if (std::abs(xsum - 1.0) > tol * lp.m()) complain("assignment of client " + std::to_string(j));
  }
  for (auto [i, j] : lp.forbidden)
    if (sol.xv(i, j) != 0.0) complain("flow on forbidden pair");
  return bad;
}

// Solves the relaxation. Returns nullopt when the constraints are
// infeasible (some client has no allowed facility mass). Deterministic for
// fixed input.
inline std::optional<FractionalSolution> solve_lp(const LpProblem& lp) {
  const int m = lp.m(), n = lp.n();
  const int xbase = 0, ybase = m * n;
  DenseSimplex sx(m * n + m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (!is_forbidden(lp.forbidden, i, j)) sx.objective_coeff(xbase + i * n + j, lp.cost.at(i, j));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      sx.add_le({{xbase + i * n + j, 1.0}, {ybase + i, -1.0}}, 0.0);
  for (auto [i, j] : lp.forbidden) sx.add_le({{xbase + i * n + j, 1.0}}, 0.0);
  for (int i = 0; i < m; ++i) sx.add_le({{ybase + i, 1.0}}, 1.0);
  for (int j = 0; j < n; ++j) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < m; ++i) row.push_back({xbase + i * n + j, 1.0});
    sx.add_eq(std::move(row), 1.0);
  }
  {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < m; ++i) row.push_back({ybase + i, 1.0});
    sx.add_eq(std::move(row), double(lp.k));
  }

  SimplexResult res = sx.solve();
  if (res.status == SimplexResult::Status::infeasible) return std::nullopt;
  if (res.status != SimplexResult::Status::optimal)
    throw internal_error("LP solve did not converge");

  FractionalSolution sol;
  sol.m = m;
  sol.n = n;
  sol.x.assign(res.x.begin(), res.x.begin() + m * n);
  sol.y.assign(res.x.begin() + m * n, res.x.end());
  sol.objective = res.objective;
  detail::snap_solution(sol);
  std::vector<std::string> bad = check_lp_feasible(lp, sol);
  if (!bad.empty()) throw internal_error("LP solution violates constraints: " + bad.front());
  return sol;
}

// the LP in a standard text interchange format, for debugging
inline void write_lp_format(const LpProblem& lp, std::ostream& out) {
  auto xs = [&](int i, int j) { return "x_" + std::to_string(i) + "_" + std::to_string(j); };
  auto ys = [&](int i) { return "y_" + std::to_string(i); };
  out << "Minimize\n obj:";
  bool first = true;
  for (int i = 0; i < lp.m(); ++i)
    for (int j = 0; j < lp.n(); ++j) {
      if (is_forbidden(lp.forbidden, i, j) || lp.cost.at(i, j) == 0.0) continue;
      out << (first ? " " : " + ") << detail::format_real(lp.cost.at(i, j)) << " " << xs(i, j);
      first = false;
    }
  if (first) out << " 0 " << xs(0, 0);
  out << "\nSubject To\n";
  for (int i = 0; i < lp.m(); ++i)
    for (int j = 0; j < lp.n(); ++j)
      out << " cap_" << i << "_" << j << ": " << xs(i, j) << " - " << ys(i) << " <= 0\n";
  for (int j = 0; j < lp.n(); ++j) {
    out << " assign_" << j << ":";
    for (int i = 0; i < lp.m(); ++i) out << (i ? " + " : " ") << xs(i, j);
    out << " = 1\n";
  }
  out << " budget:";
  for (int i = 0; i < lp.m(); ++i) out << (i ? " + " : " ") << ys(i);
  out << " = " << lp.k << "\n";
  for (auto [i, j] : lp.forbidden) out << " forbid_" << i << "_" << j << ": " << xs(i, j) << " = 0\n";
  out << "Bounds\n";
  for (int i = 0; i < lp.m(); ++i)
    for (int j = 0; j < lp.n(); ++j) out << " 0 <= " << xs(i, j) << " <= 1\n";
  for (int i = 0; i < lp.m(); ++i) out << " 0 <= " << ys(i) << " <= 1\n";
  out << "End\n";
}

// ---------------------------------------------------------------------------
// canonical form

// A canonical solution lives on an expanded instance whose facilities are
// co-located copies of the originals; every positive assignment equals the
// opening of its copy bitwise.
struct CanonicalSolution {
  FractionalSolution sol;
  Instance expanded;                 // copy costs, same clients/weights/k
  std::vector<int> copy_to_original; // copy index -> original facility
  std::vector<double> client_dist;   // n*n induced client metric
};

namespace detail {

// greedy reassignment: each client fills its nearest facilities up to y_i,
// skipping forbidden pairs; this minimizes sum_i c_ij x_ij for fixed y and
// never leaves flow on a forbidden pair
inline void reassign_greedy(FractionalSolution& sol, const Instance& inst,
                            const PairList& forbidden) {
  std::vector<int> order(inst.m);
  for (int j = 0; j < inst.n; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (inst.cost(a, j) != inst.cost(b, j)) return inst.cost(a, j) < inst.cost(b, j);
      return a < b;
    });
    for (int i = 0; i < inst.m; ++i) sol.xv(i, j) = 0.0;
    double remaining = 1.0;
    for (int i : order) {
      if (remaining <= 0) break;
      if (sol.y[i] <= 0 || is_forbidden(forbidden, i, j)) continue;
      if (sol.y[i] <= remaining) {
        sol.xv(i, j) = sol.y[i];
        remaining -= sol.y[i];
      } else {
        sol.xv(i, j) = remaining;
        remaining = 0;
      }
    }
    if (remaining > 1e-9) throw internal_error("client cannot absorb its demand; y mass missing");
  }
}

// Splits each facility at the distinct positive values of {x_ij} u {y_i}
// into prefix copies so that x_ij lands in {0, y_copy} exactly, dropping
// zero-opening facilities. A client assigned x_ij = v is fully assigned to
// every copy at or below the level v.
inline CanonicalSolution split_copies(const FractionalSolution& work, const Instance& inst,
                                      const LpProblem& lp) {
  CanonicalSolution out;
  std::vector<std::vector<double>> copy_x;  // per copy, length n
  std::vector<double> copy_y;
  std::vector<double> copy_costs;

  for (int i = 0; i < inst.m; ++i) {
    if (work.y[i] <= 0) continue;
    std::vector<double> cuts;  // distinct positive assignment levels, ascending
    for (int j = 0; j < inst.n; ++j)
      if (work.xv(i, j) > 0) cuts.push_back(work.xv(i, j));
    cuts.push_back(work.y[i]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double below = 0.0;
    for (double level : cuts) {
      copy_y.push_back(level - below);
      out.copy_to_original.push_back(i);
      copy_x.emplace_back(inst.n, 0.0);
      for (int j = 0; j < inst.n; ++j) copy_costs.push_back(inst.cost(i, j));
      // a client assigned x_ij = level uses this copy and all lower ones
      for (int j = 0; j < inst.n; ++j)
        if (work.xv(i, j) >= level) copy_x.back()[j] = copy_y.back();
      below = level;
    }
  }

  const int mc = (int)copy_y.size();
  out.sol.m = mc;
  out.sol.n = inst.n;
  out.sol.y = std::move(copy_y);
  out.sol.x.assign(std::size_t(mc) * inst.n, 0.0);
  for (int i = 0; i < mc; ++i)
    for (int j = 0; j < inst.n; ++j) out.sol.xv(i, j) = copy_x[i][j];
  out.sol.canonical = true;

  // objective under the original reduced costs is preserved by optimality
  // of the greedy reassignment
  out.sol.objective = 0;
  for (int i = 0; i < mc; ++i)
    for (int j = 0; j < inst.n; ++j)
      if (out.sol.xv(i, j) > 0)
        out.sol.objective += lp.cost.at(out.copy_to_original[i], j) * out.sol.xv(i, j);

  out.expanded = inst;
  out.expanded.m = mc;
  out.expanded.costs = std::move(copy_costs);
  out.expanded.metric = inst.metric;
  out.client_dist = client_distances(inst);
  return out;
}

}  // namespace detail

// Canonicalizes an LP solution: (a) reassign x greedily by distance with y
// fixed, (b) split facilities into prefix copies so x_ij lands in {0, y_copy}
// exactly, (c) drop zero-opening facilities. The objective under lp.cost is
// unchanged up to float noise.
inline CanonicalSolution normalize(const FractionalSolution& input, const Instance& inst,
                                   const LpProblem& lp) {
  FractionalSolution work = input;
  detail::snap_solution(work);
  detail::reassign_greedy(work, inst, lp.forbidden);
  return detail::split_copies(work, inst, lp);
}

// canonical-form predicates: openings positive, x in {0, y_i} bitwise,
// assignments and budget preserved
inline std::vector<std::string> check_canonical(const CanonicalSolution& cs) {
  std::vector<std::string> bad;
  const FractionalSolution& s = cs.sol;
  for (int i = 0; i < s.m; ++i) {
    if (!(s.y[i] > 0)) bad.push_back("non-positive opening");
    for (int j = 0; j < s.n; ++j) {
      double v = s.xv(i, j);
      if (v != 0.0 && v != s.y[i]) bad.push_back("x not in {0, y}");
    }
  }
  for (int j = 0; j < s.n; ++j) {
    double sum = 0;
    for (int i = 0; i < s.m; ++i) sum += s.xv(i, j);
    if (std::abs(sum - 1.0) > 1e-9) bad.push_back("client sum != 1");
  }
  double ysum = 0;
  for (double v : s.y) ysum += v;
  if (std::abs(ysum - cs.expanded.k) > 1e-9) bad.push_back("sum y != k");
  if ((int)cs.copy_to_original.size() != s.m) bad.push_back("copy map size");
  return bad;
}

}  // namespace okm
