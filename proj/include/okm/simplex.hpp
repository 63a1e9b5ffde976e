#pragma once

// Dense two-phase primal simplex for the small LPs this library builds:
//   minimize c.x   subject to   A_le x <= b_le,  A_eq x = b_eq,  x >= 0
// with all right-hand sides non-negative (upper bounds arrive as explicit
// rows). Pricing is Dantzig's rule with index tie-breaks, switching to
// Bland's rule after a while so degenerate problems cannot cycle. The
// pivot sequence is a pure function of the input, which keeps every solve
// bit-reproducible.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace okm {

struct SimplexResult {
  enum class Status { optimal, infeasible, unbounded, iteration_limit };
  Status status = Status::iteration_limit;
  double objective = 0;
  std::vector<double> x;
};

class DenseSimplex {
 public:
  explicit DenseSimplex(int nvars) : nvars_(nvars), cost_(nvars, 0.0) {}

  void objective_coeff(int var, double c) { cost_[var] = c; }

  void add_le(std::vector<std::pair<int, double>> terms, double rhs) {
    rows_.push_back({std::move(terms), rhs, false});
  }

  void add_eq(std::vector<std::pair<int, double>> terms, double rhs) {
    rows_.push_back({std::move(terms), rhs, true});
  }

  SimplexResult solve() const {
    const int R = (int)rows_.size();
    int n_eq = 0;
    for (const Row& r : rows_) n_eq += r.eq;
    const int n_slack = R - n_eq;
    const int C = nvars_ + n_slack + n_eq;  // structural, slack, artificial

    // tableau rows with the rhs in the last slot
    std::vector<std::vector<double>> tab(R, std::vector<double>(C + 1, 0.0));
    std::vector<int> basis(R);
    std::vector<double> obj1(C + 1, 0.0), obj2(C + 1, 0.0);
    for (int v = 0; v < nvars_; ++v) obj2[v] = cost_[v];

    int slack_at = nvars_, artif_at = nvars_ + n_slack;
    for (int r = 0; r < R; ++r) {
      for (auto [v, a] : rows_[r].terms) tab[r][v] += a;
      tab[r][C] = rows_[r].rhs;
      if (rows_[r].eq) {
        tab[r][artif_at] = 1.0;
        basis[r] = artif_at++;
        // phase-1 reduced costs: subtract rows whose artificial is basic
        for (int c = 0; c <= C; ++c) obj1[c] -= tab[r][c];
        obj1[basis[r]] = 0.0;
      } else {
        tab[r][slack_at] = 1.0;
        basis[r] = slack_at++;
      }
    }

    const double eps = 1e-9;
    const int bland_after = 20 * (R + C) + 200;
    const int iter_cap = 400 * (R + C) + 20000;
    int iters = 0;

    auto pivot = [&](int pr, int pc) {
      double inv = 1.0 / tab[pr][pc];
      for (int c = 0; c <= C; ++c) tab[pr][c] *= inv;
      tab[pr][pc] = 1.0;
      for (int r = 0; r < R; ++r) {
        if (r == pr || tab[r][pc] == 0.0) continue;
        double f = tab[r][pc];
        for (int c = 0; c <= C; ++c) tab[r][c] -= f * tab[pr][c];
        tab[r][pc] = 0.0;
      }
      for (auto* obj : {&obj1, &obj2}) {
        double f = (*obj)[pc];
        if (f == 0.0) continue;
        for (int c = 0; c <= C; ++c) (*obj)[c] -= f * tab[pr][c];
        (*obj)[pc] = 0.0;
      }
      basis[pr] = pc;
    };

    // returns false when no entering column remains (optimal for this phase)
    auto iterate = [&](std::vector<double>& obj, int col_limit) -> SimplexResult::Status {
      while (true) {
        if (++iters > iter_cap) return SimplexResult::Status::iteration_limit;
        int pc = -1;
        if (iters <= bland_after) {
          double best = -eps;
          for (int c = 0; c < col_limit; ++c)
            if (obj[c] < best) {
              best = obj[c];
              pc = c;
            }
        } else {
          for (int c = 0; c < col_limit; ++c)
            if (obj[c] < -eps) {
              pc = c;
              break;
            }
        }
        if (pc < 0) return SimplexResult::Status::optimal;
        int pr = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < R; ++r) {
          if (tab[r][pc] <= eps) continue;
          double ratio = tab[r][C] / tab[r][pc];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (pr < 0 || basis[r] < basis[pr]))) {
            best_ratio = ratio;
            pr = r;
          }
        }
        if (pr < 0) return SimplexResult::Status::unbounded;
        pivot(pr, pc);
      }
    };

    SimplexResult res;

    // phase 1: minimize the artificial mass
    if (n_eq > 0) {
      auto st = iterate(obj1, C);
      if (st != SimplexResult::Status::optimal) {
        res.status = st;
        return res;
      }
      if (-obj1[C] > 1e-7) {
        res.status = SimplexResult::Status::infeasible;
        return res;
      }
      // drive leftover artificials out of the basis; rows that cannot
      // pivot are redundant and stay frozen at zero
      for (int r = 0; r < R; ++r) {
        if (basis[r] < nvars_ + n_slack) continue;
        for (int c = 0; c < nvars_ + n_slack; ++c)
          if (std::abs(tab[r][c]) > eps) {
            pivot(r, c);
            break;
          }
      }
    }

    // phase 2: artificial columns are excluded from pricing
    auto st = iterate(obj2, nvars_ + n_slack);
    if (st != SimplexResult::Status::optimal) {
      res.status = st;
      return res;
    }

    res.status = SimplexResult::Status::optimal;
    res.x.assign(nvars_, 0.0);
    for (int r = 0; r < R; ++r)
      if (basis[r] < nvars_) res.x[basis[r]] = tab[r][C];
    res.objective = -obj2[C];
    return res;
  }

 private:
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double rhs;
    bool eq;
  };

  int nvars_;
  std::vector<double> cost_;
  std::vector<Row> rows_;
};

}  // namespace okm
