#pragma once

// Guess-and-round drivers. Every variant enumerates a deterministic guess
// space (thresholds, threshold tuples, or distance-class weight vectors),
// solves the LP relaxation under the guess's reduced costs, canonicalizes,
// rounds with a per-guess random stream, and keeps the cheapest solution
// under the true objective. A prepared run caches the deterministic work
// (LP + canonical form + cluster structure) so repeated trials only redo
// the cheap randomized part.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "okm/errors.hpp"
#include "okm/instance.hpp"
#include "okm/lp.hpp"
#include "okm/reductions.hpp"
#include "okm/rng.hpp"
#include "okm/rounding.hpp"

namespace okm {

struct SolverConfig {
  std::uint64_t seed = 0;
  int seeds_per_guess = 16;
  double guess_cap = 1e6;     // enumeration budget across all guesses
  double oracle_budget = 1e6; // subset budget for brute force
  int verbosity = 0;
  std::ostream* trace = nullptr;  // rounding transfer log
};

struct Variant {
  enum class Kind { rect, multi, bucketed, poly };
  Kind kind = Kind::rect;
  int ell = 0;            // rect only
  bool dedicated = true;  // rect clustering mode
  double eps = 0.5;       // bucketed / poly only
};

struct GuessOutcome {
  std::string descriptor;
  double cost = 0;
};

struct RunReport {
  double best_cost = std::numeric_limits<double>::infinity();
  SolutionSet best_solution;
  std::string best_descriptor;
  std::vector<GuessOutcome> per_guess;     // solved distinct guesses
  std::vector<double> samples;             // per-seed costs of the winning guess
  std::uint64_t enumerated = 0, duplicates = 0, infeasible = 0;
  std::optional<double> oracle_cost;
};

struct EmpiricalStats {
  int trials = 0;
  double mean = 0, min = 0, max = 0;
  std::optional<double> oracle_cost;
  std::optional<double> mean_ratio;
  std::vector<double> samples;  // best cost per trial
  RunReport best_report;
};

// weights of the exact form 1^ell 0^(n-ell)
inline std::optional<int> infer_ell(const std::vector<double>& weights) {
  int ell = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] == 1.0 && ell == (int)j) {
      ell = (int)j + 1;
    } else if (weights[j] != 0.0) {
      return std::nullopt;
    }
  }
  return ell >= 1 ? std::optional<int>(ell) : std::nullopt;
}

// ---------------------------------------------------------------------------
// prepared runs

struct PreparedGuess {
  std::string descriptor;
  CanonicalSolution canonical;
  ClusterStructure structure;
};

struct PreparedRun {
  Instance original;  // evaluation instance (true metric and weights)
  int eval_ell = 0;   // > 0: rect objective; 0: full ordered objective
  std::vector<PreparedGuess> guesses;
  std::uint64_t enumerated = 0, duplicates = 0, infeasible = 0;
};

inline double evaluate_solution(const PreparedRun& run, const SolutionSet& w) {
  return run.eval_ell > 0 ? rect_cost(run.original, w, run.eval_ell)
                          : ordered_cost(run.original, w);
}

namespace detail {

inline std::string format_guess_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string tuple_descriptor(const std::vector<double>& t) {
  std::string s = "T=(";
  for (std::size_t r = 0; r < t.size(); ++r) s += (r ? "," : "") + format_guess_real(t[r]);
  return s + ")";
}

// LP solve + canonical form + cluster structure for one guess; nullopt when
// the LP is infeasible
inline std::optional<PreparedGuess> prepare_guess(const Instance& inst, ReducedCostMatrix cr,
                                                  PairList forbidden, RoundingMode mode,
                                                  std::string descriptor) {
  LpProblem lp = build_lp(inst, std::move(cr), std::move(forbidden));
  std::optional<FractionalSolution> sol = solve_lp(lp);
  if (!sol) return std::nullopt;
  PreparedGuess g;
  g.descriptor = std::move(descriptor);
  g.canonical = normalize(*sol, inst, lp);
  g.structure = build_cluster_structure(g.canonical, mode);
  return g;
}

}  // namespace detail

inline PreparedRun prepare_rectangular(const Instance& inst, int ell, bool dedicated,
                                       const SolverConfig& cfg) {
  if (!inst.metric) throw invalid_instance("instance is not metric");
  if (ell < 1 || ell > inst.n) throw error("ell must satisfy 1 <= ell <= n");
  PreparedRun run;
  run.original = inst;
  run.eval_ell = ell;
  std::vector<double> cands = threshold_candidates(inst);
  if ((double)cands.size() > cfg.guess_cap) throw cap_exceeded("threshold guesses exceed cap");
  for (double T : cands) {
    ++run.enumerated;
    RoundingMode mode = dedicated ? dedicated_mode(T) : oblivious_mode();
    auto g = detail::prepare_guess(inst, threshold_cost(inst, T), {}, mode,
                                   "T=" + detail::format_guess_real(T));
    if (g) run.guesses.push_back(std::move(*g));
    else ++run.infeasible;
  }
  return run;
}

// shared by the multi-rectangle and bucketed variants: guess a strictly
// decreasing threshold tuple per distinct weight level, always rounding
// obliviously; guess_inst carries the (possibly bucketed) weights while
// eval_inst keeps the true objective
inline PreparedRun prepare_multi_rect(const Instance& guess_inst, const Instance& eval_inst,
                                      const SolverConfig& cfg) {
  if (!guess_inst.metric) throw invalid_instance("instance is not metric");
  PreparedRun run;
  run.original = eval_inst;
  run.eval_ell = 0;
  // Pairwise distinct distances make strictly decreasing correct tuples
  // realizable; a single rectangle needs no strictness, and skipping the
  // perturbation keeps its guess set identical to the rectangular solver's.
  WeightDecomposition wd = distinct_weights(guess_inst.weights);
  Instance work = wd.values.size() > 1 ? perturb_distances(guess_inst) : guess_inst;
  ThresholdTupleIter iter(work, (int)wd.values.size(), cfg.guess_cap);
  while (auto tuple = iter.next()) {
    ++run.enumerated;
    auto g = detail::prepare_guess(work, multi_rect_cost(work, *tuple, wd.values), {},
                                   oblivious_mode(), detail::tuple_descriptor(*tuple));
    if (g) run.guesses.push_back(std::move(*g));
    else ++run.infeasible;
  }
  return run;
}

inline PreparedRun prepare_bucketed(const Instance& inst, double eps, const SolverConfig& cfg) {
  Instance istar = make_instance(inst.m, inst.n, inst.k, inst.costs,
                                 bucket_weights(inst.weights, eps, inst.n));
  return prepare_multi_rect(istar, inst, cfg);
}

inline PreparedRun prepare_poly(const Instance& inst, double eps, const SolverConfig& cfg) {
  if (!inst.metric) throw invalid_instance("instance is not metric");
  PreparedRun run;
  run.original = inst;
  run.eval_ell = 0;

  std::vector<double> cmax_cands = inst.costs;
  std::sort(cmax_cands.begin(), cmax_cands.end());
  cmax_cands.erase(std::unique(cmax_cands.begin(), cmax_cands.end()), cmax_cands.end());
  // the guessed maximum connection cost must be positive
  while (!cmax_cands.empty() && cmax_cands.front() <= 0.0) cmax_cands.erase(cmax_cands.begin());
  if (cmax_cands.empty()) throw invalid_instance("all distances are zero");

  {
    DistanceBuckets probe = build_buckets(cmax_cands.back(), eps, inst.n, inst.costs);
    WeightGuessIter probe_iter(probe, cfg.guess_cap);
    double total = (double)probe_iter.count() * (double)cmax_cands.size();
    if (total > cfg.guess_cap) throw cap_exceeded("weight guess enumeration exceeds cap");
  }

  // distinct reduced-cost matrices only; guesses that differ only on empty
  // distance classes solve the same LP
  std::unordered_map<std::string, bool> seen;  // key -> was feasible
  for (double c_max : cmax_cands) {
    DistanceBuckets buckets = build_buckets(c_max, eps, inst.n, inst.costs);
    WeightGuessIter iter(buckets, cfg.guess_cap);
    while (auto guess = iter.next()) {
      ++run.enumerated;
      auto [cr, forbidden] = bucketed_cost(inst, buckets, *guess);
      std::string key((const char*)cr.values.data(), cr.values.size() * sizeof(double));
      key.append((const char*)forbidden.data(), forbidden.size() * sizeof(forbidden[0]));
      auto it = seen.find(key);
      if (it != seen.end()) {
        ++run.duplicates;
        continue;
      }
      std::string desc = "cmax=" + detail::format_guess_real(c_max) + " w=(";
      for (std::size_t s = 0; s < guess->values.size(); ++s)
        desc += (s ? "," : "") + detail::format_guess_real(guess->values[s]);
      desc += ")";
      auto g = detail::prepare_guess(inst, std::move(cr), std::move(forbidden), oblivious_mode(),
                                     std::move(desc));
      seen.emplace(std::move(key), g.has_value());
      if (g) run.guesses.push_back(std::move(*g));
      else ++run.infeasible;
    }
  }
  return run;
}

inline PreparedRun prepare_variant(const Instance& inst, const Variant& variant,
                                   const SolverConfig& cfg) {
  switch (variant.kind) {
    case Variant::Kind::rect: {
      int ell = variant.ell;
      if (ell == 0) {
        auto inferred = infer_ell(inst.weights);
        if (!inferred) throw error("weights are not rectangular; pass ell explicitly");
        ell = *inferred;
      }
      return prepare_rectangular(inst, ell, variant.dedicated, cfg);
    }
    case Variant::Kind::multi:
      return prepare_multi_rect(inst, inst, cfg);
    case Variant::Kind::bucketed:
      return prepare_bucketed(inst, variant.eps, cfg);
    case Variant::Kind::poly:
      return prepare_poly(inst, variant.eps, cfg);
  }
  throw error("unknown variant");
}

// ---------------------------------------------------------------------------
// randomized trials over a prepared run

// Rounds every prepared guess seeds_per_guess times and keeps the cheapest
// realized solution. Equal costs go to the lexicographically smallest guess
// descriptor, which makes merging trial results order independent.
inline RunReport run_trial(const PreparedRun& run, std::uint64_t master_seed, int seeds_per_guess,
                           std::ostream* trace = nullptr) {
  if (seeds_per_guess < 1) throw error("seeds_per_guess must be at least 1");
  RunReport rep;
  rep.enumerated = run.enumerated;
  rep.duplicates = run.duplicates;
  rep.infeasible = run.infeasible;
  for (std::size_t gi = 0; gi < run.guesses.size(); ++gi) {
    const PreparedGuess& g = run.guesses[gi];
    double guess_best = std::numeric_limits<double>::infinity();
    SolutionSet guess_sol;
    std::vector<double> seed_costs;
    std::uint64_t lane = mix_seed(master_seed, gi);
    for (int s = 0; s < seeds_per_guess; ++s) {
      if (trace) *trace << "# guess " << g.descriptor << " seed " << s << "\n";
      SolutionSet copies = dependent_round(g.canonical.sol, g.structure, mix_seed(lane, s), trace);
      if ((int)copies.open.size() != run.original.k)
        throw internal_error("rounding opened a wrong number of facilities");
      SolutionSet w = map_to_original(g.canonical, copies, run.original.m, run.original.k);
      double cost = evaluate_solution(run, w);
      seed_costs.push_back(cost);
      if (cost < guess_best) {
        guess_best = cost;
        guess_sol = w;
      }
    }
    rep.per_guess.push_back({g.descriptor, guess_best});
    if (guess_best < rep.best_cost ||
        (guess_best == rep.best_cost && g.descriptor < rep.best_descriptor)) {
      rep.best_cost = guess_best;
      rep.best_solution = guess_sol;
      rep.best_descriptor = g.descriptor;
      rep.samples = std::move(seed_costs);
    }
  }
  if (rep.per_guess.empty()) throw error("no feasible guess; nothing to round");
  return rep;
}

// the realized best must be what the returned solution actually costs, and
// it can never beat the oracle
inline void validate_report(const PreparedRun& run, const RunReport& rep) {
  double recomputed = evaluate_solution(run, rep.best_solution);
  if (std::abs(recomputed - rep.best_cost) > 1e-9 * std::max(1.0, recomputed))
    throw internal_error("reported best cost does not match its solution");
  for (const GuessOutcome& g : rep.per_guess)
    if (g.cost < rep.best_cost - 1e-12) throw internal_error("per-guess cost below reported best");
  if (rep.oracle_cost && rep.best_cost < *rep.oracle_cost * (1.0 - 1e-9))
    throw internal_error("realized cost beats the exact optimum");
}

inline std::pair<SolutionSet, double> variant_oracle(const PreparedRun& run, double budget) {
  if (run.eval_ell > 0) {
    std::vector<double> w(run.original.n, 0.0);
    std::fill(w.begin(), w.begin() + run.eval_ell, 1.0);
    Instance rect = make_instance(run.original.m, run.original.n, run.original.k,
                                  run.original.costs, w);
    return brute_force_opt(rect, budget);
  }
  return brute_force_opt(run.original, budget);
}

// ---------------------------------------------------------------------------
// public solver entry points

inline RunReport solve_rectangular(const Instance& inst, int ell, bool dedicated,
                                   const SolverConfig& cfg = {}) {
  PreparedRun run = prepare_rectangular(inst, ell, dedicated, cfg);
  RunReport rep = run_trial(run, cfg.seed, cfg.seeds_per_guess, cfg.trace);
  validate_report(run, rep);
  return rep;
}

inline RunReport solve_multi_rect(const Instance& inst, const SolverConfig& cfg = {}) {
  PreparedRun run = prepare_multi_rect(inst, inst, cfg);
  RunReport rep = run_trial(run, cfg.seed, cfg.seeds_per_guess, cfg.trace);
  validate_report(run, rep);
  return rep;
}

inline RunReport solve_bucketed_quasipoly(const Instance& inst, double eps,
                                          const SolverConfig& cfg = {}) {
  PreparedRun run = prepare_bucketed(inst, eps, cfg);
  RunReport rep = run_trial(run, cfg.seed, cfg.seeds_per_guess, cfg.trace);
  validate_report(run, rep);
  return rep;
}

inline RunReport solve_poly(const Instance& inst, double eps, const SolverConfig& cfg = {}) {
  PreparedRun run = prepare_poly(inst, eps, cfg);
  RunReport rep = run_trial(run, cfg.seed, cfg.seeds_per_guess, cfg.trace);
  validate_report(run, rep);
  return rep;
}

inline RunReport solve_variant(const Instance& inst, const Variant& variant,
                               const SolverConfig& cfg = {}) {
  PreparedRun run = prepare_variant(inst, variant, cfg);
  RunReport rep = run_trial(run, cfg.seed, cfg.seeds_per_guess, cfg.trace);
  validate_report(run, rep);
  return rep;
}

// repeated independent trials against the exact optimum; the deterministic
// guess preparation is shared, only the rounding is redrawn
inline EmpiricalStats empirical_stats(const Instance& inst, const Variant& variant, int trials,
                                      const SolverConfig& cfg = {}) {
  if (trials < 1) throw error("trials must be at least 1");
  PreparedRun run = prepare_variant(inst, variant, cfg);
  auto [opt_sol, opt_cost] = variant_oracle(run, cfg.oracle_budget);
  (void)opt_sol;

  EmpiricalStats st;
  st.trials = trials;
  st.oracle_cost = opt_cost;
  st.min = std::numeric_limits<double>::infinity();
  st.max = -std::numeric_limits<double>::infinity();
  double sum = 0;
  for (int t = 0; t < trials; ++t) {
    RunReport rep = run_trial(run, mix_seed(cfg.seed, t), cfg.seeds_per_guess);
    rep.oracle_cost = opt_cost;
    validate_report(run, rep);
    st.samples.push_back(rep.best_cost);
    sum += rep.best_cost;
    if (rep.best_cost < st.min) {
      st.min = rep.best_cost;
      st.best_report = std::move(rep);
    }
    st.max = std::max(st.max, rep.best_cost);
  }
  st.mean = sum / trials;
  if (opt_cost > 0) st.mean_ratio = st.mean / opt_cost;
  return st;
}

}  // namespace okm
