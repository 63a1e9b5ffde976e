#pragma once

// Randomized rounding of a canonical fractional solution.
//
// Pipeline: pick well-separated cluster centers, give each center a bundle
// of nearby fractional facilities (volume >= 1/2), match bundles greedily
// by center distance, then run dependent rounding over the laminar family
// {facility} < bundle < matched pair < everything. Each facility opens
// with probability exactly y_i, each bundle with probability equal to its
// volume, a matched pair always receives at least one open facility, and
// exactly k facilities open overall.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "okm/errors.hpp"
#include "okm/instance.hpp"
#include "okm/lp.hpp"
#include "okm/rng.hpp"

namespace okm {

struct RoundingMode {
  bool dedicated = false;
  double T = 0.0;  // rectangle threshold, used by dedicated mode only
};

inline RoundingMode oblivious_mode() { return {false, 0.0}; }
inline RoundingMode dedicated_mode(double T) { return {true, T}; }

namespace detail {

// threshold average cost per client: sum_i x_ij c_ij [c_ij >= T]
inline std::vector<double> avg_cost_threshold(const FractionalSolution& sol, const Instance& inst,
                                              double T) {
  std::vector<double> out(sol.n, 0.0);
  for (int i = 0; i < sol.m; ++i)
    for (int j = 0; j < sol.n; ++j)
      if (sol.xv(i, j) > 0 && inst.cost(i, j) >= T) out[j] += inst.cost(i, j) * sol.xv(i, j);
  return out;
}

// Filtering loop shared by both clustering rules: repeatedly promote the
// remaining client with the smallest score to a center and delete every
// client j' within 4*score(j') + 4T of it. Scores and distances both refer
// to the deleted client, which is what makes centers mutually far apart
// while every deleted client keeps a cheaper center nearby.
inline std::vector<int> filter_centers(const std::vector<double>& score,
                                       const std::vector<double>& cdist, int n, double T) {
  std::vector<bool> alive(n, true);
  std::vector<int> centers;
  for (int left = n; left > 0;) {
    int j = -1;
    for (int t = 0; t < n; ++t)
      if (alive[t] && (j < 0 || score[t] < score[j])) j = t;
    centers.push_back(j);
    for (int t = 0; t < n; ++t) {
      if (!alive[t]) continue;
      if (t == j || cdist[std::size_t(j) * n + t] <= 4.0 * score[t] + 4.0 * T) {
        alive[t] = false;
        --left;
      }
    }
  }
  return centers;
}

}  // namespace detail

// centers chosen by plain average cost, deletion radius 4*c_av(j')
inline std::vector<int> oblivious_clustering(const FractionalSolution& sol, const Instance& inst,
                                             const std::vector<double>& client_dist) {
  return detail::filter_centers(avg_cost(sol, inst.costs), client_dist, sol.n, 0.0);
}

// centers chosen by threshold average cost, deletion radius 4*c_av^T(j') + 4T
inline std::vector<int> dedicated_clustering(const FractionalSolution& sol, const Instance& inst,
                                             const std::vector<double>& client_dist, double T) {
  return detail::filter_centers(detail::avg_cost_threshold(sol, inst, T), client_dist, sol.n, T);
}

struct ClusterStructure {
  std::vector<int> centers;                 // client ids in selection order
  std::vector<double> radius;               // half the distance to the nearest other center
  std::vector<std::vector<int>> bundles;    // facility ids per center, ascending
  std::vector<double> volume;               // opening mass per bundle
  std::vector<std::pair<int, int>> matching;  // positions into centers
  int unmatched = -1;                       // position into centers, or -1
};

// bundle of center j: fractional facilities strictly inside the ball of
// radius R_j = d(j, nearest other center)/2; a lone center takes its whole
// support
inline ClusterStructure build_bundles(const std::vector<int>& centers,
                                      const FractionalSolution& sol, const Instance& inst,
                                      const std::vector<double>& client_dist) {
  ClusterStructure cs;
  cs.centers = centers;
  const int n = sol.n;
  for (std::size_t t = 0; t < centers.size(); ++t) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < centers.size(); ++o)
      if (o != t) r = std::min(r, client_dist[std::size_t(centers[t]) * n + centers[o]] / 2.0);
    cs.radius.push_back(r);
    std::vector<int> bundle;
    double vol = 0;
    for (int i = 0; i < sol.m; ++i)
      if (sol.xv(i, centers[t]) > 0 && inst.cost(i, centers[t]) < r) {
        bundle.push_back(i);
        vol += sol.y[i];
      }
    cs.bundles.push_back(std::move(bundle));
    cs.volume.push_back(vol);
  }
  return cs;
}

// repeatedly match the closest unmatched pair of centers
inline void greedy_matching(ClusterStructure& cs, const std::vector<double>& client_dist, int n) {
  cs.matching.clear();
  cs.unmatched = -1;
  std::vector<int> free_pos(cs.centers.size());
  std::iota(free_pos.begin(), free_pos.end(), 0);
  while (free_pos.size() >= 2) {
    std::pair<int, int> best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < free_pos.size(); ++a)
      for (std::size_t b = a + 1; b < free_pos.size(); ++b) {
        double d = client_dist[std::size_t(cs.centers[free_pos[a]]) * n + cs.centers[free_pos[b]]];
        if (d < best_d) {
          best_d = d;
          best = {free_pos[a], free_pos[b]};
        }
      }
    cs.matching.push_back(best);
    free_pos.erase(std::remove(free_pos.begin(), free_pos.end(), best.first), free_pos.end());
    free_pos.erase(std::remove(free_pos.begin(), free_pos.end(), best.second), free_pos.end());
  }
  if (!free_pos.empty()) cs.unmatched = free_pos.front();
}

// ---------------------------------------------------------------------------
// structural checks

struct CheckReport {
  int checks = 0;
  std::vector<std::string> violations;
};

// separation and coverage of the chosen centers plus bundle volume bounds;
// violated only by a bug, never by bad input
inline CheckReport check_cluster_structure(const ClusterStructure& cs,
                                           const CanonicalSolution& canonical, RoundingMode mode) {
  CheckReport rep;
  const Instance& inst = canonical.expanded;
  const FractionalSolution& sol = canonical.sol;
  const int n = sol.n;
  const double slack = 1e-9 * std::max(1.0, inst.max_cost());
  std::vector<double> score = mode.dedicated
                                  ? detail::avg_cost_threshold(sol, inst, mode.T)
                                  : avg_cost(sol, inst.costs);
  const double T = mode.dedicated ? mode.T : 0.0;
  auto dist = [&](int a, int b) { return canonical.client_dist[std::size_t(a) * n + b]; };
  auto fail = [&](const std::string& s) { rep.violations.push_back(s); };

  // centers pairwise far apart
  for (std::size_t a = 0; a < cs.centers.size(); ++a)
    for (std::size_t b = a + 1; b < cs.centers.size(); ++b) {
      ++rep.checks;
      double bound = 4.0 * std::max(score[cs.centers[a]], score[cs.centers[b]]) + 4.0 * T;
      if (!(dist(cs.centers[a], cs.centers[b]) > bound - slack))
        fail("centers too close: " + std::to_string(cs.centers[a]) + "," +
             std::to_string(cs.centers[b]));
    }

  // every non-center has a cheaper center within its deletion radius
  std::vector<bool> is_center(n, false);
  for (int c : cs.centers) is_center[c] = true;
  for (int j = 0; j < n; ++j) {
    if (is_center[j]) continue;
    ++rep.checks;
    bool covered = false;
    for (int c : cs.centers)
      if (score[c] <= score[j] + slack && dist(j, c) <= 4.0 * score[j] + 4.0 * T + slack) {
        covered = true;
        break;
      }
    if (!covered) fail("client " + std::to_string(j) + " has no covering center");
  }

  // bundle volumes in [1/2, 1], bundles pairwise disjoint
  std::vector<int> owner(sol.m, -1);
  for (std::size_t t = 0; t < cs.bundles.size(); ++t) {
    ++rep.checks;
    if (!(cs.volume[t] >= 0.5 - 1e-9)) fail("bundle volume below 1/2");
    if (!(cs.volume[t] <= 1.0 + 1e-9)) fail("bundle volume above 1");
    for (int i : cs.bundles[t]) {
      if (owner[i] >= 0) fail("bundles overlap at facility " + std::to_string(i));
      owner[i] = (int)t;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// laminar family

struct LaminarNode {
  enum class Kind { leaf, bundle, pair, root };
  Kind kind;
  double value = 0;            // fractional mass in scope
  std::vector<int> children;   // node indices
  int facility = -1;           // leaves only
};

inline std::vector<LaminarNode> build_laminar_forest(const ClusterStructure& cs,
                                                     const std::vector<double>& y) {
  std::vector<LaminarNode> nodes;
  const int m = (int)y.size();
  for (int i = 0; i < m; ++i) nodes.push_back({LaminarNode::Kind::leaf, y[i], {}, i});
  std::vector<int> bundle_node(cs.bundles.size());
  std::vector<bool> in_bundle(m, false);
  for (std::size_t t = 0; t < cs.bundles.size(); ++t) {
    LaminarNode node{LaminarNode::Kind::bundle, cs.volume[t], {}, -1};
    for (int i : cs.bundles[t]) {
      node.children.push_back(i);
      in_bundle[i] = true;
    }
    bundle_node[t] = (int)nodes.size();
    nodes.push_back(std::move(node));
  }
  LaminarNode root{LaminarNode::Kind::root, 0, {}, -1};
  for (auto [a, b] : cs.matching) {
    LaminarNode node{LaminarNode::Kind::pair, cs.volume[a] + cs.volume[b],
                     {bundle_node[a], bundle_node[b]}, -1};
    root.children.push_back((int)nodes.size());
    nodes.push_back(std::move(node));
  }
  if (cs.unmatched >= 0) root.children.push_back(bundle_node[cs.unmatched]);
  for (int i = 0; i < m; ++i)
    if (!in_bundle[i]) root.children.push_back(i);
  for (double v : y) root.value += v;
  nodes.push_back(std::move(root));
  return nodes;
}

// every two scopes nested or disjoint, child values sum to the parent
inline CheckReport check_laminar(const std::vector<LaminarNode>& nodes, int k) {
  CheckReport rep;
  std::vector<std::vector<int>> scope(nodes.size());
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    if (nodes[t].kind == LaminarNode::Kind::leaf) {
      scope[t] = {nodes[t].facility};
      continue;
    }
    double child_mass = 0;
    for (int c : nodes[t].children) {
      scope[t].insert(scope[t].end(), scope[c].begin(), scope[c].end());
      child_mass += nodes[c].value;
    }
    std::sort(scope[t].begin(), scope[t].end());
    ++rep.checks;
    if (std::adjacent_find(scope[t].begin(), scope[t].end()) != scope[t].end())
      rep.violations.push_back("node children overlap");
    if (std::abs(child_mass - nodes[t].value) > 1e-9)
      rep.violations.push_back("node value != sum of children");
  }
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      ++rep.checks;
      std::vector<int> common;
      std::set_intersection(scope[a].begin(), scope[a].end(), scope[b].begin(), scope[b].end(),
                            std::back_inserter(common));
      bool nested = common.size() == scope[a].size() || common.size() == scope[b].size();
      if (!common.empty() && !nested) rep.violations.push_back("scopes cross");
    }
  if (!nodes.empty()) {
    ++rep.checks;
    if (std::abs(nodes.back().value - k) > 1e-9) rep.violations.push_back("root mass != k");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// dependent rounding

namespace detail {

inline bool fractional(double v) { return v > 0.0 && v < 1.0; }

// One pairwise transfer. delta1 = min(1-a, b) raises a, delta2 = min(a, 1-b)
// lowers a; the branch odds make both marginals exact and the saturated end
// is written as an exact 0 or 1.
inline void transfer(std::vector<double>& vals, int ai, int bi, SplitMix64& rng,
                     std::ostream* trace) {
  double a = vals[ai], b = vals[bi];
  double d1 = std::min(1.0 - a, b), d2 = std::min(a, 1.0 - b);
  bool up = rng.next_double() * (d1 + d2) < d2;
  if (up) {
    if (1.0 - a <= b) {
      vals[ai] = 1.0;
      vals[bi] = std::max(0.0, a + b - 1.0);
    } else {
      vals[bi] = 0.0;
      vals[ai] = std::min(1.0, a + b);
    }
  } else {
    if (a <= 1.0 - b) {
      vals[ai] = 0.0;
      vals[bi] = std::min(1.0, a + b);
    } else {
      vals[bi] = 1.0;
      vals[ai] = std::max(0.0, a + b - 1.0);
    }
  }
  if (trace)
    *trace << "xfer f" << ai << " f" << bi << " " << a << " " << b << " -> " << vals[ai] << " "
           << vals[bi] << "\n";
}

// rounds within one scope until at most one fractional value remains
inline void merge_scope(std::vector<double>& vals, const std::vector<int>& scope, SplitMix64& rng,
                        std::ostream* trace) {
  int held = -1;
  for (int idx : scope) {
    if (!fractional(vals[idx])) continue;
    if (held < 0) {
      held = idx;
      continue;
    }
    transfer(vals, held, idx, rng, trace);
    if (fractional(vals[held])) continue;
    held = fractional(vals[idx]) ? idx : -1;
  }
}

}  // namespace detail

// Rounds the openings to exactly k integral ones, bottom-up over the
// laminar family: bundles first, then matched pairs, then everything.
// Facility i ends open with probability y_i; a bundle keeps an open
// facility with probability equal to its volume; a matched pair always
// keeps one. Fixed seed, fixed outcome.
inline SolutionSet dependent_round(const FractionalSolution& sol, const ClusterStructure& cs,
                                   std::uint64_t seed, std::ostream* trace = nullptr) {
  SplitMix64 rng(mix_seed(seed, 0x6f6b6d));
  std::vector<double> vals = sol.y;
  for (double& v : vals) {
    if (v < 1e-12) v = 0.0;
    if (v > 1.0 - 1e-12) v = 1.0;
  }

  for (const std::vector<int>& bundle : cs.bundles) detail::merge_scope(vals, bundle, rng, trace);
  for (auto [a, b] : cs.matching) {
    std::vector<int> scope = cs.bundles[a];
    scope.insert(scope.end(), cs.bundles[b].begin(), cs.bundles[b].end());
    std::sort(scope.begin(), scope.end());
    detail::merge_scope(vals, scope, rng, trace);
  }
  std::vector<int> everything(vals.size());
  std::iota(everything.begin(), everything.end(), 0);
  detail::merge_scope(vals, everything, rng, trace);

  SolutionSet w;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (detail::fractional(vals[i])) {
      // total mass is k, everything else is integral, so the leftover can
      // only be float drift
      if (std::abs(vals[i] - std::round(vals[i])) > 1e-6)
        throw internal_error("leftover fractional mass after rounding");
      vals[i] = std::round(vals[i]);
    }
    if (vals[i] == 1.0) w.open.push_back((int)i);
  }
  return w;
}

// ---------------------------------------------------------------------------
// full pipeline

inline ClusterStructure build_cluster_structure(const CanonicalSolution& canonical,
                                                RoundingMode mode, CheckReport* report = nullptr) {
  const FractionalSolution& sol = canonical.sol;
  const Instance& inst = canonical.expanded;
  std::vector<int> centers =
      mode.dedicated ? dedicated_clustering(sol, inst, canonical.client_dist, mode.T)
                     : oblivious_clustering(sol, inst, canonical.client_dist);
  ClusterStructure cs = build_bundles(centers, sol, inst, canonical.client_dist);
  greedy_matching(cs, canonical.client_dist, sol.n);

  CheckReport rep = check_cluster_structure(cs, canonical, mode);
  CheckReport lam = check_laminar(build_laminar_forest(cs, sol.y), inst.k);
  rep.checks += lam.checks;
  rep.violations.insert(rep.violations.end(), lam.violations.begin(), lam.violations.end());
  if (report) *report = rep;
  if (!rep.violations.empty())
    throw internal_error("cluster structure check failed: " + rep.violations.front());
  return cs;
}

// copies back to original facilities; padded with the largest-opening
// unopened originals when co-located copies collapse
inline SolutionSet map_to_original(const CanonicalSolution& canonical, const SolutionSet& copies,
                                   int m_original, int k) {
  std::vector<bool> open(m_original, false);
  for (int c : copies.open) open[canonical.copy_to_original[c]] = true;
  std::vector<double> orig_y(m_original, 0.0);
  for (int c = 0; c < canonical.sol.m; ++c)
    orig_y[canonical.copy_to_original[c]] += canonical.sol.y[c];

  SolutionSet out;
  for (int i = 0; i < m_original; ++i)
    if (open[i]) out.open.push_back(i);
  if ((int)out.open.size() < k) {
    std::vector<int> rest;
    for (int i = 0; i < m_original; ++i)
      if (!open[i]) rest.push_back(i);
    std::sort(rest.begin(), rest.end(), [&](int a, int b) {
      if (orig_y[a] != orig_y[b]) return orig_y[a] > orig_y[b];
      return a < b;
    });
    for (int i : rest) {
      if ((int)out.open.size() == k) break;
      out.open.push_back(i);
    }
    std::sort(out.open.begin(), out.open.end());
  }
  return out;
}

// cluster, bundle, match, round, and map back; structural lemmas are
// checked on every invocation
inline SolutionSet round_pipeline(const CanonicalSolution& canonical, int m_original,
                                  RoundingMode mode, std::uint64_t seed,
                                  std::ostream* trace = nullptr) {
  ClusterStructure cs = build_cluster_structure(canonical, mode);
  SolutionSet copies = dependent_round(canonical.sol, cs, seed, trace);
  if ((int)copies.open.size() != canonical.expanded.k)
    throw internal_error("rounding opened a wrong number of facilities");
  return map_to_original(canonical, copies, m_original, canonical.expanded.k);
}

}  // namespace okm
