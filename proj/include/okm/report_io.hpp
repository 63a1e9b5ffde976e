#pragma once

// RunReport serialization: line-oriented text for terminals and JSON for
// machines. JSON objects serialize with sorted keys, so equal reports give
// byte-equal files.

#include <json.hpp>
#include <ostream>
#include <string>

#include "okm/solvers.hpp"

namespace okm {

inline nlohmann::json report_json(const RunReport& rep) {
  nlohmann::json j;
  j["best_cost"] = rep.best_cost;
  j["best_solution"] = rep.best_solution.open;
  j["best_guess"] = rep.best_descriptor;
  j["counters"] = {{"enumerated", rep.enumerated},
                   {"solved", rep.per_guess.size()},
                   {"duplicates", rep.duplicates},
                   {"infeasible", rep.infeasible}};
  if (rep.oracle_cost) {
    j["oracle_cost"] = *rep.oracle_cost;
    if (*rep.oracle_cost > 0) j["ratio"] = rep.best_cost / *rep.oracle_cost;
  }
  nlohmann::json guesses = nlohmann::json::array();
  for (const GuessOutcome& g : rep.per_guess)
    guesses.push_back({{"guess", g.descriptor}, {"cost", g.cost}});
  j["guesses"] = guesses;
  j["samples"] = rep.samples;
  return j;
}

inline nlohmann::json stats_json(const EmpiricalStats& st) {
  nlohmann::json j;
  j["trials"] = st.trials;
  j["mean"] = st.mean;
  j["min"] = st.min;
  j["max"] = st.max;
  if (st.oracle_cost) j["oracle_cost"] = *st.oracle_cost;
  if (st.mean_ratio) j["mean_ratio"] = *st.mean_ratio;
  j["samples"] = st.samples;
  j["best"] = report_json(st.best_report);
  return j;
}

inline void write_report_text(const RunReport& rep, std::ostream& out, bool per_guess = true) {
  if (per_guess)
    for (const GuessOutcome& g : rep.per_guess)
      out << "guess " << g.descriptor << " cost " << g.cost << "\n";
  out << "guesses " << rep.enumerated << " solved " << rep.per_guess.size() << " duplicates "
      << rep.duplicates << " infeasible " << rep.infeasible << "\n";
  out << "best " << rep.best_cost << " guess " << rep.best_descriptor << " solution";
  for (int i : rep.best_solution.open) out << " " << i;
  out << "\n";
  if (rep.oracle_cost) {
    out << "oracle " << *rep.oracle_cost;
    if (*rep.oracle_cost > 0) out << " ratio " << rep.best_cost / *rep.oracle_cost;
    out << "\n";
  }
}

inline void write_stats_text(const EmpiricalStats& st, std::ostream& out) {
  out << "trials " << st.trials << " mean " << st.mean << " min " << st.min << " max " << st.max
      << "\n";
  if (st.oracle_cost) {
    out << "oracle " << *st.oracle_cost;
    if (st.mean_ratio) out << " mean_ratio " << *st.mean_ratio;
    out << "\n";
  }
  write_report_text(st.best_report, out, false);
}

}  // namespace okm
