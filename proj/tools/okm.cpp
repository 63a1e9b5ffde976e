// Command line front end: generate, validate, solve, oracle, bench.
// Exit codes: 0 success, 2 usage, 3 infeasible input or exhausted budget,
// 4 file I/O or parse failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "okm/generator.hpp"
#include "okm/report_io.hpp"
#include "okm/solvers.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw okm::io_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw okm::io_error("cannot write " + path);
  out << content;
}

okm::Instance load(const std::string& path) { return okm::parse_instance(read_file(path)); }

struct SolveArgs {
  std::string variant = "rect";
  int ell = 0;
  std::string mode = "dedicated";
  double eps = 0.5;
  std::uint64_t seed = 0;
  int trials = 1;
  int seeds_per_guess = 16;
  double cap = 1e6;
  double budget = 1e6;
  bool oracle = false;
  std::string report_path, dump_lp;
  int verbose = 0;
};

okm::Variant make_variant(const SolveArgs& a) {
  okm::Variant v;
  if (a.variant == "rect") v.kind = okm::Variant::Kind::rect;
  else if (a.variant == "multi") v.kind = okm::Variant::Kind::multi;
  else if (a.variant == "bucketed") v.kind = okm::Variant::Kind::bucketed;
  else if (a.variant == "poly") v.kind = okm::Variant::Kind::poly;
  else throw okm::error("unknown variant " + a.variant);
  v.ell = a.ell;
  v.dedicated = a.mode == "dedicated";
  v.eps = a.eps;
  return v;
}

// debugging aid: the LP of the first enumerated guess for this variant
void dump_first_lp(const okm::Instance& inst, const okm::Variant& v, const std::string& path) {
  using namespace okm;
  LpProblem lp = [&]() {
    switch (v.kind) {
      case Variant::Kind::rect:
        return build_lp(inst, threshold_cost(inst, threshold_candidates(inst).front()));
      case Variant::Kind::multi:
      case Variant::Kind::bucketed: {
        const Instance work = v.kind == Variant::Kind::bucketed
                                  ? make_instance(inst.m, inst.n, inst.k, inst.costs,
                                                  bucket_weights(inst.weights, v.eps, inst.n))
                                  : inst;
        WeightDecomposition wd = distinct_weights(work.weights);
        Instance pert = wd.values.size() > 1 ? perturb_distances(work) : work;
        ThresholdTupleIter iter(pert, (int)wd.values.size());
        return build_lp(pert, multi_rect_cost(pert, *iter.next(), wd.values));
      }
      case Variant::Kind::poly: {
        std::vector<double> ds = inst.costs;
        std::sort(ds.begin(), ds.end());
        double c_max = ds.back();
        DistanceBuckets b = build_buckets(c_max, v.eps, inst.n, inst.costs);
        WeightGuessIter iter(b);
        auto [cr, forbidden] = bucketed_cost(inst, b, *iter.next());
        return build_lp(inst, std::move(cr), std::move(forbidden));
      }
    }
    throw okm::error("unknown variant");
  }();
  std::ostringstream out;
  write_lp_format(lp, out);
  write_file(path, out.str());
}

int run_solve(const std::string& path, const SolveArgs& a) {
  okm::Instance inst = load(path);
  if (!inst.metric) throw okm::invalid_instance("instance is not metric, refusing to solve");
  okm::Variant v = make_variant(a);
  okm::SolverConfig cfg;
  cfg.seed = a.seed;
  cfg.seeds_per_guess = a.seeds_per_guess;
  cfg.guess_cap = a.cap;
  cfg.oracle_budget = a.budget;
  cfg.verbosity = a.verbose;
  if (a.verbose >= 2) cfg.trace = &std::cerr;
  if (!a.dump_lp.empty()) dump_first_lp(inst, v, a.dump_lp);

  if (a.trials > 1) {
    okm::EmpiricalStats st = okm::empirical_stats(inst, v, a.trials, cfg);
    okm::write_stats_text(st, std::cout);
    if (!a.report_path.empty()) write_file(a.report_path, okm::stats_json(st).dump(2) + "\n");
    return 0;
  }
  okm::RunReport rep = okm::solve_variant(inst, v, cfg);
  if (a.oracle) {
    auto [ow, oc] = okm::brute_force_opt(
        v.kind == okm::Variant::Kind::rect && a.ell > 0
            ? okm::make_instance(inst.m, inst.n, inst.k, inst.costs,
                                 okm::weights_rectangle(inst.n, a.ell))
            : inst,
        a.budget);
    (void)ow;
    rep.oracle_cost = oc;
  }
  okm::write_report_text(rep, std::cout, a.verbose >= 1);
  if (!a.report_path.empty()) write_file(a.report_path, okm::report_json(rep).dump(2) + "\n");
  return 0;
}

int run_bench(const std::string& dir, const SolveArgs& a) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw okm::io_error(dir + " is not a directory");
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".okm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw okm::io_error("no .okm instances in " + dir);

  okm::Variant v = make_variant(a);
  okm::SolverConfig cfg;
  cfg.seed = a.seed;
  cfg.seeds_per_guess = a.seeds_per_guess;
  cfg.guess_cap = a.cap;
  cfg.oracle_budget = a.budget;

  std::printf("%-28s %12s %12s %12s %9s\n", "instance", "opt", "best", "mean", "ratio");
  nlohmann::json rows = nlohmann::json::array();
  double max_ratio = 0;
  bool any_failed = false;
  for (const fs::path& f : files) {
    std::string name = f.filename().string();
    try {
      okm::Instance inst = load(f.string());
      okm::EmpiricalStats st = okm::empirical_stats(inst, v, a.trials, cfg);
      double ratio = st.mean_ratio.value_or(0.0);
      max_ratio = std::max(max_ratio, ratio);
      std::printf("%-28s %12g %12g %12g %9.4f\n", name.c_str(), st.oracle_cost.value_or(0.0),
                  st.min, st.mean, ratio);
      nlohmann::json row = okm::stats_json(st);
      row["instance"] = name;
      rows.push_back(row);
    } catch (const std::exception& ex) {
      any_failed = true;
      std::printf("%-28s FAILED: %s\n", name.c_str(), ex.what());
      rows.push_back({{"instance", name}, {"error", ex.what()}});
    }
  }
  std::printf("max ratio %.4f over %zu instances\n", max_ratio, files.size());
  if (!a.report_path.empty()) {
    nlohmann::json out{{"rows", rows}, {"max_ratio", max_ratio}};
    write_file(a.report_path, out.dump(2) + "\n");
  }
  return any_failed ? 3 : 0;
}

void add_solve_flags(CLI::App* cmd, SolveArgs& a, bool bench) {
  cmd->add_option("--variant", a.variant, "rect | multi | bucketed | poly")
      ->check(CLI::IsMember({"rect", "multi", "bucketed", "poly"}));
  cmd->add_option("--ell", a.ell, "rectangle length for --variant rect (0 = infer from weights)");
  cmd->add_option("--mode", a.mode, "clustering for rect: dedicated | oblivious")
      ->check(CLI::IsMember({"dedicated", "oblivious"}));
  cmd->add_option("--eps", a.eps, "accuracy parameter for bucketed/poly");
  cmd->add_option("--seed", a.seed, "master random seed");
  cmd->add_option("--trials", a.trials, "independent trials (trials > 1 reports statistics)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seeds-per-guess", a.seeds_per_guess, "rounding repetitions per guess")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cap", a.cap, "guess enumeration budget");
  cmd->add_option("--budget", a.budget, "oracle subset budget");
  cmd->add_option("--report", a.report_path, "write a JSON report here");
  cmd->add_flag("-v,--verbose", a.verbose, "per-guess lines; twice for rounding traces");
  if (!bench) {
    cmd->add_flag("--oracle", a.oracle, "also run the exact oracle and report the ratio");
    cmd->add_option("--dump-lp", a.dump_lp, "write the first guess's LP in LP text format");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordered k-median: LP rounding with guessed reductions"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance file");
  std::string kind = "euclidean", wshape = "rectangle", wfile, out_path;
  int gm = 5, gn = 8, gk = 2, gell = 0;
  double gratio = 0.9;
  std::uint64_t gseed = 0;
  gen->add_option("--kind", kind, "euclidean | random-metric")
      ->check(CLI::IsMember({"euclidean", "random-metric"}));
  gen->add_option("-m", gm, "facilities")->required()->check(CLI::PositiveNumber);
  gen->add_option("-n", gn, "clients")->required()->check(CLI::PositiveNumber);
  gen->add_option("-k", gk, "openings")->required()->check(CLI::PositiveNumber);
  gen->add_option("--weights", wshape, "rectangle | geometric | custom")
      ->check(CLI::IsMember({"rectangle", "geometric", "custom"}));
  gen->add_option("--ell", gell, "rectangle length (default n)");
  gen->add_option("--ratio", gratio, "geometric decay ratio");
  gen->add_option("--weights-file", wfile, "file with n weights for --weights custom");
  gen->add_option("--seed", gseed, "random seed");
  gen->add_option("-o,--out", out_path, "output file")->required();

  // validate
  auto* val = app.add_subcommand("validate", "check an instance file");
  std::string val_path;
  val->add_option("file", val_path)->required();

  // solve
  auto* solve = app.add_subcommand("solve", "run a variant on an instance");
  std::string solve_path;
  SolveArgs sa;
  solve->add_option("file", solve_path)->required();
  add_solve_flags(solve, sa, false);

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact optimum by enumeration");
  std::string orc_path;
  double orc_budget = 1e6;
  orc->add_option("file", orc_path)->required();
  orc->add_option("--budget", orc_budget, "subset budget");

  // bench
  auto* bench = app.add_subcommand("bench", "ratio table over a corpus directory");
  std::string bench_dir;
  SolveArgs ba;
  ba.trials = 20;
  bench->add_option("dir", bench_dir)->required();
  add_solve_flags(bench, ba, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      if (gk > gm) throw okm::error("k must not exceed m");
      if (gell == 0) gell = gn;
      std::vector<double> w;
      if (wshape == "rectangle") w = okm::weights_rectangle(gn, gell);
      else if (wshape == "geometric") w = okm::weights_geometric(gn, gratio);
      else {
        std::istringstream in(read_file(wfile));
        double v;
        while (in >> v) w.push_back(v);
        if ((int)w.size() != gn) throw okm::error("weights file must hold exactly n values");
      }
      okm::GeneratedInstance g = kind == "euclidean"
                                     ? okm::gen_euclidean(gm, gn, gk, std::move(w), gseed)
                                     : okm::gen_random_metric(gm, gn, gk, std::move(w), gseed);
      write_file(out_path, okm::serialize_generated(g));
      std::cout << "wrote " << out_path << " (m=" << gm << " n=" << gn << " k=" << gk << ")\n";
      return 0;
    }
    if (*val) {
      okm::Instance inst = load(val_path);
      if (auto bad = okm::validate_metric(inst)) {
        std::cout << "not metric: c(" << bad->i << "," << bad->j << ") = " << bad->lhs
                  << " > " << bad->rhs << " via (" << bad->i2 << "," << bad->j2 << ")\n";
        return 3;
      }
      std::cout << "ok: metric instance, m=" << inst.m << " n=" << inst.n << " k=" << inst.k
                << "\n";
      return 0;
    }
    if (*solve) return run_solve(solve_path, sa);
    if (*orc) {
      okm::Instance inst = load(orc_path);
      auto [w, c] = okm::brute_force_opt(inst, orc_budget);
      std::cout << "opt " << c << " solution";
      for (int i : w.open) std::cout << " " << i;
      std::cout << "\n";
      return 0;
    }
    if (*bench) return run_bench(bench_dir, ba);
  } catch (const okm::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const okm::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const okm::cap_exceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const okm::invalid_instance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const okm::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const okm::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
