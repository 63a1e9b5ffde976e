#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "okm/generator.hpp"
#include "okm/instance.hpp"
#include "okm/reductions.hpp"
#include "okm/rng.hpp"

using namespace okm;
using Catch::Approx;

TEST_CASE("ordered cost on the line fixture", "[core]") {
  Instance a = tst::line34({1, 1, 0, 0});
  REQUIRE(ordered_cost(a, {{1, 2}}) == Approx(5.0).margin(1e-12));
  Instance b = tst::line34({1, 0.5, 0.25, 0});
  REQUIRE(ordered_cost(b, {{1, 2}}) == Approx(4.75).margin(1e-12));
  REQUIRE(tst::naive_ordered(b, {1, 2}) == Approx(4.75).margin(1e-12));
  REQUIRE_THROWS(ordered_cost(a, {{1, 7}}));
  REQUIRE_THROWS(ordered_cost(a, {{1}}));
}

TEST_CASE("zero distances give zero cost", "[core]") {
  Instance z = make_instance(1, 2, 1, {0, 0}, {1, 0});
  REQUIRE(ordered_cost(z, {{0}}) == 0.0);
}

TEST_CASE("rect cost is the sum of the largest connection costs", "[core]") {
  Instance a = tst::line34();
  REQUIRE(rect_cost(a, {{1, 2}}, 1) == Approx(4.0));   // max distance
  REQUIRE(rect_cost(a, {{1, 2}}, 4) == Approx(6.0));   // plain sum
  REQUIRE_THROWS(rect_cost(a, {{1, 2}}, 0));
  REQUIRE_THROWS(rect_cost(a, {{1, 2}}, 5));

  Instance ones = tst::line34({1, 1, 1, 1});
  tst::for_each_subset(3, 2, [&](const std::vector<int>& idx) {
    SolutionSet w{idx};
    REQUIRE(rect_cost(a, w, 4) == Approx(ordered_cost(ones, w)).margin(1e-12));
  });
}

TEST_CASE("metric validation via the quadruple inequality", "[core]") {
  REQUIRE(tst::line34().metric);
  REQUIRE_FALSE(validate_metric({3.0}, 1, 1).has_value());
  auto bad = validate_metric({10, 1, 1, 1}, 2, 2);
  REQUIRE(bad.has_value());
  REQUIRE(bad->lhs == 10.0);
  REQUIRE(bad->rhs == 3.0);
  REQUIRE_FALSE(make_instance(2, 2, 1, {10, 1, 1, 1}, {1, 1}).metric);
}

TEST_CASE("perturbation makes all distances pairwise distinct", "[core]") {
  SECTION("already distinct costs are unchanged") {
    Instance a = make_instance(2, 2, 1, {1, 2, 3, 4}, {1, 1});
    REQUIRE(perturb_distances(a).costs == a.costs);
  }
  SECTION("a tied group becomes strictly increasing within 1e-9 relative") {
    Instance a = make_instance(3, 1, 1, {5, 5, 5}, {1});
    Instance p = perturb_distances(a);
    REQUIRE(p.costs[0] == 5.0);
    REQUIRE(p.costs[0] < p.costs[1]);
    REQUIRE(p.costs[1] < p.costs[2]);
    REQUIRE(p.costs[2] <= 5.0 * (1 + 1e-9));
  }
  SECTION("tied zeros are lifted to tiny positives") {
    Instance a = make_instance(2, 2, 1, {0, 0, 3, 7}, {1, 1});
    Instance p = perturb_distances(a);
    REQUIRE(p.costs[0] > 0.0);
    REQUIRE(p.costs[1] > 0.0);
    REQUIRE(p.costs[0] != p.costs[1]);
    REQUIRE(p.costs[1] < 1e-10);
    REQUIRE(p.costs[2] == 3.0);
    REQUIRE(p.costs[3] == 7.0);
  }
  SECTION("random tie-heavy instances") {
    SplitMix64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
      // integer-valued euclidean-like grid costs produce many ties
      GeneratedInstance g = gen_random_metric(5, 6, 2, weights_rectangle(6, 3), rep);
      Instance coarse = g.inst;
      for (double& c : coarse.costs) c = std::floor(c * 2) / 2;
      if (validate_metric(coarse)) continue;  // flooring may break the metric
      coarse = make_instance(coarse.m, coarse.n, coarse.k, coarse.costs, coarse.weights);
      Instance p = perturb_distances(coarse);
      std::vector<double> sorted = p.costs;
      std::sort(sorted.begin(), sorted.end());
      REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
      for (std::size_t t = 0; t < p.costs.size(); ++t)
        REQUIRE(std::abs(p.costs[t] - coarse.costs[t]) <=
                1e-9 * std::max(1.0, coarse.costs[t]));
      REQUIRE(p.metric);  // tolerance absorbs the perturbation
    }
  }
}

TEST_CASE("brute force oracle", "[core]") {
  Instance a = tst::line34({1, 1, 0, 0});
  auto [w, c] = brute_force_opt(a);
  REQUIRE(w.open == std::vector<int>{1, 2});
  REQUIRE(c == Approx(5.0));

  Instance ones = tst::line34({1, 1, 1, 1});
  REQUIRE(brute_force_opt(ones).second == Approx(6.0));

  // every enumerated subset costs at least the optimum
  tst::for_each_subset(3, 2, [&](const std::vector<int>& idx) {
    REQUIRE(ordered_cost(a, {idx}) >= 5.0 - 1e-12);
  });

  SECTION("k = m leaves a single subset") {
    Instance full = make_instance(2, 2, 2, {0, 5, 5, 0}, {1, 1});
    auto [fw, fc] = brute_force_opt(full);
    REQUIRE(fw.open == std::vector<int>{0, 1});
    REQUIRE(fc == 0.0);
  }
  SECTION("budget is enforced") {
    std::vector<double> costs(20 * 3, 1.0);
    Instance big = make_instance(20, 3, 10, costs, {1, 1, 1});
    REQUIRE_THROWS_AS(brute_force_opt(big, 100), cap_exceeded);
  }
}

TEST_CASE("adding a facility never increases the ordered cost", "[core]") {
  for (int seed = 0; seed < 10; ++seed) {
    GeneratedInstance g = gen_euclidean(6, 7, 2, weights_geometric(7, 0.6), seed);
    tst::for_each_subset(6, 2, [&](const std::vector<int>& idx) {
      double base = ordered_cost(g.inst, {idx});
      for (int extra = 0; extra < 6; ++extra) {
        if (std::find(idx.begin(), idx.end(), extra) != idx.end()) continue;
        std::vector<int> grown = idx;
        grown.push_back(extra);
        std::sort(grown.begin(), grown.end());
        Instance relaxed = make_instance(6, 7, 3, g.inst.costs, g.inst.weights);
        REQUIRE(ordered_cost(relaxed, {grown}) <= base + 1e-12);
      }
    });
  }
}

TEST_CASE("weights are normalized to a unit leading entry", "[core]") {
  Instance a = make_instance(2, 2, 1, {1, 2, 3, 4}, {4, 1});
  REQUIRE(a.weights[0] == 1.0);
  REQUIRE(a.weights[1] == Approx(0.25));
}

TEST_CASE("instance construction rejects malformed input", "[core]") {
  std::vector<double> c = {1, 2, 3, 4};
  REQUIRE_THROWS_AS(make_instance(0, 2, 1, {}, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 0, c, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 3, c, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, {1, 2, 3}, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, c, {1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, {1, -2, 3, 4}, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, {1, std::nan(""), 3, 4}, {1, 1}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, c, {0, 0}), invalid_instance);
  REQUIRE_THROWS_AS(make_instance(2, 2, 1, c, {1, 2}), invalid_instance);
}

TEST_CASE("instance file parsing", "[core]") {
  SECTION("costs form with comments") {
    Instance a = parse_instance(
        "# fixture\n"
        "m 3 n 4 k 2\n"
        "weights 1 1 0 0\n"
        "costs 0 5 10 11  4 1 6 7  10 5 0 1\n");
    REQUIRE(a == tst::line34());
  }
  SECTION("points form derives euclidean costs") {
    Instance a = parse_instance(
        "m 1 n 2 k 1\n"
        "weights 1 0.5\n"
        "points 0 0  3 4  0 1\n");
    REQUIRE(a.cost(0, 0) == Approx(5.0));
    REQUIRE(a.cost(0, 1) == Approx(1.0));
  }
  SECTION("errors carry line numbers") {
    auto line_of = [](const std::string& text) {
      try {
        parse_instance(text);
      } catch (const parse_error& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    REQUIRE(line_of("m 2 n 2 k 1\nweights 1 1\ncosts 1 2 3 oops\n").find("line 3") == 0);
    REQUIRE(line_of("weights 1 1\n") == "line 1: 'weights' requires m, n and k to be set first");
    REQUIRE(line_of("m 2 n 2 k 1\nweights 1 1\nweights 1 1\n").find("duplicate") !=
            std::string::npos);
    REQUIRE(line_of("m 2 n 2 k 1\nbogus 3\n").find("unknown key") != std::string::npos);
    REQUIRE(line_of("m 2 n 2 k 1\nweights 1 1\n").find("missing costs") != std::string::npos);
    REQUIRE(line_of("m 2 n 2 k 1\nweights 1 1\ncosts 1 2 3\n").find("unexpected end") !=
            std::string::npos);
  }
  SECTION("serialize and parse round-trip exactly") {
    Instance a = tst::line34({1, 0.3, 0.2, 0.1});
    REQUIRE(parse_instance(serialize_instance(a)) == a);
    GeneratedInstance g = gen_euclidean(5, 6, 2, weights_geometric(6, 0.7), 42);
    REQUIRE(parse_instance(serialize_instance(g.inst)) == g.inst);
  }
}

TEST_CASE("ordered cost agrees with the sort-and-dot oracle on random instances", "[core]") {
  for (int seed = 0; seed < 5; ++seed) {
    GeneratedInstance e = gen_euclidean(6, 8, 3, weights_geometric(8, 0.8), seed);
    GeneratedInstance r = gen_random_metric(6, 8, 3, weights_geometric(8, 0.5), seed);
    for (const Instance& inst : {e.inst, r.inst}) {
      REQUIRE(inst.metric);
      tst::for_each_subset(inst.m, inst.k, [&](const std::vector<int>& idx) {
        REQUIRE(ordered_cost(inst, {idx}) == Approx(tst::naive_ordered(inst, idx)).margin(1e-9));
      });
    }
  }
}

TEST_CASE("induced client distances form a metric consistent with the costs", "[core]") {
  Instance a = tst::line34();
  std::vector<double> d = client_distances(a);
  auto at = [&](int j, int j2) { return d[std::size_t(j) * a.n + j2]; };
  REQUIRE(at(0, 1) == Approx(5.0));  // through either near facility
  REQUIRE(at(2, 3) == Approx(1.0));  // through the facility at 10
  REQUIRE(at(0, 3) == Approx(11.0));
  for (int j = 0; j < a.n; ++j)
    for (int j2 = 0; j2 < a.n; ++j2) REQUIRE(at(j, j2) == at(j2, j));

  for (int seed = 0; seed < 5; ++seed) {
    Instance inst = gen_random_metric(4, 6, 2, weights_rectangle(6, 2), seed).inst;
    std::vector<double> dd = client_distances(inst);
    auto a2 = [&](int x, int y2) { return dd[std::size_t(x) * inst.n + y2]; };
    for (int x = 0; x < inst.n; ++x)
      for (int y2 = 0; y2 < inst.n; ++y2)
        for (int z = 0; z < inst.n; ++z)
          REQUIRE(a2(x, y2) <= a2(x, z) + a2(z, y2) + 1e-9);
  }
}

TEST_CASE("decomposition into rectangles is exact", "[core]") {
  SplitMix64 rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    int m = 3 + int(rng.next() % 4), n = 3 + int(rng.next() % 5), k = 1 + int(rng.next() % 2);
    std::vector<double> w(n);
    for (double& v : w) v = rng.next_double();
    std::sort(w.begin(), w.end(), std::greater<double>());
    if (rng.next() % 2) std::fill(w.begin() + n / 2, w.end(), w[n / 2]);  // force ties
    if (w[0] <= 0) continue;
    Instance inst = gen_euclidean(m, n, k, w, rep).inst;
    tst::for_each_subset(m, k, [&](const std::vector<int>& idx) {
      SolutionSet sol{idx};
      double direct = ordered_cost(inst, sol);
      REQUIRE(decomposed_cost(inst, sol) == Approx(direct).margin(1e-9 * std::max(1.0, direct)));
    });
  }
}
