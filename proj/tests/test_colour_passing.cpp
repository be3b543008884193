#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "helpers.hpp"
#include "liftfg/colour_passing.hpp"
#include "liftfg/generate.hpp"

using namespace liftfg;
using testutil::chain_fg;
using testutil::kBool;

namespace {

using Groups = std::vector<std::vector<std::string>>;

bool contained_in(const Groups& fine, const Groups& coarse) {
  for (const auto& small : fine) {
    bool found = false;
    for (const auto& big : coarse) {
      if (std::includes(big.begin(), big.end(), small.begin(), small.end())) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

Groups rv_grouping(const ColouringState& state) {
  std::map<int, std::vector<std::string>> by_colour;
  for (const auto& n : state.rv_names) by_colour[state.rv_colour.at(n)].push_back(n);
  Groups out;
  for (auto& [c, g] : by_colour) {
    std::sort(g.begin(), g.end());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Groups factor_grouping(const ColouringState& state) {
  std::map<int, std::vector<std::string>> by_colour;
  for (const auto& n : state.factor_names) by_colour[state.factor_colour.at(n)].push_back(n);
  Groups out;
  for (auto& [c, g] : by_colour) {
    std::sort(g.begin(), g.end());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("initial colours on the identical-table chain") {
  const auto g = chain_fg({1, 2, 3, 4}, {1, 2, 3, 4});
  for (auto mode : {CpMode::Acp, CpMode::AlphaAcp}) {
    const auto state = init_colours(g, {}, mode);
    CHECK(rv_grouping(state) == Groups{{"A", "B", "C"}});
    CHECK(factor_grouping(state) == Groups{{"f1", "f2"}});
  }
}

TEST_CASE("initial colours split scaled factors only under plain acp") {
  const auto g = chain_fg({1, 2, 3, 4}, {3, 6, 9, 12});  // f2 = 3 * f1
  const auto acp = init_colours(g, {}, CpMode::Acp);
  CHECK(factor_grouping(acp) == Groups{{"f1"}, {"f2"}});
  const auto alpha = init_colours(g, {}, CpMode::AlphaAcp);
  CHECK(factor_grouping(alpha) == Groups{{"f1", "f2"}});
}

TEST_CASE("evidence splits the initial rv colours") {
  auto g = testutil::epidemic_fg();
  const Evidence ev = {{"Sick.alice", "true"}};
  const auto state = init_colours(g, ev, CpMode::AlphaAcp);
  CHECK(state.rv_colour.at("Sick.alice") != state.rv_colour.at("Sick.bob"));
  CHECK(state.rv_colour.at("Travel.alice") == state.rv_colour.at("Travel.bob"));
}

TEST_CASE("one refinement step on the identical-table chain") {
  const auto g = chain_fg({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto state = init_colours(g, {}, CpMode::AlphaAcp);
  const auto next = refine_step(state);
  // Both factors received identical messages: the factor grouping holds.
  CHECK(factor_grouping(next) == factor_grouping(state));
  // A and C share a colour; B, with two position-two memberships, splits off.
  CHECK(rv_grouping(next) == Groups{{"A", "C"}, {"B"}});
}

TEST_CASE("a fully distinct graph is an immediate fixpoint") {
  FactorGraph g;
  g.add_rv({"A", {"x", "y"}});
  g.add_rv({"B", {"p", "q", "r"}});
  g.add_factor({"f1", {"A"}, {2, 3}});
  g.add_factor({"f2", {"B"}, {1, 2, 3}});
  const auto state = init_colours(g, {}, CpMode::AlphaAcp);
  const auto next = refine_step(state);
  CHECK(rv_grouping(next) == rv_grouping(state));
  CHECK(factor_grouping(next) == factor_grouping(state));
}

TEST_CASE("colour passing on the identical-table chain") {
  const auto g = chain_fg({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto partition = run_colour_passing(g, {}, CpMode::AlphaAcp);
  CHECK(partition.rv_groups == Groups{{"A", "C"}, {"B"}});
  CHECK(partition.factor_groups == Groups{{"f1", "f2"}});
  CHECK(partition.factor_alpha.at("f2") == Rational(1));
}

TEST_CASE("colour passing groups the epidemic model by layer") {
  const auto g = testutil::epidemic_fg();
  const auto partition = run_colour_passing(g, {}, CpMode::AlphaAcp);
  const Groups expected_rvs = {
      {"Epid"},
      {"Sick.alice", "Sick.bob"},
      {"Travel.alice", "Travel.bob"},
      {"Treat.alice.m1", "Treat.alice.m2", "Treat.bob.m1", "Treat.bob.m2"}};
  const Groups expected_factors = {
      {"f0"},
      {"f1.alice", "f1.bob"},
      {"f2.alice.m1", "f2.alice.m2", "f2.bob.m1", "f2.bob.m2"},
      {"f3.alice", "f3.bob"}};
  CHECK(partition.rv_groups == expected_rvs);
  CHECK(partition.factor_groups == expected_factors);
}

TEST_CASE("a scaled epidemic factor splits acp but not alpha-acp") {
  auto g = scale_factor(testutil::epidemic_fg(), "f1.bob", Rational(3));
  const auto acp = run_colour_passing(g, {}, CpMode::Acp);
  const auto alpha = run_colour_passing(g, {}, CpMode::AlphaAcp);

  CHECK(std::find(alpha.factor_groups.begin(), alpha.factor_groups.end(),
                  std::vector<std::string>{"f1.alice", "f1.bob"}) != alpha.factor_groups.end());
  CHECK(alpha.factor_alpha.at("f1.bob") == Rational(3));
  CHECK(std::find(acp.factor_groups.begin(), acp.factor_groups.end(),
                  std::vector<std::string>{"f1.alice"}) != acp.factor_groups.end());
  CHECK(acp.factor_groups.size() > alpha.factor_groups.size());
  CHECK(contained_in(acp.factor_groups, alpha.factor_groups));
}

TEST_CASE("permuted arguments are aligned before position signatures") {
  // f2 carries f1's mapping scaled by two with swapped arguments, as in the
  // bucket example; the chain must still group A with C.
  FactorGraph g;
  g.add_rv({"A", kBool});
  g.add_rv({"B", kBool});
  g.add_rv({"C", kBool});
  g.add_factor({"f1", {"A", "B"}, {3, 5, 7, 2}});
  g.add_factor({"f2", {"B", "C"}, {6, 14, 10, 4}});
  const auto partition = run_colour_passing(g, {}, CpMode::AlphaAcp);
  CHECK(partition.rv_groups == Groups{{"A", "C"}, {"B"}});
  CHECK(partition.factor_groups == Groups{{"f1", "f2"}});
  CHECK(partition.factor_alpha.at("f2") == Rational(2));
  // f2's argument playing f1's first role is C, its second argument.
  CHECK(partition.factor_perm.at("f2") == std::vector<std::size_t>{1, 0});
}

TEST_CASE("commutative factors suppress positions in rv signatures") {
  FactorGraph g;
  g.add_rv({"A", kBool});
  g.add_rv({"B", kBool});
  g.add_factor({"f", {"A", "B"}, {4, 9, 9, 25}});
  g.add_factor({"ua", {"A"}, {2, 5}});
  g.add_factor({"ub", {"B"}, {2, 5}});
  const auto partition = run_colour_passing(g, {}, CpMode::AlphaAcp);
  // With the symmetric pairwise factor, A and B are indistinguishable.
  CHECK(partition.rv_groups == Groups{{"A", "B"}});

  // The asymmetric variant separates them.
  FactorGraph h;
  h.add_rv({"A", kBool});
  h.add_rv({"B", kBool});
  h.add_factor({"f", {"A", "B"}, {4, 9, 11, 25}});
  h.add_factor({"ua", {"A"}, {2, 5}});
  h.add_factor({"ub", {"B"}, {2, 5}});
  const auto split = run_colour_passing(h, {}, CpMode::AlphaAcp);
  CHECK(split.rv_groups == Groups{{"A"}, {"B"}});
}

TEST_CASE("property: partitions are sound and witnesses validate") {
  std::mt19937_64 rng(211);
  for (int round = 0; round < 30; ++round) {
    const auto g = testutil::random_fg(rng);
    Evidence ev;
    if (rng() % 3 == 0) {
      const auto& rv = g.rvs()[rng() % g.rvs().size()];
      ev[rv.name] = rv.range[rng() % rv.range.size()];
    }
    for (auto mode : {CpMode::Acp, CpMode::AlphaAcp}) {
      const auto partition = run_colour_passing(g, ev, mode);
      for (const auto& group : partition.rv_groups) {
        for (const auto& member : group) {
          CHECK(g.rv(member).range == g.rv(group.front()).range);
          const auto e1 = ev.count(member) ? ev.at(member) : "";
          const auto e2 = ev.count(group.front()) ? ev.at(group.front()) : "";
          CHECK(e1 == e2);
        }
      }
      for (const auto& group : partition.factor_groups) {
        const auto rep = resolve(g, partition.factor_rep.at(group.front()));
        for (const auto& member : group) {
          const ExchangeabilityWitness w{partition.factor_alpha.at(member),
                                         partition.factor_perm.at(member)};
          CHECK(witness_valid(resolve(g, member), rep, w));
          if (mode == CpMode::Acp) CHECK(w.alpha == Rational(1));
        }
      }
    }
  }
}

TEST_CASE("property: the alpha partition is coarser or equal on factors") {
  std::mt19937_64 rng(223);
  for (int round = 0; round < 25; ++round) {
    const auto g = testutil::random_fg(rng);
    const auto acp = run_colour_passing(g, {}, CpMode::Acp);
    const auto alpha = run_colour_passing(g, {}, CpMode::AlphaAcp);
    CHECK(contained_in(acp.factor_groups, alpha.factor_groups));
    CHECK(alpha.factor_groups.size() <= acp.factor_groups.size());
  }
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto gen = generate_fg_detailed({8, 0.15, 10, seed});
    const auto acp = run_colour_passing(gen.graph, {}, CpMode::Acp);
    const auto alpha = run_colour_passing(gen.graph, {}, CpMode::AlphaAcp);
    CHECK(contained_in(acp.factor_groups, alpha.factor_groups));
  }
}

TEST_CASE("strictness: a cross-scale pair merges only under alpha-acp") {
  const auto base = chain_fg({1, 2, 3, 4}, {1, 2, 3, 4});
  const auto g = scale_factor(base, "f2", Rational(7));
  const auto acp = run_colour_passing(g, {}, CpMode::Acp);
  const auto alpha = run_colour_passing(g, {}, CpMode::AlphaAcp);
  CHECK(acp.factor_groups == Groups{{"f1"}, {"f2"}});
  CHECK(alpha.factor_groups == Groups{{"f1", "f2"}});
}

TEST_CASE("determinism: identical inputs give identical partitions") {
  std::mt19937_64 rng(227);
  for (int round = 0; round < 10; ++round) {
    const auto g = testutil::random_fg(rng);
    for (auto mode : {CpMode::Acp, CpMode::AlphaAcp}) {
      const auto p1 = run_colour_passing(g, {}, mode);
      const auto p2 = run_colour_passing(g, {}, mode);
      CHECK(p1.rv_groups == p2.rv_groups);
      CHECK(p1.factor_groups == p2.factor_groups);
      CHECK(p1.factor_perm == p2.factor_perm);
      CHECK(p1.factor_alpha == p2.factor_alpha);
    }
  }
}

TEST_CASE("the fixpoint is idempotent under further refinement") {
  std::mt19937_64 rng(229);
  for (int round = 0; round < 10; ++round) {
    const auto g = testutil::random_fg(rng);
    auto state = init_colours(g, {}, CpMode::AlphaAcp);
    for (std::size_t i = 0; i < g.rvs().size() + g.factors().size() + 1; ++i) {
      state = refine_step(state);
    }
    const auto again = refine_step(state);
    CHECK(rv_grouping(again) == rv_grouping(state));
    CHECK(factor_grouping(again) == factor_grouping(state));
  }
}

TEST_CASE("without scaled factors both modes agree") {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto g = generate_fg({8, 0.0, 10, seed});
    const auto acp = run_colour_passing(g, {}, CpMode::Acp);
    const auto alpha = run_colour_passing(g, {}, CpMode::AlphaAcp);
    CHECK(acp.rv_groups == alpha.rv_groups);
    CHECK(acp.factor_groups == alpha.factor_groups);
  }
}

TEST_CASE("refinement never merges colours") {
  const auto g = testutil::epidemic_fg();
  auto state = init_colours(g, {}, CpMode::AlphaAcp);
  auto count_colours = [](const std::map<std::string, int>& m) {
    std::set<int> s;
    for (const auto& [k, v] : m) s.insert(v);
    return s.size();
  };
  for (int i = 0; i < 5; ++i) {
    const auto next = refine_step(state);
    CHECK(count_colours(next.rv_colour) >= count_colours(state.rv_colour));
    CHECK(count_colours(next.factor_colour) >= count_colours(state.factor_colour));
    state = next;
  }
}
