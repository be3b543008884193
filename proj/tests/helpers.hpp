#pragma once

#include <random>
#include <string>
#include <vector>

#include "liftfg/exchangeability.hpp"
#include "liftfg/model.hpp"

namespace testutil {

inline const std::vector<std::string> kBool = {"true", "false"};

/// The two-factor chain A - f1 - B - f2 - C with f1(A, B) and f2(C, B).
inline liftfg::FactorGraph chain_fg(std::vector<liftfg::Rational> t1,
                                    std::vector<liftfg::Rational> t2) {
  liftfg::FactorGraph g;
  g.add_rv({"A", kBool});
  g.add_rv({"B", kBool});
  g.add_rv({"C", kBool});
  g.add_factor({"f1", {"A", "B"}, std::move(t1)});
  g.add_factor({"f2", {"C", "B"}, std::move(t2)});
  return g;
}

/// Epidemic-style model: Epid, Sick.P and Travel.P per person, Treat.P.M per
/// person/medication pair, with shared layer tables.
inline liftfg::FactorGraph epidemic_fg(const std::vector<std::string>& people = {"alice", "bob"},
                                       const std::vector<std::string>& meds = {"m1", "m2"}) {
  using liftfg::Rational;
  liftfg::FactorGraph g;
  g.add_rv({"Epid", kBool});
  for (const auto& p : people) {
    g.add_rv({"Sick." + p, kBool});
    g.add_rv({"Travel." + p, kBool});
    for (const auto& m : meds) g.add_rv({"Treat." + p + "." + m, kBool});
  }
  g.add_factor({"f0", {"Epid"}, {Rational(3), Rational(7)}});
  const std::vector<Rational> t1 = {2, 3, 5, 7, 11, 13, 17, 19};
  const std::vector<Rational> t2 = {1, 4, 9, 16};
  const std::vector<Rational> t3 = {2, 5};
  for (const auto& p : people) {
    g.add_factor({"f1." + p, {"Travel." + p, "Sick." + p, "Epid"}, t1});
    g.add_factor({"f3." + p, {"Travel." + p}, t3});
    for (const auto& m : meds) {
      g.add_factor({"f2." + p + "." + m, {"Sick." + p, "Treat." + p + "." + m}, t2});
    }
  }
  return g;
}

/// Seeded sampler of small arbitrary factor graphs for property tests.
struct RandomFgOptions {
  std::size_t max_rvs = 6;
  std::size_t max_range = 3;
  std::size_t max_factors = 7;
  std::size_t max_arity = 3;
  long long max_potential = 50;
  bool duplicate_tables = true;  // encourage exchangeable pairs
};

inline liftfg::FactorGraph random_fg(std::mt19937_64& rng, const RandomFgOptions& opt = {}) {
  using liftfg::Rational;
  liftfg::FactorGraph g;
  const std::size_t n_rvs = 2 + rng() % (opt.max_rvs - 1);
  for (std::size_t i = 0; i < n_rvs; ++i) {
    const std::size_t size = 2 + rng() % (opt.max_range - 1);
    std::vector<std::string> range;
    for (std::size_t v = 0; v < size; ++v) range.push_back("v" + std::to_string(v));
    g.add_rv({"R" + std::to_string(i), range});
  }
  const std::size_t n_factors = 1 + rng() % opt.max_factors;
  std::vector<std::vector<liftfg::Rational>> previous_tables;
  for (std::size_t i = 0; i < n_factors; ++i) {
    const std::size_t arity = 1 + rng() % std::min(opt.max_arity, n_rvs);
    std::vector<std::size_t> picks;
    while (picks.size() < arity) {
      const std::size_t c = rng() % n_rvs;
      if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
    }
    std::vector<std::string> args;
    std::size_t cells = 1;
    for (auto p : picks) {
      args.push_back(g.rvs()[p].name);
      cells *= g.rvs()[p].range.size();
    }
    std::vector<Rational> table;
    bool reused = false;
    if (opt.duplicate_tables && !previous_tables.empty() && rng() % 3 == 0) {
      for (const auto& t : previous_tables) {
        if (t.size() == cells) {
          table = t;
          if (rng() % 2 == 0) {
            const Rational alpha(1 + static_cast<long long>(rng() % 5));
            for (auto& v : table) v *= alpha;
          }
          reused = true;
          break;
        }
      }
    }
    if (!reused) {
      for (std::size_t c = 0; c < cells; ++c) {
        table.push_back(Rational(1 + static_cast<long long>(rng() % opt.max_potential)));
      }
    }
    previous_tables.push_back(table);
    g.add_factor({"f" + std::to_string(i), args, std::move(table)});
  }
  return g;
}

/// Random positive rational, numerator and denominator up to the bound.
inline liftfg::Rational random_rational(std::mt19937_64& rng, long long bound = 50) {
  return liftfg::Rational(1 + static_cast<long long>(rng() % bound),
                          1 + static_cast<long long>(rng() % bound));
}

/// Factor pair for oracle-equivalence tests: half of the draws are scaled
/// permuted copies, the other half perturb one cell afterwards.
struct FactorPair {
  liftfg::FactorTable phi1;
  liftfg::FactorTable phi2;
  bool constructed_exchangeable;
};

inline FactorPair random_factor_pair(std::mt19937_64& rng, bool exchangeable) {
  using liftfg::Rational;
  const std::size_t arity = 1 + rng() % 4;
  std::vector<std::vector<std::string>> pool = {
      {"a0", "a1"}, {"b0", "b1", "b2"}, {"c0", "c1"}};
  liftfg::FactorTable phi1;
  phi1.name = "phi1";
  std::size_t cells = 1;
  for (std::size_t i = 0; i < arity; ++i) {
    phi1.args.push_back("R" + std::to_string(i));
    phi1.ranges.push_back(pool[rng() % pool.size()]);
    cells *= phi1.ranges.back().size();
  }
  for (std::size_t c = 0; c < cells; ++c) {
    phi1.table.push_back(Rational(1 + static_cast<long long>(rng() % 50)));
  }

  // phi2 = (1/alpha) * phi1 aligned through a random permutation, so that
  // phi1(a) = alpha * phi2(a o perm) holds by construction.
  std::vector<std::size_t> perm(arity);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = arity; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
  const Rational alpha(1 + static_cast<long long>(rng() % 9),
                       1 + static_cast<long long>(rng() % 3));
  liftfg::FactorTable phi2 = align_factor(phi1, perm);
  phi2.name = "phi2";
  for (std::size_t i = 0; i < arity; ++i) phi2.args[i] = "S" + std::to_string(i);
  for (auto& v : phi2.table) v /= alpha;

  if (!exchangeable) {
    auto& cell = phi2.table[rng() % phi2.table.size()];
    cell += Rational(1 + static_cast<long long>(rng() % 7));
  }
  return {std::move(phi1), std::move(phi2), exchangeable};
}

}  // namespace testutil
