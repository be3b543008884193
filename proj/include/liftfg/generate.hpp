#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftfg/exchangeability.hpp"
#include "liftfg/model.hpp"

namespace liftfg {

struct GenConfig {
  unsigned d = 2;            // size parameter
  double p = 0.0;            // proportion of factors to scale, in [0, 1]
  unsigned alpha_max = 1;    // scalars drawn uniformly from {1..alpha_max}
  std::uint64_t seed = 0;
};

struct GeneratedFg {
  FactorGraph graph;
  std::string hub;
  std::vector<std::string> degree_one_rvs;            // secondary and leaf rvs
  std::vector<std::pair<std::string, unsigned>> scaled;  // factor -> applied scalar
};

namespace detail {

/// Bounded draw on top of mt19937_64; the modulo keeps results identical
/// across standard libraries, which uniform_int_distribution does not.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

inline std::string pad(unsigned value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace detail

/// Deterministic star-of-stars family: one hub, d branches with a shared
/// hub-branch table, one secondary rv per branch with a second shared table,
/// and up to floor(log2 d) extra leaf rvs per branch with a third shared
/// table. A global leaf budget keeps the rv count within
/// [2d+1, d*floor(log2 d)+2d+1] and the factor count within
/// [2d, d*floor(log2 d)+d+1]. Finally ceil(p*m) factors, sampled without
/// replacement, are scaled entrywise by a scalar from {1..alpha_max}; the
/// scaled prefix is nested as p grows for a fixed seed.
inline GeneratedFg generate_fg_detailed(const GenConfig& config) {
  if (config.d < 2) throw std::invalid_argument("generate_fg: d must be at least 2");
  if (config.p < 0.0 || config.p > 1.0) {
    throw std::invalid_argument("generate_fg: p must lie in [0, 1]");
  }
  if (config.alpha_max < 1) throw std::invalid_argument("generate_fg: alpha_max must be >= 1");

  std::mt19937_64 rng(config.seed);
  const std::vector<std::string> boolean = {"true", "false"};

  // Three shared layer tables, pairwise non-exchangeable so the layers never
  // merge by accident.
  std::vector<std::vector<Rational>> layer_tables;
  while (layer_tables.size() < 3) {
    std::vector<Rational> t;
    for (int i = 0; i < 4; ++i) t.push_back(Rational(1 + static_cast<long long>(detail::draw(rng, 50))));
    bool all_equal = std::all_of(t.begin(), t.end(), [&](const Rational& v) { return v == t[0]; });
    if (all_equal) continue;
    bool clashes = false;
    for (const auto& other : layer_tables) {
      FactorTable a{"a", {"x", "y"}, {boolean, boolean}, t};
      FactorTable b{"b", {"x", "y"}, {boolean, boolean}, other};
      if (brute_force_exchangeable(a, b)) clashes = true;
    }
    if (!clashes) layer_tables.push_back(std::move(t));
  }

  GeneratedFg out;
  out.hub = "Hub";
  out.graph.add_rv({"Hub", boolean});

  const unsigned log_d = static_cast<unsigned>(std::floor(std::log2(config.d)));
  // The factor count is the binding bound: 2d + total leaves <= d*log_d + d + 1.
  long long leaf_budget =
      static_cast<long long>(config.d) * (static_cast<long long>(log_d) - 1) + 1;
  if (leaf_budget < 0) leaf_budget = 0;

  struct Attachment {
    std::string factor;
    std::vector<std::string> args;
    std::size_t layer;
  };
  std::vector<Attachment> attachments;
  for (unsigned i = 1; i <= config.d; ++i) {
    const std::string branch = "Branch." + detail::pad(i, 4);
    const std::string secondary = "Sec." + detail::pad(i, 4);
    out.graph.add_rv({branch, boolean});
    out.graph.add_rv({secondary, boolean});
    out.degree_one_rvs.push_back(secondary);
    attachments.push_back({"fh." + detail::pad(i, 4), {"Hub", branch}, 0});
    attachments.push_back({"fs." + detail::pad(i, 4), {branch, secondary}, 1});
    const unsigned wanted = static_cast<unsigned>(detail::draw(rng, log_d + 1));
    const unsigned leaves =
        static_cast<unsigned>(std::min<long long>(wanted, std::max<long long>(leaf_budget, 0)));
    leaf_budget -= leaves;
    for (unsigned j = 1; j <= leaves; ++j) {
      const std::string leaf = "Leaf." + detail::pad(i, 4) + "." + detail::pad(j, 2);
      out.graph.add_rv({leaf, boolean});
      out.degree_one_rvs.push_back(leaf);
      attachments.push_back(
          {"fl." + detail::pad(i, 4) + "." + detail::pad(j, 2), {branch, leaf}, 2});
    }
  }
  // Scale a nested prefix of a fixed shuffle, so growing p only adds factors.
  const std::size_t m = attachments.size();
  std::vector<std::size_t> shuffle(m);
  for (std::size_t i = 0; i < m; ++i) shuffle[i] = i;
  for (std::size_t i = m; i > 1; --i) {
    std::swap(shuffle[i - 1], shuffle[detail::draw(rng, i)]);
  }
  std::vector<unsigned> alphas(m);
  for (auto& a : alphas) a = 1 + static_cast<unsigned>(detail::draw(rng, config.alpha_max));
  const std::size_t scaled_count = std::min(
      static_cast<std::size_t>(std::ceil(config.p * static_cast<double>(m))), m);
  std::vector<unsigned> scale_of(m, 1);
  for (std::size_t i = 0; i < scaled_count; ++i) {
    scale_of[shuffle[i]] = alphas[i];
    out.scaled.emplace_back(attachments[shuffle[i]].factor, alphas[i]);
  }

  for (std::size_t i = 0; i < m; ++i) {
    auto table = layer_tables[attachments[i].layer];
    if (scale_of[i] != 1) {
      for (auto& v : table) v *= Rational(scale_of[i]);
    }
    out.graph.add_factor({attachments[i].factor, attachments[i].args, std::move(table)});
  }
  std::sort(out.scaled.begin(), out.scaled.end());
  return out;
}

inline FactorGraph generate_fg(const GenConfig& config) {
  return generate_fg_detailed(config).graph;
}

}  // namespace liftfg
