#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "liftfg/exchangeability.hpp"
#include "liftfg/model.hpp"

namespace liftfg {

/// Factor initialisation mode: Acp groups factors only when they are equal up
/// to argument order (scalar restricted to one); AlphaAcp admits an arbitrary
/// positive scalar.
enum class CpMode { Acp, AlphaAcp };

inline const char* to_string(CpMode mode) {
  return mode == CpMode::Acp ? "acp" : "alpha-acp";
}

struct ColouringState {
  std::vector<std::string> rv_names;      // graph insertion order
  std::vector<std::string> factor_names;  // graph insertion order

  // Fixed after initialisation: factors rearranged to match their class
  // representative, the witness that justifies the rearrangement, and which
  // aligned positions sit inside a nontrivial commutative set.
  std::map<std::string, FactorTable> aligned;
  std::map<std::string, std::string> init_rep;
  std::map<std::string, Rational> init_alpha;
  std::map<std::string, std::vector<std::size_t>> init_perm;
  std::map<std::string, std::vector<char>> commutative_pos;

  std::map<std::string, int> rv_colour;
  std::map<std::string, int> factor_colour;
};

struct Partition {
  // Groups hold sorted member names; groups are ordered by first member.
  std::vector<std::vector<std::string>> rv_groups;
  std::vector<std::vector<std::string>> factor_groups;

  // Per factor, the witness against its group representative:
  // factor(a) = alpha * rep(a o perm) for all assignments a.
  std::map<std::string, std::string> factor_rep;
  std::map<std::string, Rational> factor_alpha;
  std::map<std::string, std::vector<std::size_t>> factor_perm;
};

namespace detail {

inline std::vector<std::vector<std::string>> colour_groups(
    const std::vector<std::string>& names, const std::map<std::string, int>& colour) {
  std::map<int, std::vector<std::string>> by_colour;
  for (const auto& n : names) by_colour[colour.at(n)].push_back(n);
  std::vector<std::vector<std::string>> groups;
  for (auto& [c, members] : by_colour) {
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

/// Dense colour ids from sorted signature keys; no dependence on hash or
/// insertion order.
template <typename Signature>
std::map<std::string, int> recolour(const std::map<std::string, Signature>& signatures) {
  std::vector<const Signature*> keys;
  keys.reserve(signatures.size());
  for (const auto& [name, sig] : signatures) keys.push_back(&sig);
  std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });
  keys.erase(std::unique(keys.begin(), keys.end(),
                         [](const auto* a, const auto* b) { return *a == *b; }),
             keys.end());
  std::map<std::string, int> colour;
  for (const auto& [name, sig] : signatures) {
    auto it = std::lower_bound(keys.begin(), keys.end(), &sig,
                               [](const auto* a, const auto* b) { return *a < *b; });
    colour[name] = static_cast<int>(it - keys.begin());
  }
  return colour;
}

}  // namespace detail

/// Initial colouring: RVs by (range, evidence value), factors by
/// exchangeability class. Non-representative factors are rearranged to match
/// their representative's argument order, so later position-based signatures
/// compare like with like.
inline ColouringState init_colours(const FactorGraph& g, const Evidence& evidence, CpMode mode) {
  validate_evidence(g, evidence);
  ColouringState state;
  for (const auto& rv : g.rvs()) state.rv_names.push_back(rv.name);
  for (const auto& f : g.factors()) state.factor_names.push_back(f.name);

  // RV colours.
  {
    std::map<std::string, std::pair<std::vector<std::string>, std::string>> sig;
    for (const auto& rv : g.rvs()) {
      auto it = evidence.find(rv.name);
      sig[rv.name] = {rv.range, it == evidence.end() ? std::string() : it->second};
    }
    state.rv_colour = detail::recolour(sig);
  }

  // Factor classes. A cheap key narrows the candidates before pairwise
  // detection: arity, sorted ranges, bucket size profile, and the sorted
  // table (scale-normalised under AlphaAcp).
  using PrefilterKey = std::tuple<std::size_t, std::vector<std::vector<std::string>>,
                                  std::vector<std::size_t>, std::vector<Rational>>;
  std::map<PrefilterKey, std::vector<std::string>> prefilter;
  std::map<std::string, FactorTable> resolved;
  for (const auto& f : g.factors()) resolved.emplace(f.name, resolve(g, f));
  {
    std::vector<std::string> sorted_names = state.factor_names;
    std::sort(sorted_names.begin(), sorted_names.end());
    for (const auto& name : sorted_names) {
      const auto& t = resolved.at(name);
      auto ranges = t.ranges;
      std::sort(ranges.begin(), ranges.end());
      const auto bt = buckets(t);
      std::vector<std::size_t> profile;
      for (const auto& c : bt.cells) profile.push_back(c.size());
      std::sort(profile.begin(), profile.end());
      auto canon = t.table;
      if (mode == CpMode::AlphaAcp) {
        const Rational top = *std::max_element(canon.begin(), canon.end());
        for (auto& v : canon) v /= top;
      }
      std::sort(canon.begin(), canon.end());
      prefilter[{t.arity(), std::move(ranges), std::move(profile), std::move(canon)}].push_back(
          name);
    }
  }

  std::map<std::string, std::vector<std::string>> classes;  // rep -> members
  for (const auto& [key, names] : prefilter) {
    std::vector<std::string> reps;
    for (const auto& name : names) {
      bool placed = false;
      for (const auto& rep : reps) {
        auto w = detect_exchangeable(resolved.at(name), resolved.at(rep));
        if (w && (mode == CpMode::AlphaAcp || w->alpha == Rational(1))) {
          classes[rep].push_back(name);
          state.init_rep[name] = rep;
          state.init_alpha[name] = w->alpha;
          state.init_perm[name] = w->perm;
          state.aligned.emplace(name, align_factor(resolved.at(name), w->perm));
          placed = true;
          break;
        }
      }
      if (!placed) {
        reps.push_back(name);
        classes[name].push_back(name);
        state.init_rep[name] = name;
        state.init_alpha[name] = Rational(1);
        std::vector<std::size_t> identity(resolved.at(name).arity());
        std::iota(identity.begin(), identity.end(), 0);
        state.init_perm[name] = identity;
        state.aligned.emplace(name, resolved.at(name));
      }
    }
  }

  // Class colours keyed by representative name; commutative positions are a
  // property of the aligned table, shared across the class.
  {
    std::map<std::string, std::string> sig;
    for (const auto& [name, rep] : state.init_rep) sig[name] = rep;
    state.factor_colour = detail::recolour(sig);
  }
  for (const auto& [rep, members] : classes) {
    const auto& table = state.aligned.at(rep);
    std::vector<char> flags(table.arity(), 0);
    for (const auto& set : maximal_commutative_sets(table)) {
      for (auto pos : set) flags[pos] = 1;
    }
    for (const auto& m : members) state.commutative_pos[m] = flags;
  }
  return state;
}

/// One factor pass followed by one RV pass, both recoloured from signature
/// content. Never merges colours, so the colour count is non-decreasing.
inline ColouringState refine_step(const ColouringState& state) {
  ColouringState next = state;

  // Factor pass: neighbour colours in aligned argument order, then own colour.
  {
    std::map<std::string, std::vector<int>> sig;
    for (const auto& name : state.factor_names) {
      std::vector<int> s;
      for (const auto& arg : state.aligned.at(name).args) s.push_back(state.rv_colour.at(arg));
      s.push_back(state.factor_colour.at(name));
      sig[name] = std::move(s);
    }
    next.factor_colour = detail::recolour(sig);
  }

  // RV pass: (factor colour, position) pairs, position zero inside a
  // commutative set, sorted by colour then position, then own colour.
  {
    std::map<std::string, std::vector<int>> sig;
    std::map<std::string, std::vector<std::pair<int, int>>> entries;
    for (const auto& name : state.rv_names) entries[name];
    for (const auto& fname : state.factor_names) {
      const auto& aligned = state.aligned.at(fname);
      const auto& commutative = state.commutative_pos.at(fname);
      const int colour = next.factor_colour.at(fname);
      for (std::size_t k = 0; k < aligned.args.size(); ++k) {
        const int position = commutative[k] ? 0 : static_cast<int>(k) + 1;
        entries[aligned.args[k]].emplace_back(colour, position);
      }
    }
    for (auto& [name, list] : entries) {
      std::sort(list.begin(), list.end());
      std::vector<int> s;
      for (const auto& [c, p] : list) {
        s.push_back(c);
        s.push_back(p);
      }
      s.push_back(state.rv_colour.at(name));
      sig[name] = std::move(s);
    }
    next.rv_colour = detail::recolour(sig);
  }
  return next;
}

/// Runs refinement to its fixpoint and extracts the final partition together
/// with per-factor witnesses against the final group representatives.
inline Partition run_colour_passing(const FactorGraph& g, const Evidence& evidence, CpMode mode) {
  ColouringState state = init_colours(g, evidence, mode);
  const std::size_t max_rounds = state.rv_names.size() + state.factor_names.size() + 1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    ColouringState next = refine_step(state);
    const bool stable =
        detail::colour_groups(state.rv_names, state.rv_colour) ==
            detail::colour_groups(next.rv_names, next.rv_colour) &&
        detail::colour_groups(state.factor_names, state.factor_colour) ==
            detail::colour_groups(next.factor_names, next.factor_colour);
    state = std::move(next);
    if (stable) break;
  }

  Partition partition;
  partition.rv_groups = detail::colour_groups(state.rv_names, state.rv_colour);
  partition.factor_groups = detail::colour_groups(state.factor_names, state.factor_colour);

  // Witnesses against the final representative are obtained by composing the
  // witnesses against the shared initial representative:
  //   f(a) = af * r0(a o pf),  rep(a) = ar * r0(a o pr)
  //   =>  f(a) = (af / ar) * rep(a o (pf o pr^-1)).
  for (const auto& group : partition.factor_groups) {
    const std::string& rep = group.front();
    const auto& rep_perm = state.init_perm.at(rep);
    std::vector<std::size_t> rep_inv(rep_perm.size());
    for (std::size_t k = 0; k < rep_perm.size(); ++k) rep_inv[rep_perm[k]] = k;
    for (const auto& member : group) {
      if (state.init_rep.at(member) != state.init_rep.at(rep)) {
        throw std::logic_error("colour passing: group crosses initial classes");
      }
      const auto& member_perm = state.init_perm.at(member);
      std::vector<std::size_t> perm(member_perm.size());
      for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = member_perm[rep_inv[j]];
      partition.factor_rep[member] = rep;
      partition.factor_alpha[member] = state.init_alpha.at(member) / state.init_alpha.at(rep);
      partition.factor_perm[member] = std::move(perm);
    }
  }
  return partition;
}

}  // namespace liftfg
