#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftfg/colour_passing.hpp"
#include "liftfg/exchangeability.hpp"
#include "liftfg/model.hpp"

namespace liftfg {

struct LogVar {
  std::string name;
  std::vector<std::string> domain;  // sorted constant labels

  friend bool operator==(const LogVar&, const LogVar&) = default;
};

/// Parametrised random variable: a representative for a group of ground RVs
/// sharing one range. The grounding map ties constant tuples back to the
/// original RV names and is a bijection onto the group.
struct Prv {
  std::string name;
  std::vector<std::string> logvars;
  std::vector<std::string> range;
  std::vector<std::pair<std::vector<std::string>, std::string>> grounding;  // sorted by tuple

  const std::string& ground(const std::vector<std::string>& constants) const {
    auto it = std::lower_bound(
        grounding.begin(), grounding.end(), constants,
        [](const auto& entry, const auto& key) { return entry.first < key; });
    if (it == grounding.end() || it->first != constants) {
      throw std::invalid_argument("prv '" + name + "': no grounding for the given constants");
    }
    return it->second;
  }

  std::optional<std::vector<std::string>> constants_of(const std::string& rv) const {
    for (const auto& [constants, ground_rv] : grounding) {
      if (ground_rv == rv) return constants;
    }
    return std::nullopt;
  }

  friend bool operator==(const Prv&, const Prv&) = default;
};

struct ParfactorArg {
  std::string prv;
  std::vector<std::string> binding;  // parfactor-scope symbols, one per prv logvar

  friend bool operator==(const ParfactorArg&, const ParfactorArg&) = default;
};

struct ParfactorInstance {
  std::map<std::string, std::string> bindings;  // symbol -> constant
  std::string source;                           // original factor name
  Rational alpha;
  std::vector<std::size_t> perm;  // source(a) = alpha * representative(a o perm)

  friend bool operator==(const ParfactorInstance&, const ParfactorInstance&) = default;
};

struct Parfactor {
  std::string name;
  std::vector<ParfactorArg> args;
  std::vector<Rational> table;  // representative's table
  std::vector<ParfactorInstance> instances;

  friend bool operator==(const Parfactor&, const Parfactor&) = default;
};

struct ParametricFactorGraph {
  std::vector<LogVar> logvars;
  std::vector<Prv> prvs;
  std::vector<Parfactor> parfactors;

  const Prv& prv(const std::string& name) const {
    for (const auto& p : prvs) {
      if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown prv '" + name + "'");
  }

  friend bool operator==(const ParametricFactorGraph&, const ParametricFactorGraph&) = default;
};

namespace detail {

/// Splits "base.c1.c2" style names; nullopt when the group does not factor as
/// base plus a full grid of constants.
inline std::optional<std::vector<std::vector<std::string>>> grid_pieces(
    const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> pieces;
  for (const auto& name : names) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto dot = name.find('.', start);
      if (dot == std::string::npos) {
        parts.push_back(name.substr(start));
        break;
      }
      parts.push_back(name.substr(start, dot - start));
      start = dot + 1;
    }
    for (const auto& p : parts) {
      if (p.empty() || p.find(',') != std::string::npos) return std::nullopt;
    }
    if (parts.size() < 2) return std::nullopt;
    if (!pieces.empty() && parts.size() != pieces.front().size()) return std::nullopt;
    pieces.push_back(std::move(parts));
  }
  for (const auto& p : pieces) {
    if (p.front() != pieces.front().front()) return std::nullopt;  // common base
  }
  // Full product grid: the tuple count must equal the product of the
  // per-position value set sizes.
  const std::size_t positions = pieces.front().size() - 1;
  std::size_t combinations = 1;
  for (std::size_t i = 0; i < positions; ++i) {
    std::set<std::string> values;
    for (const auto& p : pieces) values.insert(p[i + 1]);
    combinations *= values.size();
  }
  if (combinations != pieces.size()) return std::nullopt;
  return pieces;
}

}  // namespace detail

/// Builds the lifted model from a colour-passing partition: one PRV per RV
/// group, one parfactor per factor group carrying the representative's table,
/// with per-instance scale and alignment bookkeeping. A partition whose
/// witnesses fail validation signals an internal soundness violation.
inline ParametricFactorGraph construct_pfg(const FactorGraph& g, const Partition& partition) {
  ParametricFactorGraph pfg;

  std::map<std::string, std::size_t> rv_group_of;
  for (std::size_t i = 0; i < partition.rv_groups.size(); ++i) {
    for (const auto& name : partition.rv_groups[i]) rv_group_of[name] = i;
  }
  for (const auto& rv : g.rvs()) {
    if (!rv_group_of.count(rv.name)) {
      throw std::logic_error("construct_pfg: rv '" + rv.name + "' missing from partition");
    }
  }

  // RV groups must be uniform in range; that is what makes a PRV well formed.
  std::set<std::string> used_names;
  std::vector<std::string> prv_of_group(partition.rv_groups.size());
  int next_logvar = 1;
  auto fresh_logvar = [&](std::vector<std::string> domain) {
    LogVar lv{"X" + std::to_string(next_logvar++), std::move(domain)};
    pfg.logvars.push_back(lv);
    return lv.name;
  };
  auto unique_name = [&](std::string base) {
    std::string name = base;
    int suffix = 2;
    while (used_names.count(name)) name = base + "_" + std::to_string(suffix++);
    used_names.insert(name);
    return name;
  };

  for (std::size_t gi = 0; gi < partition.rv_groups.size(); ++gi) {
    const auto& group = partition.rv_groups[gi];
    const auto& range = g.rv(group.front()).range;
    for (const auto& member : group) {
      if (g.rv(member).range != range) {
        throw std::logic_error("construct_pfg: rv group mixes ranges ('" + group.front() +
                               "' vs '" + member + "')");
      }
    }
    Prv prv;
    prv.range = range;
    if (group.size() == 1) {
      prv.name = unique_name(group.front());
      prv.grounding.push_back({{}, group.front()});
    } else if (auto pieces = detail::grid_pieces(group)) {
      prv.name = unique_name(pieces->front().front());
      const std::size_t positions = pieces->front().size() - 1;
      for (std::size_t i = 0; i < positions; ++i) {
        std::set<std::string> values;
        for (const auto& p : *pieces) values.insert(p[i + 1]);
        prv.logvars.push_back(
            fresh_logvar(std::vector<std::string>(values.begin(), values.end())));
      }
      for (std::size_t m = 0; m < group.size(); ++m) {
        std::vector<std::string> constants((*pieces)[m].begin() + 1, (*pieces)[m].end());
        prv.grounding.push_back({std::move(constants), group[m]});
      }
      std::sort(prv.grounding.begin(), prv.grounding.end());
    } else {
      prv.name = unique_name(group.front());
      prv.logvars.push_back(fresh_logvar(group));
      for (const auto& member : group) prv.grounding.push_back({{member}, member});
    }
    prv_of_group[gi] = prv.name;
    pfg.prvs.push_back(std::move(prv));
  }

  for (const auto& group : partition.factor_groups) {
    const std::string& rep_name = group.front();
    const Factor& rep = g.factor(rep_name);
    const FactorTable rep_table = resolve(g, rep);

    Parfactor pf;
    pf.name = rep_name;
    pf.table = rep.table;
    std::vector<const Prv*> slot_prvs;
    for (const auto& arg : rep.args) {
      const auto& prv_name = prv_of_group[rv_group_of.at(arg)];
      pf.args.push_back({prv_name, {}});
      slot_prvs.push_back(&pfg.prv(prv_name));
    }

    // Constant matrix: one row per member, one column per (slot, logvar
    // position). Columns with identical contents share a binding symbol.
    std::vector<std::vector<std::vector<std::string>>> rows;  // member x slot -> constants
    for (const auto& member : group) {
      const Factor& f = g.factor(member);
      const auto& perm = partition.factor_perm.at(member);
      const auto& alpha = partition.factor_alpha.at(member);
      if (partition.factor_rep.at(member) != rep_name) {
        throw std::logic_error("construct_pfg: inconsistent representative for '" + member + "'");
      }
      ExchangeabilityWitness w{alpha, perm};
      if (!witness_valid(resolve(g, f), rep_table, w)) {
        throw std::logic_error("construct_pfg: factor group member '" + member +
                               "' is not exchangeable with representative '" + rep_name + "'");
      }
      std::vector<std::vector<std::string>> row(rep.args.size());
      for (std::size_t k = 0; k < rep.args.size(); ++k) {
        const std::string& ground_rv = f.args[perm[k]];
        if (rv_group_of.at(ground_rv) != rv_group_of.at(rep.args[k])) {
          throw std::logic_error("construct_pfg: misaligned neighbour groups for '" + member +
                                 "'");
        }
        auto constants = slot_prvs[k]->constants_of(ground_rv);
        if (!constants) {
          throw std::logic_error("construct_pfg: '" + ground_rv + "' missing from prv '" +
                                 slot_prvs[k]->name + "'");
        }
        row[k] = *constants;
      }
      rows.push_back(std::move(row));
    }

    // Unify columns into binding symbols, in slot order.
    std::vector<std::vector<std::string>> columns;  // per symbol: values across members
    for (std::size_t k = 0; k < rep.args.size(); ++k) {
      const std::size_t width = slot_prvs[k]->logvars.size();
      for (std::size_t pos = 0; pos < width; ++pos) {
        std::vector<std::string> column;
        for (const auto& row : rows) column.push_back(row[k][pos]);
        auto it = std::find(columns.begin(), columns.end(), column);
        if (it == columns.end()) {
          columns.push_back(std::move(column));
          it = columns.end() - 1;
        }
        pf.args[k].binding.push_back(
            "V" + std::to_string(static_cast<int>(it - columns.begin()) + 1));
      }
    }

    for (std::size_t m = 0; m < group.size(); ++m) {
      ParfactorInstance inst;
      inst.source = group[m];
      inst.alpha = partition.factor_alpha.at(group[m]);
      inst.perm = partition.factor_perm.at(group[m]);
      for (std::size_t c = 0; c < columns.size(); ++c) {
        inst.bindings["V" + std::to_string(c + 1)] = columns[c][m];
      }
      pf.instances.push_back(std::move(inst));
    }
    pfg.parfactors.push_back(std::move(pf));
  }
  return pfg;
}

/// Instantiates every parfactor per its stored bindings. By default each
/// instance takes the representative table verbatim (the per-instance scale
/// is dropped, which preserves the normalised distribution). With
/// preserve_scale the original argument order and scaled table are
/// reconstructed exactly.
inline FactorGraph ground_pfg(const ParametricFactorGraph& pfg, bool preserve_scale = false) {
  FactorGraph g;
  for (const auto& prv : pfg.prvs) {
    for (const auto& [constants, rv] : prv.grounding) {
      g.add_rv({rv, prv.range});
    }
  }
  for (const auto& pf : pfg.parfactors) {
    std::vector<std::vector<std::string>> slot_ranges;
    for (const auto& arg : pf.args) slot_ranges.push_back(pfg.prv(arg.prv).range);
    for (const auto& inst : pf.instances) {
      std::vector<std::string> slot_rvs;
      for (const auto& arg : pf.args) {
        std::vector<std::string> constants;
        for (const auto& symbol : arg.binding) constants.push_back(inst.bindings.at(symbol));
        slot_rvs.push_back(pfg.prv(arg.prv).ground(constants));
      }
      Factor f;
      f.name = inst.source;
      if (!preserve_scale) {
        f.args = slot_rvs;
        f.table = pf.table;
      } else {
        // source(a) = alpha * rep(a o perm): invert the alignment.
        const auto& perm = inst.perm;
        f.args.resize(slot_rvs.size());
        std::vector<std::vector<std::string>> orig_ranges(slot_rvs.size());
        for (std::size_t k = 0; k < perm.size(); ++k) {
          f.args[perm[k]] = slot_rvs[k];
          orig_ranges[perm[k]] = slot_ranges[k];
        }
        std::vector<std::size_t> orig_shape, rep_shape;
        for (const auto& r : orig_ranges) orig_shape.push_back(r.size());
        for (const auto& r : slot_ranges) rep_shape.push_back(r.size());
        f.table.resize(pf.table.size());
        std::vector<std::size_t> a(perm.size(), 0);
        std::vector<std::size_t> fed(perm.size());
        std::size_t idx = 0;
        do {
          for (std::size_t k = 0; k < perm.size(); ++k) fed[k] = a[perm[k]];
          f.table[idx++] = inst.alpha * pf.table[tuple_index(rep_shape, fed)];
        } while (next_tuple(orig_shape, a));
      }
      g.add_factor(std::move(f));
    }
  }
  return g;
}

/// Name-keyed comparison: same RVs with equal ranges, same factors with equal
/// arguments and tables, insertion order ignored.
inline bool equivalent_graphs(const FactorGraph& a, const FactorGraph& b) {
  if (a.rvs().size() != b.rvs().size() || a.factors().size() != b.factors().size()) return false;
  for (const auto& rv : a.rvs()) {
    if (!b.has_rv(rv.name) || b.rv(rv.name) != rv) return false;
  }
  for (const auto& f : a.factors()) {
    if (!b.has_factor(f.name) || b.factor(f.name) != f) return false;
  }
  return true;
}

}  // namespace liftfg
