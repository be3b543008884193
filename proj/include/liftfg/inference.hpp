#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "liftfg/model.hpp"
#include "liftfg/pfg.hpp"

namespace liftfg {

/// A marginal distribution query on one ground RV (optionally a single event
/// RV = value), conditioned on evidence.
struct Query {
  std::string term;
  std::optional<std::string> value;
  Evidence evidence;
};

struct Marginal {
  std::vector<std::pair<std::string, Rational>> dist;  // in range order, sums to one

  const Rational& at(const std::string& value) const {
    for (const auto& [v, p] : dist) {
      if (v == value) return p;
    }
    throw std::invalid_argument("marginal: no entry for value '" + value + "'");
  }

  friend bool operator==(const Marginal&, const Marginal&) = default;
};

namespace detail {

struct VeTable {
  std::vector<std::size_t> vars;  // universe ids, ascending
  std::vector<std::size_t> shape;
  std::vector<Rational> vals;
};

inline VeTable multiply(const VeTable& a, const VeTable& b,
                        const std::vector<std::size_t>& universe_shape) {
  VeTable out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  for (auto v : out.vars) out.shape.push_back(universe_shape[v]);

  auto positions = [&](const VeTable& t) {
    std::vector<std::size_t> pos;
    for (auto v : t.vars) {
      pos.push_back(static_cast<std::size_t>(
          std::lower_bound(out.vars.begin(), out.vars.end(), v) - out.vars.begin()));
    }
    return pos;
  };
  const auto pos_a = positions(a);
  const auto pos_b = positions(b);

  out.vals.resize(table_size(out.shape));
  std::vector<std::size_t> tuple(out.vars.size(), 0);
  std::vector<std::size_t> local;
  std::size_t idx = 0;
  do {
    local.clear();
    for (auto p : pos_a) local.push_back(tuple[p]);
    Rational v = a.vals[tuple_index(a.shape, local)];
    local.clear();
    for (auto p : pos_b) local.push_back(tuple[p]);
    v *= b.vals[tuple_index(b.shape, local)];
    out.vals[idx++] = std::move(v);
  } while (!out.shape.empty() && next_tuple(out.shape, tuple));
  return out;
}

inline VeTable sum_out(const VeTable& t, std::size_t var) {
  const auto it = std::lower_bound(t.vars.begin(), t.vars.end(), var);
  if (it == t.vars.end() || *it != var) {
    throw std::logic_error("sum_out: variable not present");
  }
  const std::size_t drop = static_cast<std::size_t>(it - t.vars.begin());
  VeTable out;
  for (std::size_t i = 0; i < t.vars.size(); ++i) {
    if (i == drop) continue;
    out.vars.push_back(t.vars[i]);
    out.shape.push_back(t.shape[i]);
  }
  out.vals.assign(table_size(out.shape), Rational(0));
  std::vector<std::size_t> tuple(t.vars.size(), 0);
  std::vector<std::size_t> reduced;
  std::size_t idx = 0;
  do {
    reduced.clear();
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
      if (i != drop) reduced.push_back(tuple[i]);
    }
    out.vals[tuple_index(out.shape, reduced)] += t.vals[idx++];
  } while (next_tuple(t.shape, tuple));
  return out;
}

/// Fixes observed slots of a dense table and drops them.
inline void condition_slots(std::vector<std::size_t>& shape, std::vector<Rational>& vals,
                            const std::vector<std::pair<std::size_t, std::size_t>>& fixed) {
  if (fixed.empty()) return;
  std::vector<std::size_t> kept_slots;
  std::vector<std::size_t> fixed_value(shape.size(), 0);
  std::vector<char> is_fixed(shape.size(), 0);
  for (const auto& [slot, value] : fixed) {
    is_fixed[slot] = 1;
    fixed_value[slot] = value;
  }
  std::vector<std::size_t> new_shape;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!is_fixed[i]) {
      kept_slots.push_back(i);
      new_shape.push_back(shape[i]);
    }
  }
  std::vector<Rational> new_vals(table_size(new_shape));
  std::vector<std::size_t> tuple(new_shape.size(), 0);
  std::vector<std::size_t> full(shape.size());
  std::size_t idx = 0;
  do {
    for (std::size_t i = 0; i < shape.size(); ++i) full[i] = fixed_value[i];
    for (std::size_t i = 0; i < kept_slots.size(); ++i) full[kept_slots[i]] = tuple[i];
    new_vals[idx++] = vals[tuple_index(shape, full)];
  } while (!new_shape.empty() && next_tuple(new_shape, tuple));
  shape = std::move(new_shape);
  vals = std::move(new_vals);
}

inline Marginal normalise_over(const std::vector<std::string>& range,
                               std::vector<Rational> weights) {
  Rational z(0);
  for (const auto& w : weights) z += w;
  if (z.is_zero()) throw std::logic_error("query: zero total weight");
  Marginal m;
  for (std::size_t i = 0; i < range.size(); ++i) {
    m.dist.emplace_back(range[i], weights[i] / z);
  }
  return m;
}

}  // namespace detail

/// Exact ground variable elimination. Evidence is fixed into the tables first;
/// elimination follows the given order, or a min-degree order with
/// lexicographic tie-break when none is supplied. The result never depends on
/// the order.
inline Marginal ve_ground_with_order(const FactorGraph& g, const Query& query,
                                     const std::vector<std::string>& forced_order) {
  const auto& term_rv = g.rv(query.term);
  if (query.evidence.count(query.term)) {
    throw std::invalid_argument("query: term '" + query.term + "' has evidence");
  }
  validate_evidence(g, query.evidence);
  if (query.value) {
    const auto& range = term_rv.range;
    if (std::find(range.begin(), range.end(), *query.value) == range.end()) {
      throw std::invalid_argument("query: value '" + *query.value + "' not in range of '" +
                                  query.term + "'");
    }
  }

  std::vector<std::string> names;
  for (const auto& rv : g.rvs()) names.push_back(rv.name);
  std::sort(names.begin(), names.end());
  auto id_of = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::lower_bound(names.begin(), names.end(), name) - names.begin());
  };
  std::vector<std::size_t> universe_shape;
  for (const auto& n : names) universe_shape.push_back(g.rv(n).range.size());
  const std::size_t term_id = id_of(query.term);

  std::vector<detail::VeTable> tables;
  for (const auto& f : g.factors()) {
    detail::VeTable t;
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (id, original position)
    for (std::size_t i = 0; i < f.args.size(); ++i) slots.emplace_back(id_of(f.args[i]), i);
    std::sort(slots.begin(), slots.end());
    const auto shape = factor_shape(g, f);
    for (const auto& [id, pos] : slots) {
      t.vars.push_back(id);
      t.shape.push_back(shape[pos]);
    }
    t.vals.resize(f.table.size());
    std::vector<std::size_t> tuple(t.vars.size(), 0);
    std::vector<std::size_t> original(f.args.size());
    std::size_t idx = 0;
    do {
      for (std::size_t i = 0; i < slots.size(); ++i) original[slots[i].second] = tuple[i];
      t.vals[idx++] = f.table[tuple_index(shape, original)];
    } while (next_tuple(t.shape, tuple));

    std::vector<std::pair<std::size_t, std::size_t>> fixed;
    std::vector<std::size_t> kept_vars;
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
      const auto& rv_name = names[t.vars[i]];
      auto ev = query.evidence.find(rv_name);
      if (ev == query.evidence.end()) {
        kept_vars.push_back(t.vars[i]);
        continue;
      }
      const auto& range = g.rv(rv_name).range;
      const auto value_idx = static_cast<std::size_t>(
          std::find(range.begin(), range.end(), ev->second) - range.begin());
      fixed.emplace_back(i, value_idx);
    }
    detail::condition_slots(t.shape, t.vals, fixed);
    t.vars = std::move(kept_vars);
    tables.push_back(std::move(t));
  }

  std::set<std::size_t> to_eliminate;
  for (const auto& t : tables) {
    for (auto v : t.vars) {
      if (v != term_id) to_eliminate.insert(v);
    }
  }

  std::vector<std::size_t> order;
  if (!forced_order.empty()) {
    for (const auto& name : forced_order) {
      const auto id = id_of(name);
      if (!to_eliminate.count(id)) {
        throw std::invalid_argument("ve order: '" + name + "' is not an eliminable rv");
      }
      order.push_back(id);
    }
    if (order.size() != to_eliminate.size()) {
      throw std::invalid_argument("ve order: must cover every eliminable rv exactly once");
    }
  }

  std::size_t step = 0;
  while (!to_eliminate.empty()) {
    std::size_t victim;
    if (!order.empty()) {
      victim = order[step++];
    } else {
      // Min-degree; ids are in lexicographic name order, so the smallest id
      // breaks ties.
      std::size_t best_degree = 0;
      bool have = false;
      victim = 0;
      for (auto v : to_eliminate) {
        std::set<std::size_t> neighbours;
        for (const auto& t : tables) {
          if (!std::binary_search(t.vars.begin(), t.vars.end(), v)) continue;
          for (auto o : t.vars) {
            if (o != v) neighbours.insert(o);
          }
        }
        if (!have || neighbours.size() < best_degree) {
          have = true;
          best_degree = neighbours.size();
          victim = v;
        }
      }
    }
    to_eliminate.erase(victim);

    detail::VeTable product;
    bool started = false;
    std::vector<detail::VeTable> remaining;
    for (auto& t : tables) {
      if (std::binary_search(t.vars.begin(), t.vars.end(), victim)) {
        product = started ? detail::multiply(product, t, universe_shape) : std::move(t);
        started = true;
      } else {
        remaining.push_back(std::move(t));
      }
    }
    tables = std::move(remaining);
    if (started) tables.push_back(detail::sum_out(product, victim));
  }

  std::vector<Rational> weights(term_rv.range.size(), Rational(1));
  for (const auto& t : tables) {
    if (t.vars.empty()) {
      for (auto& w : weights) w *= t.vals[0];
    } else if (t.vars.size() == 1 && t.vars[0] == term_id) {
      for (std::size_t i = 0; i < weights.size(); ++i) weights[i] *= t.vals[i];
    } else {
      throw std::logic_error("ve: residual table over unexpected variables");
    }
  }
  return detail::normalise_over(term_rv.range, std::move(weights));
}

inline Marginal ve_ground(const FactorGraph& g, const Query& query) {
  return ve_ground_with_order(g, query, {});
}

// -- lifted variable elimination ----------------------------------------------

struct LveStats {
  std::size_t message_builds = 0;  // distinct message tables computed
  std::size_t power_ops = 0;       // entrywise powers applied for duplicates
  bool fell_back = false;
  std::string fallback_reason;
};

namespace detail {

struct LiftedFallback {
  std::string reason;
};

struct LiftedFactor {
  std::vector<std::size_t> shape;          // per slot
  std::vector<Rational> table;
  std::vector<std::vector<std::size_t>> instances;  // per instance: rv ids per slot
};

inline std::vector<Rational> entrywise_pow(const std::vector<Rational>& table, std::size_t exp) {
  std::vector<Rational> out;
  out.reserve(table.size());
  for (const auto& v : table) out.push_back(v.pow(static_cast<unsigned>(exp)));
  return out;
}

}  // namespace detail

/// Restricted lifted variable elimination over a parametric factor graph.
/// Ground RVs are eliminated class by class (classes start as the PRV groups;
/// the query term is split off). Within a class, the local message of each
/// member is computed once per structural signature and reused, and repeated
/// identical messages are combined as one entrywise power, so groups of
/// indistinguishable instances cost a constant number of table operations
/// regardless of their size. Any shape outside this fragment falls back to
/// ground variable elimination on the grounded model; the result is exact
/// either way.
inline Marginal lve_query(const ParametricFactorGraph& pfg, const Query& query,
                          LveStats* stats_out = nullptr) {
  LveStats stats;
  Marginal result;
  try {
    // Universe of ground RVs.
    std::vector<std::string> names;
    std::map<std::string, std::size_t> prv_of;
    for (std::size_t pi = 0; pi < pfg.prvs.size(); ++pi) {
      for (const auto& [constants, rv] : pfg.prvs[pi].grounding) {
        names.push_back(rv);
        prv_of[rv] = pi;
      }
    }
    std::sort(names.begin(), names.end());
    if (!prv_of.count(query.term)) {
      throw std::invalid_argument("query: term '" + query.term +
                                  "' absent from the pfg groundings");
    }
    if (query.evidence.count(query.term)) {
      throw std::invalid_argument("query: term '" + query.term + "' has evidence");
    }
    auto id_of = [&](const std::string& name) {
      auto it = std::lower_bound(names.begin(), names.end(), name);
      if (it == names.end() || *it != name) {
        throw std::invalid_argument("query: unknown rv '" + name + "'");
      }
      return static_cast<std::size_t>(it - names.begin());
    };
    const std::size_t n_rvs = names.size();
    std::vector<const std::vector<std::string>*> range_of(n_rvs);
    std::vector<std::size_t> class_of(n_rvs);
    for (std::size_t i = 0; i < n_rvs; ++i) {
      const auto& prv = pfg.prvs[prv_of.at(names[i])];
      range_of[i] = &prv.range;
      class_of[i] = prv_of.at(names[i]);
    }
    const std::size_t term_id = id_of(query.term);
    const std::size_t term_class = pfg.prvs.size();  // fresh singleton class
    class_of[term_id] = term_class;
    if (query.value) {
      const auto& range = *range_of[term_id];
      if (std::find(range.begin(), range.end(), *query.value) == range.end()) {
        throw std::invalid_argument("query: value '" + *query.value + "' not in range of '" +
                                    query.term + "'");
      }
    }

    // Evidence value indices.
    std::map<std::size_t, std::size_t> observed;
    for (const auto& [name, value] : query.evidence) {
      const auto id = id_of(name);
      const auto& range = *range_of[id];
      auto it = std::find(range.begin(), range.end(), value);
      if (it == range.end()) {
        throw std::invalid_argument("evidence: value '" + value + "' not in range of '" + name +
                                    "'");
      }
      observed[id] = static_cast<std::size_t>(it - range.begin());
    }

    // Lifted factors from parfactors, conditioned on evidence. Instances
    // whose observed slots differ get split apart, since their conditioned
    // tables differ.
    std::vector<detail::LiftedFactor> factors;
    for (const auto& pf : pfg.parfactors) {
      std::vector<std::size_t> shape;
      for (const auto& arg : pf.args) shape.push_back(pfg.prv(arg.prv).range.size());
      std::map<std::vector<std::pair<std::size_t, std::size_t>>,
               std::vector<std::vector<std::size_t>>>
          split;  // observed (slot, value) pattern -> instances (unobserved slot rvs)
      for (const auto& inst : pf.instances) {
        std::vector<std::size_t> slot_rvs;
        for (const auto& arg : pf.args) {
          std::vector<std::string> constants;
          for (const auto& symbol : arg.binding) constants.push_back(inst.bindings.at(symbol));
          slot_rvs.push_back(id_of(pfg.prv(arg.prv).ground(constants)));
        }
        std::vector<std::pair<std::size_t, std::size_t>> pattern;
        std::vector<std::size_t> kept;
        for (std::size_t k = 0; k < slot_rvs.size(); ++k) {
          auto ob = observed.find(slot_rvs[k]);
          if (ob != observed.end()) {
            pattern.emplace_back(k, ob->second);
          } else {
            kept.push_back(slot_rvs[k]);
          }
        }
        split[std::move(pattern)].push_back(std::move(kept));
      }
      for (auto& [pattern, instances] : split) {
        detail::LiftedFactor lf;
        lf.shape = shape;
        lf.table = pf.table;
        detail::condition_slots(lf.shape, lf.table, pattern);
        lf.instances = std::move(instances);
        factors.push_back(std::move(lf));
      }
    }

    // Eliminate every class with factor presence except the query's. The
    // victim is the cheapest eligible class, measured by the largest local
    // message table any of its members would need; a class whose members
    // appear twice in one instance is not eliminable in this fragment.
    while (true) {
      std::set<std::size_t> present;
      for (const auto& lf : factors) {
        for (const auto& inst : lf.instances) {
          for (auto rv : inst) present.insert(class_of[rv]);
        }
      }
      present.erase(term_class);
      if (present.empty()) break;

      constexpr std::size_t kCellCap = std::size_t(1) << 20;
      std::size_t victim = 0;
      std::size_t best_cells = 0;
      std::string best_key;
      bool have = false;
      std::string blocked_reason;
      for (auto c : present) {
        bool eligible = true;
        std::string key;
        std::map<std::size_t, std::set<std::size_t>> others_of;  // member -> other rvs
        for (const auto& lf : factors) {
          for (const auto& inst : lf.instances) {
            std::size_t hits = 0, member = 0;
            for (auto rv : inst) {
              if (class_of[rv] == c) {
                ++hits;
                member = rv;
              }
            }
            if (hits == 0) continue;
            if (hits > 1) {
              eligible = false;
              if (blocked_reason.empty()) {
                blocked_reason = "instance couples two members of one class";
              }
              break;
            }
            if (key.empty() || names[member] < key) key = names[member];
            for (auto rv : inst) {
              if (rv != member) others_of[member].insert(rv);
            }
          }
          if (!eligible) break;
        }
        if (!eligible) continue;
        std::size_t cells = 0;
        for (const auto& [member, others] : others_of) {
          std::size_t local = range_of[member]->size();
          for (auto rv : others) {
            local = local > kCellCap / range_of[rv]->size() ? kCellCap + 1
                                                            : local * range_of[rv]->size();
          }
          cells = std::max(cells, local);
        }
        if (cells > kCellCap) {
          if (blocked_reason.empty()) blocked_reason = "message table too large";
          continue;
        }
        if (!have ||
            std::make_pair(cells, key) < std::make_pair(best_cells, best_key)) {
          have = true;
          victim = c;
          best_cells = cells;
          best_key = key;
        }
      }
      if (!have) {
        throw detail::LiftedFallback{
            blocked_reason.empty() ? "no eliminable class" : blocked_reason};
      }

      // Bundle the instances by their class member.
      struct Item {
        std::size_t factor, instance, vslot;
      };
      std::map<std::size_t, std::vector<Item>> bundles;  // rv id -> items
      for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        for (std::size_t ii = 0; ii < factors[fi].instances.size(); ++ii) {
          const auto& inst = factors[fi].instances[ii];
          std::size_t hits = 0, slot = 0;
          for (std::size_t k = 0; k < inst.size(); ++k) {
            if (class_of[inst[k]] == victim) {
              ++hits;
              slot = k;
            }
          }
          if (hits == 0) continue;
          if (hits > 1) {
            throw detail::LiftedFallback{"instance couples two members of one class"};
          }
          bundles[inst[slot]].push_back({fi, ii, slot});
        }
      }

      // Per-bundle messages, computed once per structural signature.
      using Signature = std::vector<std::tuple<std::size_t, std::size_t, std::vector<int>>>;
      std::map<Signature, std::size_t> message_of;
      struct Message {
        std::vector<std::size_t> shape;  // per pattern var
        std::vector<Rational> table;
      };
      std::vector<Message> messages;
      // message idx -> list of other-rv tuples it attaches to
      std::vector<std::vector<std::vector<std::size_t>>> attachments;

      std::vector<char> consumed_factor_instance;  // rebuilt below
      std::vector<std::vector<char>> consumed(factors.size());
      for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        consumed[fi].assign(factors[fi].instances.size(), 0);
      }

      for (auto& [v, items] : bundles) {
        std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
          return std::make_tuple(a.factor, a.vslot,
                                 factors[a.factor].instances[a.instance]) <
                 std::make_tuple(b.factor, b.vslot, factors[b.factor].instances[b.instance]);
        });
        Signature sig;
        std::vector<std::size_t> pattern_rvs;  // pattern id -> rv
        for (const auto& item : items) {
          const auto& inst = factors[item.factor].instances[item.instance];
          std::vector<int> pattern(inst.size());
          for (std::size_t k = 0; k < inst.size(); ++k) {
            if (k == item.vslot) {
              pattern[k] = -1;
              continue;
            }
            auto it = std::find(pattern_rvs.begin(), pattern_rvs.end(), inst[k]);
            if (it == pattern_rvs.end()) {
              pattern_rvs.push_back(inst[k]);
              it = pattern_rvs.end() - 1;
            }
            pattern[k] = static_cast<int>(it - pattern_rvs.begin());
          }
          sig.emplace_back(item.factor, item.vslot, std::move(pattern));
          consumed[item.factor][item.instance] = 1;
        }

        auto found = message_of.find(sig);
        std::size_t msg_idx;
        if (found != message_of.end()) {
          msg_idx = found->second;
        } else {
          Message msg;
          for (auto rv : pattern_rvs) msg.shape.push_back(range_of[rv]->size());
          const std::size_t v_size = range_of[v]->size();
          if (table_size(msg.shape) > (std::size_t(1) << 20)) {
            throw detail::LiftedFallback{"message table too large"};
          }
          msg.table.assign(table_size(msg.shape), Rational(0));
          std::vector<std::size_t> outer(msg.shape.size(), 0);
          std::vector<std::size_t> local;
          std::size_t out_idx = 0;
          do {
            Rational sum(0);
            for (std::size_t vv = 0; vv < v_size; ++vv) {
              Rational prod(1);
              for (const auto& [fi, vslot, pattern] : sig) {
                local.clear();
                for (std::size_t k = 0; k < pattern.size(); ++k) {
                  local.push_back(pattern[k] < 0 ? vv
                                                 : outer[static_cast<std::size_t>(pattern[k])]);
                }
                prod *= factors[fi].table[tuple_index(factors[fi].shape, local)];
              }
              sum += prod;
            }
            msg.table[out_idx++] = std::move(sum);
          } while (!msg.shape.empty() && next_tuple(msg.shape, outer));
          msg_idx = messages.size();
          messages.push_back(std::move(msg));
          attachments.emplace_back();
          message_of.emplace(std::move(sig), msg_idx);
          ++stats.message_builds;
        }
        attachments[msg_idx].push_back(pattern_rvs);
      }

      // Drop consumed instances; keep untouched ones.
      std::vector<detail::LiftedFactor> next_factors;
      for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        detail::LiftedFactor kept;
        kept.shape = factors[fi].shape;
        kept.table = factors[fi].table;
        for (std::size_t ii = 0; ii < factors[fi].instances.size(); ++ii) {
          if (!consumed[fi][ii]) kept.instances.push_back(factors[fi].instances[ii]);
        }
        if (!kept.instances.empty()) next_factors.push_back(std::move(kept));
      }

      // Attach messages: identical tuples under one message collapse into a
      // single instance with an entrywise power.
      for (std::size_t mi = 0; mi < messages.size(); ++mi) {
        std::map<std::vector<std::size_t>, std::size_t> multiplicity;
        for (const auto& tuple : attachments[mi]) ++multiplicity[tuple];
        std::map<std::size_t, detail::LiftedFactor> by_count;
        for (const auto& [tuple, count] : multiplicity) {
          auto& lf = by_count[count];
          if (lf.instances.empty()) {
            lf.shape = messages[mi].shape;
            if (count == 1) {
              lf.table = messages[mi].table;
            } else {
              lf.table = detail::entrywise_pow(messages[mi].table, count);
              ++stats.power_ops;
            }
          }
          lf.instances.push_back(tuple);
        }
        for (auto& [count, lf] : by_count) next_factors.push_back(std::move(lf));
      }
      factors = std::move(next_factors);
    }

    // Everything left mentions only the query term.
    const auto& term_range = *range_of[term_id];
    std::vector<Rational> weights(term_range.size(), Rational(1));
    for (const auto& lf : factors) {
      std::size_t over_term = 0, scalars = 0;
      for (const auto& inst : lf.instances) {
        if (inst.empty()) {
          ++scalars;
        } else if (inst.size() == 1 && inst[0] == term_id) {
          ++over_term;
        } else {
          throw std::logic_error("lve: residual instance over unexpected rvs");
        }
      }
      if (over_term > 0) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
          weights[i] *= lf.table[i].pow(static_cast<unsigned>(over_term));
        }
      }
      if (scalars > 0) {
        const Rational s = lf.table[0].pow(static_cast<unsigned>(scalars));
        for (auto& w : weights) w *= s;
      }
    }
    result = detail::normalise_over(term_range, std::move(weights));
  } catch (const detail::LiftedFallback& fb) {
    stats.fell_back = true;
    stats.fallback_reason = fb.reason;
    result = ve_ground(ground_pfg(pfg), query);
  }
  if (stats_out) *stats_out = stats;
  return result;
}

}  // namespace liftfg
