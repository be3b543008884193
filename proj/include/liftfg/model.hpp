#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liftfg/rational.hpp"

namespace liftfg {

/// A random variable with an ordered range of at least two distinct values.
/// Range order is significant: it fixes the table layout and is part of the
/// variable's identity when grouping.
struct RandomVariable {
  std::string name;
  std::vector<std::string> range;

  friend bool operator==(const RandomVariable&, const RandomVariable&) = default;
};

/// A factor over an ordered argument list. The table is dense, in odometer
/// order with the first argument varying slowest, and every entry positive.
struct Factor {
  std::string name;
  std::vector<std::string> args;
  std::vector<Rational> table;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Observed values, at most one per random variable.
using Evidence = std::map<std::string, std::string>;

class FactorGraph {
 public:
  void add_rv(RandomVariable rv) {
    if (rv.name.empty()) throw std::invalid_argument("rv: empty name");
    if (rv_index_.count(rv.name)) {
      throw std::invalid_argument("rv '" + rv.name + "': duplicate name");
    }
    if (rv.range.size() < 2) {
      throw std::invalid_argument("rv '" + rv.name + "': range needs at least two values");
    }
    for (std::size_t i = 0; i < rv.range.size(); ++i) {
      if (rv.range[i].empty()) {
        throw std::invalid_argument("rv '" + rv.name + "': empty range value");
      }
      for (std::size_t j = i + 1; j < rv.range.size(); ++j) {
        if (rv.range[i] == rv.range[j]) {
          throw std::invalid_argument("rv '" + rv.name + "': duplicate range value '" +
                                      rv.range[i] + "'");
        }
      }
    }
    rv_index_.emplace(rv.name, rvs_.size());
    rvs_.push_back(std::move(rv));
  }

  void add_factor(Factor f) {
    if (f.name.empty()) throw std::invalid_argument("factor: empty name");
    if (factor_index_.count(f.name)) {
      throw std::invalid_argument("factor '" + f.name + "': duplicate name");
    }
    if (f.args.empty()) {
      throw std::invalid_argument("factor '" + f.name + "': needs at least one argument");
    }
    std::size_t cells = 1;
    for (std::size_t i = 0; i < f.args.size(); ++i) {
      auto it = rv_index_.find(f.args[i]);
      if (it == rv_index_.end()) {
        throw std::invalid_argument("factor '" + f.name + "': unknown rv '" + f.args[i] + "'");
      }
      for (std::size_t j = i + 1; j < f.args.size(); ++j) {
        if (f.args[i] == f.args[j]) {
          throw std::invalid_argument("factor '" + f.name + "': duplicate argument '" +
                                      f.args[i] + "'");
        }
      }
      cells *= rvs_[it->second].range.size();
    }
    if (f.table.size() != cells) {
      throw std::invalid_argument("factor '" + f.name + "': table length " +
                                  std::to_string(f.table.size()) + ", expected " +
                                  std::to_string(cells));
    }
    for (const auto& v : f.table) {
      if (!v.is_positive()) {
        throw std::invalid_argument("factor '" + f.name + "': non-positive potential " + v.str());
      }
    }
    factor_index_.emplace(f.name, factors_.size());
    factors_.push_back(std::move(f));
  }

  const std::vector<RandomVariable>& rvs() const { return rvs_; }
  const std::vector<Factor>& factors() const { return factors_; }

  bool has_rv(const std::string& name) const { return rv_index_.count(name) != 0; }
  bool has_factor(const std::string& name) const { return factor_index_.count(name) != 0; }

  const RandomVariable& rv(const std::string& name) const {
    auto it = rv_index_.find(name);
    if (it == rv_index_.end()) throw std::invalid_argument("unknown rv '" + name + "'");
    return rvs_[it->second];
  }

  const Factor& factor(const std::string& name) const {
    auto it = factor_index_.find(name);
    if (it == factor_index_.end()) throw std::invalid_argument("unknown factor '" + name + "'");
    return factors_[it->second];
  }

  friend bool operator==(const FactorGraph& a, const FactorGraph& b) {
    return a.rvs_ == b.rvs_ && a.factors_ == b.factors_;
  }

 private:
  std::vector<RandomVariable> rvs_;
  std::vector<Factor> factors_;
  std::map<std::string, std::size_t> rv_index_;
  std::map<std::string, std::size_t> factor_index_;
};

// -- dense table indexing -----------------------------------------------------

/// Range sizes of a factor's arguments, in argument order.
inline std::vector<std::size_t> factor_shape(const FactorGraph& g, const Factor& f) {
  std::vector<std::size_t> shape;
  shape.reserve(f.args.size());
  for (const auto& a : f.args) shape.push_back(g.rv(a).range.size());
  return shape;
}

/// Odometer index of a tuple of per-position value indices: first position
/// varies slowest, last fastest.
inline std::size_t tuple_index(const std::vector<std::size_t>& shape,
                               const std::vector<std::size_t>& tuple) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) idx = idx * shape[i] + tuple[i];
  return idx;
}

inline std::vector<std::size_t> index_tuple(const std::vector<std::size_t>& shape,
                                            std::size_t idx) {
  std::vector<std::size_t> tuple(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    tuple[i] = idx % shape[i];
    idx /= shape[i];
  }
  return tuple;
}

/// Advances a tuple to the next assignment in odometer order; false on wrap.
inline bool next_tuple(const std::vector<std::size_t>& shape, std::vector<std::size_t>& tuple) {
  for (std::size_t i = shape.size(); i-- > 0;) {
    if (++tuple[i] < shape[i]) return true;
    tuple[i] = 0;
  }
  return false;
}

inline std::size_t table_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

/// Index of one assignment (as range-value labels per argument) in a factor's
/// dense table.
inline std::size_t assignment_index(const FactorGraph& g, const Factor& f,
                                    std::span<const std::string> values) {
  if (values.size() != f.args.size()) {
    throw std::invalid_argument("factor '" + f.name + "': expected " +
                                std::to_string(f.args.size()) + " values, got " +
                                std::to_string(values.size()));
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    const auto& range = g.rv(f.args[i]).range;
    auto pos = std::find(range.begin(), range.end(), values[i]);
    if (pos == range.end()) {
      throw std::invalid_argument("factor '" + f.name + "': value '" + values[i] +
                                  "' not in range of '" + f.args[i] + "'");
    }
    idx = idx * range.size() + static_cast<std::size_t>(pos - range.begin());
  }
  return idx;
}

/// Inverse of assignment_index.
inline std::vector<std::string> index_assignment(const FactorGraph& g, const Factor& f,
                                                 std::size_t idx) {
  const auto shape = factor_shape(g, f);
  if (idx >= table_size(shape)) {
    throw std::invalid_argument("factor '" + f.name + "': index out of bounds");
  }
  const auto tuple = index_tuple(shape, idx);
  std::vector<std::string> values(f.args.size());
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    values[i] = g.rv(f.args[i]).range[tuple[i]];
  }
  return values;
}

// -- joint semantics ----------------------------------------------------------

/// Unnormalised product of all factor potentials at one full assignment.
inline Rational joint_weight(const FactorGraph& g,
                             const std::map<std::string, std::string>& assignment) {
  for (const auto& rv : g.rvs()) {
    if (!assignment.count(rv.name)) {
      throw std::invalid_argument("joint_weight: missing rv '" + rv.name + "'");
    }
  }
  Rational w(1);
  std::vector<std::string> values;
  for (const auto& f : g.factors()) {
    values.clear();
    for (const auto& a : f.args) values.push_back(assignment.at(a));
    w *= f.table[assignment_index(g, f, values)];
  }
  return w;
}

/// Exact joint distribution obtained by full enumeration. Only an oracle and
/// verification device; inference goes through variable elimination.
struct JointDistribution {
  std::vector<std::string> rv_names;  // sorted
  std::vector<std::size_t> shape;
  Rational z;
  std::vector<Rational> probabilities;  // odometer order over rv_names

  Rational probability(const std::map<std::string, std::string>& assignment,
                       const FactorGraph& g) const {
    std::vector<std::size_t> tuple(rv_names.size());
    for (std::size_t i = 0; i < rv_names.size(); ++i) {
      const auto& range = g.rv(rv_names[i]).range;
      auto it = std::find(range.begin(), range.end(), assignment.at(rv_names[i]));
      if (it == range.end()) {
        throw std::invalid_argument("probability: value not in range of '" + rv_names[i] + "'");
      }
      tuple[i] = static_cast<std::size_t>(it - range.begin());
    }
    return probabilities[tuple_index(shape, tuple)];
  }

  friend bool operator==(const JointDistribution&, const JointDistribution&) = default;
};

inline JointDistribution normalise(const FactorGraph& g,
                                   std::size_t max_states = std::size_t(1) << 22) {
  JointDistribution dist;
  for (const auto& rv : g.rvs()) dist.rv_names.push_back(rv.name);
  std::sort(dist.rv_names.begin(), dist.rv_names.end());

  std::size_t states = 1;
  for (const auto& name : dist.rv_names) {
    const std::size_t size = g.rv(name).range.size();
    if (states > max_states / size) {
      throw std::invalid_argument("normalise: state space exceeds bound of " +
                                  std::to_string(max_states) + " states");
    }
    states *= size;
    dist.shape.push_back(size);
  }

  // Per factor: position of each argument in the sorted rv order.
  struct Slot {
    const Factor* f;
    std::vector<std::size_t> arg_pos;
    std::vector<std::size_t> shape;
  };
  std::vector<Slot> slots;
  for (const auto& f : g.factors()) {
    Slot s{&f, {}, factor_shape(g, f)};
    for (const auto& a : f.args) {
      auto it = std::lower_bound(dist.rv_names.begin(), dist.rv_names.end(), a);
      s.arg_pos.push_back(static_cast<std::size_t>(it - dist.rv_names.begin()));
    }
    slots.push_back(std::move(s));
  }

  dist.probabilities.reserve(states);
  std::vector<std::size_t> tuple(dist.rv_names.size(), 0);
  std::vector<std::size_t> local;
  dist.z = Rational(0);
  do {
    Rational w(1);
    for (const auto& s : slots) {
      local.clear();
      for (auto p : s.arg_pos) local.push_back(tuple[p]);
      w *= s.f->table[tuple_index(s.shape, local)];
    }
    dist.z += w;
    dist.probabilities.push_back(std::move(w));
  } while (next_tuple(dist.shape, tuple));

  if (dist.z.is_zero()) {
    // Unreachable for valid graphs: potentials are positive.
    throw std::logic_error("normalise: zero partition function");
  }
  for (auto& p : dist.probabilities) p /= dist.z;
  return dist;
}

/// Returns a copy of the graph with one factor's table scaled entrywise.
/// Scaling never changes the normalised distribution.
inline FactorGraph scale_factor(const FactorGraph& g, const std::string& factor_name,
                                const Rational& alpha) {
  if (!alpha.is_positive()) {
    throw std::invalid_argument("scale_factor: alpha must be positive, got " + alpha.str());
  }
  if (!g.has_factor(factor_name)) {
    throw std::invalid_argument("scale_factor: unknown factor '" + factor_name + "'");
  }
  FactorGraph out;
  for (const auto& rv : g.rvs()) out.add_rv(rv);
  for (const auto& f : g.factors()) {
    Factor copy = f;
    if (f.name == factor_name) {
      for (auto& v : copy.table) v *= alpha;
    }
    out.add_factor(std::move(copy));
  }
  return out;
}

inline void validate_evidence(const FactorGraph& g, const Evidence& evidence) {
  for (const auto& [name, value] : evidence) {
    const auto& range = g.rv(name).range;
    if (std::find(range.begin(), range.end(), value) == range.end()) {
      throw std::invalid_argument("evidence: value '" + value + "' not in range of '" + name +
                                  "'");
    }
  }
}

}  // namespace liftfg
