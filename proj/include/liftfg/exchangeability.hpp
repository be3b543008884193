#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liftfg/model.hpp"

namespace liftfg {

/// A factor with its argument ranges resolved, so it can be compared across
/// graphs. All detection routines operate on this view.
struct FactorTable {
  std::string name;
  std::vector<std::string> args;
  std::vector<std::vector<std::string>> ranges;  // per argument, ordered
  std::vector<Rational> table;

  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> s;
    s.reserve(ranges.size());
    for (const auto& r : ranges) s.push_back(r.size());
    return s;
  }

  std::size_t arity() const { return args.size(); }

  friend bool operator==(const FactorTable&, const FactorTable&) = default;
};

inline FactorTable resolve(const FactorGraph& g, const Factor& f) {
  FactorTable t;
  t.name = f.name;
  t.args = f.args;
  for (const auto& a : f.args) t.ranges.push_back(g.rv(a).range);
  t.table = f.table;
  return t;
}

inline FactorTable resolve(const FactorGraph& g, const std::string& factor_name) {
  return resolve(g, g.factor(factor_name));
}

/// Proof that phi1(a) = alpha * phi2(a o perm) for every assignment a over
/// phi1's argument ranges; perm[k] names the position of phi1's argument that
/// feeds slot k of phi2.
struct ExchangeabilityWitness {
  Rational alpha;
  std::vector<std::size_t> perm;

  friend bool operator==(const ExchangeabilityWitness&, const ExchangeabilityWitness&) = default;
};

namespace detail {

inline bool is_permutation_of_indices(const std::vector<std::size_t>& perm) {
  std::vector<char> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

/// Same arity and same multiset of ranges (value order included).
inline bool same_function_domain(const FactorTable& a, const FactorTable& b) {
  if (a.arity() != b.arity()) return false;
  auto ra = a.ranges;
  auto rb = b.ranges;
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  return ra == rb;
}

}  // namespace detail

inline bool witness_valid(const FactorTable& phi1, const FactorTable& phi2,
                          const ExchangeabilityWitness& w) {
  if (phi1.arity() != phi2.arity() || w.perm.size() != phi1.arity()) return false;
  if (!w.alpha.is_positive()) return false;
  if (!detail::is_permutation_of_indices(w.perm)) return false;
  for (std::size_t k = 0; k < w.perm.size(); ++k) {
    if (phi2.ranges[k] != phi1.ranges[w.perm[k]]) return false;
  }
  const auto shape1 = phi1.shape();
  const auto shape2 = phi2.shape();
  std::vector<std::size_t> tuple(phi1.arity(), 0);
  std::vector<std::size_t> fed(phi1.arity());
  std::size_t idx1 = 0;
  do {
    for (std::size_t k = 0; k < w.perm.size(); ++k) fed[k] = tuple[w.perm[k]];
    if (phi1.table[idx1] != w.alpha * phi2.table[tuple_index(shape2, fed)]) return false;
    ++idx1;
  } while (next_tuple(shape1, tuple));
  return true;
}

/// Reorders arguments so that slot k of the result holds phi.args[perm[k]].
/// With a witness (alpha, perm) against a reference factor, the result's
/// table equals alpha times the reference table, entry for entry.
inline FactorTable align_factor(const FactorTable& phi, const std::vector<std::size_t>& perm) {
  if (perm.size() != phi.arity() || !detail::is_permutation_of_indices(perm)) {
    throw std::invalid_argument("align_factor: bad permutation for '" + phi.name + "'");
  }
  FactorTable out;
  out.name = phi.name;
  out.args.resize(phi.arity());
  out.ranges.resize(phi.arity());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out.args[k] = phi.args[perm[k]];
    out.ranges[k] = phi.ranges[perm[k]];
  }
  const auto in_shape = phi.shape();
  const auto out_shape = out.shape();
  out.table.resize(phi.table.size());
  std::vector<std::size_t> b(phi.arity(), 0);
  std::vector<std::size_t> a(phi.arity());
  std::size_t out_idx = 0;
  do {
    for (std::size_t k = 0; k < perm.size(); ++k) a[perm[k]] = b[k];
    out.table[out_idx++] = phi.table[tuple_index(in_shape, a)];
  } while (next_tuple(out_shape, b));
  return out;
}

// -- collinearity -------------------------------------------------------------

/// Exact collinearity of two positive vectors, decided purely by
/// cross-multiplication: v1[i]*v2[0] == v1[0]*v2[i] for all i. Returns the
/// scalar v1[0]/v2[0] on success.
inline std::optional<Rational> collinear_exact(const std::vector<Rational>& v1,
                                               const std::vector<Rational>& v2) {
  if (v1.size() != v2.size()) {
    throw std::invalid_argument("collinear_exact: length mismatch");
  }
  if (v1.empty()) {
    throw std::invalid_argument("collinear_exact: empty vectors");
  }
  for (std::size_t i = 1; i < v1.size(); ++i) {
    if (v1[i] * v2[0] != v1[0] * v2[i]) return std::nullopt;
  }
  return v1[0] / v2[0];
}

/// Interval test behind approx_collinear, templated over the integer type so
/// tests can audit that the decision path performs no division. Checks, for
/// epsilon = p/q:
///   v1[i]*v2[0]*q >= v1[0]*v2[i]*q - v1[0]*v2[i]*p  and
///   v1[i]*v2[0]*q <= v1[0]*v2[i]*q + v1[0]*v2[i]*p.
template <typename Int>
bool approx_collinear_scaled(const std::vector<Int>& v1, const std::vector<Int>& v2,
                             const Int& p, const Int& q) {
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const Int lhs = v1[i] * v2[0] * q;
    const Int base = v1[0] * v2[i] * q;
    const Int slack = v1[0] * v2[i] * p;
    if (lhs < base - slack || lhs > base + slack) return false;
  }
  return true;
}

/// Relaxed collinearity with rational tolerance epsilon in [0, 1]. Inputs are
/// scaled to integer vectors by their denominators' lcm (a positive rescale
/// leaves the inequalities unchanged), then decided with multiplications and
/// comparisons only. epsilon = 0 coincides with collinear_exact.
inline bool approx_collinear(const std::vector<Rational>& v1, const std::vector<Rational>& v2,
                             const Rational& epsilon) {
  if (v1.size() != v2.size()) {
    throw std::invalid_argument("approx_collinear: length mismatch");
  }
  if (v1.empty()) {
    throw std::invalid_argument("approx_collinear: empty vectors");
  }
  if (epsilon < Rational(0) || epsilon > Rational(1)) {
    throw std::invalid_argument("approx_collinear: epsilon must lie in [0, 1], got " +
                                epsilon.str());
  }
  auto to_integers = [](const std::vector<Rational>& v) {
    BigInt common(1);
    for (const auto& x : v) common = boost::multiprecision::lcm(common, x.denominator());
    std::vector<BigInt> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x.numerator() * (common / x.denominator()));
    return out;
  };
  return approx_collinear_scaled(to_integers(v1), to_integers(v2), epsilon.numerator(),
                                 epsilon.denominator());
}

/// Cosine distance between the factors' table vectors; infinity when the
/// function domains differ. Collinear tables report exactly zero; otherwise
/// the value is evaluated in floating point. Diagnostics only.
inline double cosine_distance(const FactorTable& phi1, const FactorTable& phi2) {
  if (!detail::same_function_domain(phi1, phi2)) {
    return std::numeric_limits<double>::infinity();
  }
  Rational dot(0), s1(0), s2(0);
  for (std::size_t i = 0; i < phi1.table.size(); ++i) {
    dot += phi1.table[i] * phi2.table[i];
    s1 += phi1.table[i] * phi1.table[i];
    s2 += phi2.table[i] * phi2.table[i];
  }
  const Rational ratio = (dot * dot) / (s1 * s2);  // = cos^2 of the angle
  if (ratio == Rational(1)) return 0.0;
  return 1.0 - std::sqrt(ratio.to_double());
}

// -- buckets ------------------------------------------------------------------

/// One histogram per range group: entry j counts how often the group's j-th
/// range value occurs in an assignment, restricted to that group's positions.
using BucketKey = std::vector<std::vector<std::size_t>>;

struct BucketTable {
  // Argument positions partitioned into maximal groups of identical range,
  // groups in a canonical order (sorted by range content).
  std::vector<std::vector<std::size_t>> groups;
  std::vector<BucketKey> keys;                   // sorted
  std::vector<std::vector<std::size_t>> cells;   // per bucket, table indices ascending

  std::vector<Rational> potentials(const FactorTable& phi, std::size_t bucket) const {
    std::vector<Rational> out;
    out.reserve(cells[bucket].size());
    for (auto c : cells[bucket]) out.push_back(phi.table[c]);
    return out;
  }
};

inline BucketTable buckets(const FactorTable& phi) {
  BucketTable bt;
  // Group argument positions by identical range; ranges are distinct across
  // maximal groups, so sorting by range content gives a canonical group order.
  std::map<std::vector<std::string>, std::vector<std::size_t>> by_range;
  for (std::size_t i = 0; i < phi.arity(); ++i) by_range[phi.ranges[i]].push_back(i);
  std::vector<std::size_t> group_of(phi.arity());
  std::vector<std::size_t> group_range_size;
  for (const auto& [range, positions] : by_range) {
    for (auto p : positions) group_of[p] = bt.groups.size();
    bt.groups.push_back(positions);
    group_range_size.push_back(range.size());
  }

  const auto shape = phi.shape();
  std::map<BucketKey, std::vector<std::size_t>> cells_by_key;
  std::vector<std::size_t> tuple(phi.arity(), 0);
  std::size_t idx = 0;
  do {
    BucketKey key(bt.groups.size());
    for (std::size_t gi = 0; gi < bt.groups.size(); ++gi) {
      key[gi].assign(group_range_size[gi], 0);
    }
    for (std::size_t pos = 0; pos < phi.arity(); ++pos) {
      ++key[group_of[pos]][tuple[pos]];
    }
    cells_by_key[std::move(key)].push_back(idx);
    ++idx;
  } while (!shape.empty() && next_tuple(shape, tuple));

  for (auto& [key, cell_list] : cells_by_key) {
    bt.keys.push_back(key);
    bt.cells.push_back(std::move(cell_list));
  }
  return bt;
}

// -- detection ----------------------------------------------------------------

namespace detail {

/// Enumerates permutations consistent with per-slot candidate sets in
/// lexicographic order, calling visit(perm) until it returns true.
inline bool enumerate_permutations(const std::vector<std::vector<std::size_t>>& candidates,
                                   std::vector<std::size_t>& perm, std::vector<char>& used,
                                   std::size_t slot, const auto& visit) {
  if (slot == candidates.size()) return visit(perm);
  for (auto l : candidates[slot]) {
    if (used[l]) continue;
    used[l] = 1;
    perm[slot] = l;
    if (enumerate_permutations(candidates, perm, used, slot + 1, visit)) return true;
    used[l] = 0;
  }
  return false;
}

}  // namespace detail

/// Bucket-pruned detection of exchangeability. The scalar hypothesis comes
/// from the per-bucket maxima and must agree across buckets; candidate
/// argument swaps are narrowed per bucket from the positions of scalar-matched
/// potentials; surviving permutations are verified exactly against the full
/// tables. Absence of a witness is a regular result.
inline std::optional<ExchangeabilityWitness> detect_exchangeable(const FactorTable& phi1,
                                                                 const FactorTable& phi2) {
  if (!detail::same_function_domain(phi1, phi2)) return std::nullopt;
  const std::size_t n = phi1.arity();

  const BucketTable b1 = buckets(phi1);
  const BucketTable b2 = buckets(phi2);
  if (b1.keys != b2.keys) return std::nullopt;

  // Scalar hypothesis: ratio of bucket maxima, identical for every bucket.
  std::optional<Rational> alpha;
  for (std::size_t b = 0; b < b1.keys.size(); ++b) {
    const auto p1 = b1.potentials(phi1, b);
    const auto p2 = b2.potentials(phi2, b);
    const Rational ratio =
        *std::max_element(p1.begin(), p1.end()) / *std::max_element(p2.begin(), p2.end());
    if (!alpha) {
      alpha = ratio;
    } else if (*alpha != ratio) {
      return std::nullopt;
    }
  }

  const auto shape1 = phi1.shape();
  const auto shape2 = phi2.shape();

  // Candidate swap sets: slot k of phi2 may take phi1's position l only if in
  // every bucket, each phi1 cell has a scalar-matched phi2 cell whose value at
  // k agrees with the phi1 cell's value at l.
  std::vector<std::vector<std::size_t>> candidates(n);
  {
    std::vector<std::vector<char>> allowed(n, std::vector<char>(n, 0));
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        allowed[k][l] = phi2.ranges[k] == phi1.ranges[l];
      }
    }
    for (std::size_t b = 0; b < b1.keys.size(); ++b) {
      const auto& cells1 = b1.cells[b];
      const auto& cells2 = b2.cells[b];
      std::vector<std::vector<std::size_t>> t1, t2;
      for (auto c : cells1) t1.push_back(index_tuple(shape1, c));
      for (auto c : cells2) t2.push_back(index_tuple(shape2, c));
      // Scalar-match matrix within the bucket.
      std::vector<std::vector<char>> match(cells1.size(), std::vector<char>(cells2.size(), 0));
      for (std::size_t i = 0; i < cells1.size(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < cells2.size(); ++j) {
          match[i][j] = phi1.table[cells1[i]] == *alpha * phi2.table[cells2[j]];
          any = any || match[i][j];
        }
        if (!any) return std::nullopt;
      }
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          if (!allowed[k][l]) continue;
          for (std::size_t i = 0; i < cells1.size() && allowed[k][l]; ++i) {
            bool ok = false;
            for (std::size_t j = 0; j < cells2.size(); ++j) {
              if (match[i][j] && t2[j][k] == t1[i][l]) {
                ok = true;
                break;
              }
            }
            if (!ok) allowed[k][l] = 0;
          }
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        if (allowed[k][l]) candidates[k].push_back(l);
      }
      if (candidates[k].empty()) return std::nullopt;
    }
  }

  // Verify surviving permutations; the lexicographically smallest valid one
  // wins, which keeps grouping deterministic.
  ExchangeabilityWitness w;
  w.alpha = *alpha;
  w.perm.assign(n, 0);
  std::vector<char> used(n, 0);
  const bool found = detail::enumerate_permutations(
      candidates, w.perm, used, 0, [&](const std::vector<std::size_t>& perm) {
        ExchangeabilityWitness candidate{*alpha, perm};
        return witness_valid(phi1, phi2, candidate);
      });
  if (!found) return std::nullopt;
  return w;
}

/// Factorial-time baseline: tries every argument permutation in lexicographic
/// order and checks collinearity of the permuted table. Serves as the
/// independent oracle for detect_exchangeable.
inline std::optional<ExchangeabilityWitness> brute_force_exchangeable(const FactorTable& phi1,
                                                                      const FactorTable& phi2) {
  if (phi1.arity() > 8 || phi2.arity() > 8) {
    throw std::invalid_argument("brute_force_exchangeable: arity too large (max 8)");
  }
  if (!detail::same_function_domain(phi1, phi2)) return std::nullopt;
  const std::size_t n = phi1.arity();
  const auto shape1 = phi1.shape();
  const auto shape2 = phi2.shape();

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool typed = true;
    for (std::size_t k = 0; k < n && typed; ++k) {
      typed = phi2.ranges[k] == phi1.ranges[perm[k]];
    }
    if (!typed) continue;
    // Permuted phi2 table in phi1's assignment order.
    std::vector<Rational> permuted(phi2.table.size());
    std::vector<std::size_t> tuple(n, 0);
    std::vector<std::size_t> fed(n);
    std::size_t idx = 0;
    do {
      for (std::size_t k = 0; k < n; ++k) fed[k] = tuple[perm[k]];
      permuted[idx++] = phi2.table[tuple_index(shape2, fed)];
    } while (next_tuple(shape1, tuple));
    if (auto alpha = collinear_exact(phi1.table, permuted)) {
      return ExchangeabilityWitness{*alpha, perm};
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

// -- commutativity ------------------------------------------------------------

/// True iff the potential is invariant under every permutation of the values
/// at the given positions. Transposition invariance composes, so checking all
/// position pairs decides the full symmetric group.
inline bool is_commutative(const FactorTable& phi, const std::vector<std::size_t>& positions) {
  for (auto p : positions) {
    if (p >= phi.arity()) throw std::invalid_argument("is_commutative: position out of range");
    if (phi.ranges[p] != phi.ranges[positions[0]]) {
      throw std::invalid_argument("is_commutative: mixed ranges in position set");
    }
  }
  if (positions.size() <= 1) return true;
  const auto shape = phi.shape();
  for (std::size_t a = 0; a < positions.size(); ++a) {
    for (std::size_t b = a + 1; b < positions.size(); ++b) {
      const std::size_t i = positions[a], j = positions[b];
      std::vector<std::size_t> tuple(phi.arity(), 0);
      std::size_t idx = 0;
      do {
        if (tuple[i] != tuple[j]) {
          auto swapped = tuple;
          std::swap(swapped[i], swapped[j]);
          if (phi.table[idx] != phi.table[tuple_index(shape, swapped)]) return false;
        }
        ++idx;
      } while (next_tuple(shape, tuple));
    }
  }
  return true;
}

/// Maximal position sets (size >= 2) the factor is commutative with respect
/// to. Pairwise swap invariance is transitive on same-range positions, so the
/// sets are the classes of that relation.
inline std::vector<std::vector<std::size_t>> maximal_commutative_sets(const FactorTable& phi) {
  std::vector<std::size_t> parent(phi.arity());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < phi.arity(); ++i) {
    for (std::size_t j = i + 1; j < phi.arity(); ++j) {
      if (phi.ranges[i] != phi.ranges[j]) continue;
      if (find(i) == find(j)) continue;
      if (is_commutative(phi, {i, j})) parent[find(j)] = find(i);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < phi.arity(); ++i) classes[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : classes) {
    if (members.size() >= 2) out.push_back(std::move(members));
  }
  return out;
}

}  // namespace liftfg
