#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "liftfg/exchangeability.hpp"

using namespace liftfg;
using testutil::kBool;

namespace {

FactorTable unary(const std::string& name, std::vector<Rational> table) {
  return {name, {"X"}, {kBool}, std::move(table)};
}

FactorTable binary(const std::string& name, std::vector<Rational> table,
                   std::vector<std::vector<std::string>> ranges = {kBool, kBool}) {
  return {name, {"X", "Y"}, std::move(ranges), std::move(table)};
}

/// Integer type that counts divisions, for auditing the decision path of the
/// interval check.
struct CountingInt {
  long long v = 0;
  static inline int divisions = 0;
  CountingInt() = default;
  CountingInt(long long x) : v(x) {}
  friend CountingInt operator*(CountingInt a, CountingInt b) { return {a.v * b.v}; }
  friend CountingInt operator+(CountingInt a, CountingInt b) { return {a.v + b.v}; }
  friend CountingInt operator-(CountingInt a, CountingInt b) { return {a.v - b.v}; }
  friend CountingInt operator/(CountingInt a, CountingInt b) {
    ++divisions;
    return {a.v / b.v};
  }
  friend bool operator<(CountingInt a, CountingInt b) { return a.v < b.v; }
  friend bool operator>(CountingInt a, CountingInt b) { return a.v > b.v; }
};

}  // namespace

TEST_CASE("cosine distance on the two-entry example vectors") {
  const auto phi1 = unary("phi1", {8, 2});
  const auto phi2 = unary("phi2", {4, 1});
  const auto phi3 = unary("phi3", {2, 2});
  const auto phi4 = unary("phi4", {Rational(22, 5), Rational(18, 5)});  // (4.4, 3.6)

  CHECK(cosine_distance(phi1, phi2) == 0.0);
  CHECK(cosine_distance(phi1, phi1) == 0.0);
  CHECK(cosine_distance(phi1, phi3) > 0.1);

  // 1 - 10/sqrt(101): small but clearly nonzero.
  const double d34 = cosine_distance(phi3, phi4);
  CHECK(d34 == Catch::Approx(1.0 - 10.0 / std::sqrt(101.0)).epsilon(1e-12));
  CHECK(d34 > 0.004);
  CHECK(d34 < 0.006);
}

TEST_CASE("cosine distance is infinite across different function domains") {
  const auto a = unary("a", {1, 2});
  const auto b = binary("b", {1, 2, 3, 4});
  CHECK(std::isinf(cosine_distance(a, b)));
  // Same sizes but different value order still differ as domains.
  const FactorTable c{"c", {"X"}, {{"false", "true"}}, {1, 2}};
  CHECK(std::isinf(cosine_distance(a, c)));
}

TEST_CASE("cosine distance stays within [0, 1) for positive tables") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    std::vector<Rational> t1, t2;
    for (int i = 0; i < 4; ++i) {
      t1.push_back(testutil::random_rational(rng));
      t2.push_back(testutil::random_rational(rng));
    }
    const double d = cosine_distance(binary("a", t1), binary("b", t2));
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("collinear_exact on the example vectors") {
  CHECK(collinear_exact({8, 2}, {4, 1}) == Rational(2));
  CHECK_FALSE(collinear_exact({8, 2}, {2, 2}));
  CHECK(collinear_exact({3, 5, 7}, {3, 5, 7}) == Rational(1));
  CHECK(collinear_exact({Rational(1, 2)}, {Rational(3, 4)}) == Rational(2, 3));
  CHECK_THROWS_AS(collinear_exact({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(collinear_exact({}, {}), std::invalid_argument);
}

TEST_CASE("approx_collinear accepts the worked interval example") {
  const std::vector<Rational> v1 = {10, 20};
  const std::vector<Rational> v2 = {5, Rational(52, 5)};
  CHECK(approx_collinear(v1, v2, Rational(1, 10)));
  CHECK_FALSE(approx_collinear(v1, v2, Rational(0)));
  CHECK_FALSE(approx_collinear({8, 2}, {2, 2}, Rational(1, 10)));
  CHECK_THROWS_AS(approx_collinear(v1, v2, Rational(2)), std::invalid_argument);
  CHECK_THROWS_AS(approx_collinear(v1, v2, Rational(-1, 10)), std::invalid_argument);
  CHECK_THROWS_AS(approx_collinear({1}, {1, 2}, Rational(0)), std::invalid_argument);
}

TEST_CASE("the interval decision path uses no division") {
  CountingInt::divisions = 0;
  const std::vector<CountingInt> v1 = {10, 20};
  const std::vector<CountingInt> v2 = {25, 52};  // (5, 52/5) scaled by 5
  CHECK(approx_collinear_scaled(v1, v2, CountingInt(1), CountingInt(10)));
  CHECK(CountingInt::divisions == 0);
}

TEST_CASE("property: epsilon zero coincides with exact collinearity") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + rng() % 5;
    std::vector<Rational> v1, v2;
    for (std::size_t i = 0; i < n; ++i) {
      v1.push_back(testutil::random_rational(rng, 20));
      v2.push_back(testutil::random_rational(rng, 20));
    }
    if (rng() % 2 == 0) {
      const auto alpha = testutil::random_rational(rng, 9);
      v2 = v1;
      for (auto& v : v2) v *= alpha;
    }
    CHECK(approx_collinear(v1, v2, Rational(0)) == collinear_exact(v1, v2).has_value());
  }
}

TEST_CASE("property: collinearity matches a vanishing cosine distance") {
  std::mt19937_64 rng(29);
  for (int round = 0; round < 300; ++round) {
    std::vector<Rational> t1, t2;
    for (int i = 0; i < 4; ++i) t1.push_back(testutil::random_rational(rng, 30));
    if (rng() % 2 == 0) {
      const auto alpha = testutil::random_rational(rng, 9);
      t2 = t1;
      for (auto& v : t2) v *= alpha;
    } else {
      for (int i = 0; i < 4; ++i) t2.push_back(testutil::random_rational(rng, 30));
    }
    const bool collinear = collinear_exact(t1, t2).has_value();
    const double d = cosine_distance(binary("a", t1), binary("b", t2));
    CHECK(collinear == (d < 1e-12));
  }
}

TEST_CASE("buckets of a factor over two Boolean arguments") {
  const auto phi = binary("phi", {3, 5, 7, 2});
  const auto bt = buckets(phi);
  REQUIRE(bt.groups.size() == 1);
  CHECK(bt.groups[0] == std::vector<std::size_t>{0, 1});

  const std::set<BucketKey> keys(bt.keys.begin(), bt.keys.end());
  const std::set<BucketKey> expected = {{{2, 0}}, {{1, 1}}, {{0, 2}}};
  CHECK(keys == expected);

  // phi^>([1,1]) lists the (t,f) cell before the (f,t) cell.
  for (std::size_t b = 0; b < bt.keys.size(); ++b) {
    if (bt.keys[b] == BucketKey{{1, 1}}) {
      CHECK(bt.cells[b] == std::vector<std::size_t>{1, 2});
      CHECK(bt.potentials(phi, b) == std::vector<Rational>{5, 7});
    }
  }
}

TEST_CASE("buckets of three Boolean arguments have sizes 1, 3, 3, 1") {
  FactorTable phi{"phi", {"X", "Y", "Z"}, {kBool, kBool, kBool},
                  std::vector<Rational>(8, Rational(1))};
  const auto bt = buckets(phi);
  REQUIRE(bt.keys.size() == 4);
  std::multiset<std::size_t> sizes;
  for (const auto& c : bt.cells) sizes.insert(c.size());
  CHECK(sizes == std::multiset<std::size_t>{1, 1, 3, 3});
}

TEST_CASE("buckets with mixed ranges pair per-group histograms") {
  const std::vector<std::string> ternary = {"a", "b", "c"};
  FactorTable phi{"phi", {"X", "Y"}, {kBool, ternary}, std::vector<Rational>(6, Rational(1))};
  const auto bt = buckets(phi);
  CHECK(bt.groups.size() == 2);
  CHECK(bt.keys.size() == 6);
  for (const auto& c : bt.cells) CHECK(c.size() == 1);
}

TEST_CASE("property: bucket keys are invariant under argument permutation") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 100; ++round) {
    const auto pair = testutil::random_factor_pair(rng, true);
    const auto& phi = pair.phi1;
    std::vector<std::size_t> perm(phi.arity());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    const auto permuted = align_factor(phi, perm);
    CHECK(buckets(phi).keys == buckets(permuted).keys);
  }
}

TEST_CASE("detection on the scaled-and-swapped pair") {
  // phi1(A, B) with table (3,5,7,2); phi2(B, C) carries the same mapping
  // scaled by two with its arguments swapped.
  FactorTable phi1{"phi1", {"A", "B"}, {kBool, kBool}, {3, 5, 7, 2}};
  FactorTable phi2{"phi2", {"B", "C"}, {kBool, kBool}, {6, 14, 10, 4}};

  const auto w12 = detect_exchangeable(phi1, phi2);
  REQUIRE(w12);
  CHECK(w12->alpha == Rational(1, 2));
  CHECK(w12->perm == std::vector<std::size_t>{1, 0});
  CHECK(witness_valid(phi1, phi2, *w12));

  const auto w21 = detect_exchangeable(phi2, phi1);
  REQUIRE(w21);
  CHECK(w21->alpha == Rational(2));
  CHECK(w21->perm == std::vector<std::size_t>{1, 0});
  CHECK(witness_valid(phi2, phi1, *w21));

  const auto brute = brute_force_exchangeable(phi1, phi2);
  REQUIRE(brute);
  CHECK(brute->alpha == w12->alpha);
  CHECK(brute->perm == w12->perm);
}

TEST_CASE("a factor is exchangeable with itself via the identity") {
  FactorTable phi{"phi", {"A", "B"}, {kBool, kBool}, {3, 5, 7, 2}};
  const auto w = detect_exchangeable(phi, phi);
  REQUIRE(w);
  CHECK(w->alpha == Rational(1));
  CHECK(w->perm == std::vector<std::size_t>{0, 1});
}

TEST_CASE("non-collinear tables are rejected") {
  const auto phi1 = unary("phi1", {8, 2});
  const auto phi3 = unary("phi3", {2, 2});
  CHECK_FALSE(detect_exchangeable(phi1, phi3));
  CHECK_FALSE(brute_force_exchangeable(phi1, phi3));
}

TEST_CASE("inconsistent per-bucket scalars are rejected") {
  const auto phi1 = binary("phi1", {4, 6, 6, 8});
  const auto phi2 = binary("phi2", {2, 3, 3, 2});
  CHECK_FALSE(detect_exchangeable(phi1, phi2));
  CHECK_FALSE(brute_force_exchangeable(phi1, phi2));
}

TEST_CASE("brute force guards against large arities") {
  std::vector<std::vector<std::string>> ranges(9, kBool);
  FactorTable big{"big", std::vector<std::string>(9, "x"), ranges,
                  std::vector<Rational>(512, Rational(1))};
  CHECK_THROWS_AS(brute_force_exchangeable(big, big), std::invalid_argument);
}

TEST_CASE("property: detection agrees with the brute-force oracle") {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 300; ++round) {
    const auto pair = testutil::random_factor_pair(rng, round % 2 == 0);
    const auto fast = detect_exchangeable(pair.phi1, pair.phi2);
    const auto slow = brute_force_exchangeable(pair.phi1, pair.phi2);
    CHECK(fast.has_value() == slow.has_value());
    if (pair.constructed_exchangeable) CHECK(fast.has_value());
    if (fast) CHECK(witness_valid(pair.phi1, pair.phi2, *fast));
    if (slow) CHECK(witness_valid(pair.phi1, pair.phi2, *slow));
  }
}

TEST_CASE("property: exchangeability is symmetric with inverted witnesses") {
  std::mt19937_64 rng(103);
  for (int round = 0; round < 100; ++round) {
    const auto pair = testutil::random_factor_pair(rng, true);
    const auto fwd = detect_exchangeable(pair.phi1, pair.phi2);
    const auto bwd = detect_exchangeable(pair.phi2, pair.phi1);
    REQUIRE(fwd);
    REQUIRE(bwd);
    CHECK(fwd->alpha * bwd->alpha == Rational(1));
    // The returned permutations may differ when the tables have symmetries,
    // but the inverse of each witness must validate in the other direction.
    std::vector<std::size_t> inverse(fwd->perm.size());
    for (std::size_t k = 0; k < fwd->perm.size(); ++k) inverse[fwd->perm[k]] = k;
    CHECK(witness_valid(pair.phi2, pair.phi1,
                        {Rational(1) / fwd->alpha, inverse}));
  }
}

TEST_CASE("property: exchangeability is transitive on constructed chains") {
  std::mt19937_64 rng(107);
  for (int round = 0; round < 60; ++round) {
    const auto pair = testutil::random_factor_pair(rng, true);
    // Third factor: scale and permute phi2 once more.
    std::vector<std::size_t> perm(pair.phi2.arity());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    auto phi3 = align_factor(pair.phi2, perm);
    phi3.name = "phi3";
    for (auto& v : phi3.table) v *= Rational(3, 2);
    CHECK(detect_exchangeable(pair.phi1, pair.phi2));
    CHECK(detect_exchangeable(pair.phi2, phi3));
    CHECK(detect_exchangeable(pair.phi1, phi3));
  }
}

TEST_CASE("commutativity checks") {
  // Table (a, b, b, c): swapping the two Boolean arguments fixes the table.
  const auto sym = binary("sym", {4, 9, 9, 25});
  CHECK(is_commutative(sym, {0, 1}));
  const auto asym = binary("asym", {1, 2, 3, 4});
  CHECK_FALSE(is_commutative(asym, {0, 1}));
  CHECK(is_commutative(asym, {0}));  // no nontrivial permutations
  CHECK(is_commutative(asym, {}));

  const std::vector<std::string> ternary = {"a", "b", "c"};
  FactorTable mixed{"m", {"X", "Y"}, {kBool, ternary}, std::vector<Rational>(6, Rational(1))};
  CHECK_THROWS_AS(is_commutative(mixed, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(is_commutative(mixed, {0, 7}), std::invalid_argument);
}

TEST_CASE("maximal commutative sets") {
  const auto sym = binary("sym", {4, 9, 9, 25});
  const auto sets = maximal_commutative_sets(sym);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0] == std::vector<std::size_t>{0, 1});

  CHECK(maximal_commutative_sets(binary("asym", {1, 2, 3, 4})).empty());

  // Fully symmetric over three arguments.
  FactorTable tri{"tri", {"X", "Y", "Z"}, {kBool, kBool, kBool}, {1, 5, 5, 9, 5, 9, 9, 2}};
  const auto tri_sets = maximal_commutative_sets(tri);
  REQUIRE(tri_sets.size() == 1);
  CHECK(tri_sets[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(is_commutative(tri, {0, 1, 2}));
}
