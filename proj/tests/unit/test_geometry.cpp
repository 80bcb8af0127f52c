#include <doctest.h>

#include <algorithm>
#include <random>

#include "counterpoint/dsl.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/geometry.hpp"
#include "oracles.hpp"

using namespace counterpoint;

namespace {

const CounterNamespace kWalkNs({"load.causes_walk", "load.pde$_miss"});

MuDD load(const std::string& name, const CounterNamespace& ns) {
  return dsl::parse(dsl::load_file(std::string(CP_MODELS_DIR) + "/" + name + ".mudd"), ns);
}

std::vector<CounterSignature> as_sigs(const std::vector<IntVector>& gens) {
  std::vector<CounterSignature> out;
  for (const auto& g : gens) out.push_back(CounterSignature{g, std::nullopt});
  return out;
}

CounterNamespace generic_ns(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i + 1));
  return CounterNamespace(names);
}

std::vector<IntVector> inequality_normals(const ConstraintSet& cs) {
  std::vector<IntVector> out;
  for (const auto& c : cs.inequalities) out.push_back(c.coefficients);
  return out;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("normalize_signatures") {
    CHECK(normalize_generators({{2, 4, 6}}) == std::vector<IntVector>{{1, 2, 3}});
    CHECK(normalize_generators({{1, 1}, {2, 2}, {0, 0}}) == std::vector<IntVector>{{1, 1}});
    CHECK(normalize_generators({{5, 3}, {3, 5}}) == std::vector<IntVector>{{3, 5}, {5, 3}});
    auto sigs = normalize_signatures(as_sigs({{0, 0}, {4, 2}}));
    REQUIRE(sigs.size() == 1);
    CHECK(sigs[0].counts == IntVector{2, 1});
  }

  TEST_CASE("find_equalities") {
    SUBCASE("single generator (1,2)") {
      auto r = find_equalities({{1, 2}}, 2);
      REQUIRE(r.equalities.size() == 1);
      CHECK(r.equalities[0].coefficients == IntVector{2, -1});
      CHECK(r.rank() == 1);
    }
    SUBCASE("full span") {
      auto r = find_equalities({{1, 0}, {1, 1}}, 2);
      CHECK(r.equalities.empty());
      CHECK(r.reduced_generators == std::vector<IntVector>{{1, 0}, {1, 1}});
    }
    SUBCASE("empty generator set") {
      auto r = find_equalities({}, 3);
      CHECK(r.equalities.size() == 3);
      for (const auto& e : r.equalities) CHECK(gcd_of(e.coefficients) == 1);
    }
    SUBCASE("stlb hit split") {
      // (stlb_hit_4k, stlb_hit_2m, stlb_hit)
      auto r = find_equalities({{1, 0, 1}, {0, 1, 1}}, 3);
      REQUIRE(r.equalities.size() == 1);
      CHECK(r.equalities[0].coefficients == IntVector{1, 1, -1});
      CounterNamespace ns({"load.stlb_hit_4k", "load.stlb_hit_2m", "load.stlb_hit"});
      CHECK(r.equalities[0].display(ns) == "load.stlb_hit = load.stlb_hit_4k + load.stlb_hit_2m");
    }
    SUBCASE("equalities annihilate every generator") {
      std::mt19937_64 rng(3);
      for (int t = 0; t < 100; ++t) {
        auto gens = normalize_generators(oracle::random_generators(rng, 5, 1 + rng() % 4, 3));
        auto r = find_equalities(gens, 5);
        CHECK(r.equalities.size() + r.rank() == 5);
        CHECK(r.rank() == oracle::rank_of(gens));
        for (const auto& e : r.equalities) {
          for (const auto& g : gens) CHECK(dot_checked(e.coefficients, g) == 0);
        }
      }
    }
  }

  TEST_CASE("remove_interior_generators") {
    CHECK(remove_interior_generators({{1, 0}, {0, 1}, {1, 1}}) == std::vector<IntVector>{{1, 0}, {0, 1}});
    CHECK(remove_interior_generators({{1, 0}, {0, 1}}) == std::vector<IntVector>{{1, 0}, {0, 1}});
    CHECK(remove_interior_generators({{2, 1}, {1, 2}, {1, 1}}) == std::vector<IntVector>{{2, 1}, {1, 2}});
  }

  TEST_CASE("conic_hull_facets small cases") {
    CHECK(conic_hull_facets({{3}}) == std::vector<IntVector>{{1}});
    CHECK(conic_hull_facets({{1, 0}, {1, 1}}) == std::vector<IntVector>{{0, 1}, {1, -1}});
    CHECK(conic_hull_facets({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) == std::vector<IntVector>{{0, 0, 1}, {0, 1, 0}, {1, 0, 0}});
    // Square pyramid: four extreme rays, four facets.
    CHECK(conic_hull_facets({{1, 0, 1}, {0, 1, 1}, {-1, 0, 1}, {0, -1, 1}}) ==
          std::vector<IntVector>{{-1, -1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, 1}});
  }

  TEST_CASE("hull matches the brute-force oracle on random full-rank cones") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int t = 0; t < 400; ++t) {
      const std::size_t dim = 3 + rng() % 3;
      auto gens = normalize_generators(oracle::random_generators(rng, dim, dim + rng() % 5, 4));
      if (oracle::rank_of(gens) != dim) continue;
      auto extreme = remove_interior_generators(gens);
      CHECK(conic_hull_facets(extreme) == oracle::brute_force_facets(gens));
      ++checked;
    }
    CHECK(checked > 100);
  }

  TEST_CASE("walk model constraints") {
    auto a = deduce_constraints(load("walk", kWalkNs));
    const Constraint c{ConstraintKind::Inequality, {1, -1}, DeductionStep::ConicHull};
    CHECK(c.display(kWalkNs) == "load.pde$_miss ≤ load.causes_walk");
    CHECK(a.contains(c));
    CHECK(a.equalities.empty());
    CHECK(a.inequalities.size() == 2);
    auto b = deduce_constraints(load("walk_abort", kWalkNs));
    CHECK_FALSE(b.contains(c));
    CHECK(inequality_normals(b) == std::vector<IntVector>{{0, 1}, {1, 0}});
  }

  TEST_CASE("retired walk facets") {
    CounterNamespace ns({"load.ret_stlb_miss", "load.walk_done", "load.causes_walk"});
    auto cs = deduce_constraints(load("walk_retire", ns));
    CHECK(cs.equalities.empty());
    std::vector<std::string> shown;
    for (const auto& c : cs.inequalities) shown.push_back(c.display(ns));
    std::sort(shown.begin(), shown.end());
    CHECK(shown == std::vector<std::string>{"0 ≤ load.ret_stlb_miss", "load.ret_stlb_miss ≤ load.walk_done",
                                            "load.walk_done ≤ load.causes_walk"});
  }

  TEST_CASE("all-zero model") {
    auto m = dsl::parse(dsl::DslSource{"action idle;"}, generic_ns(3));
    auto cs = deduce_constraints(m);
    CHECK(cs.inequalities.empty());
    CHECK(cs.equalities.size() == 3);
    CHECK(cs.satisfied_by(oracle::rationals({0, 0, 0})));
    CHECK_FALSE(cs.satisfied_by(oracle::rationals({0, 1, 0})));
  }

  TEST_CASE("single counter model") {
    auto m = dsl::parse(dsl::DslSource{"counter c;"}, CounterNamespace({"c"}));
    auto cs = deduce_constraints(m);
    REQUIRE(cs.inequalities.size() == 1);
    CHECK(cs.inequalities[0].display(cs.ns) == "0 ≤ c");
  }

  TEST_CASE("display forms") {
    auto ns = generic_ns(3);
    CHECK(Constraint{ConstraintKind::Inequality, {3, -2, 0}}.display(ns) == "2·v2 ≤ 3·v1");
    CHECK(Constraint{ConstraintKind::Equality, {1, 0, 0}}.display(ns) == "v1 = 0");
    CHECK(Constraint{ConstraintKind::Equality, {2, -1, 0}}.display(ns) == "2·v1 = v2");
    CHECK_THROWS_AS((Constraint{ConstraintKind::Equality, {1}}.display(ns)), Error);
  }

  TEST_CASE("cone_membership") {
    CHECK(cone_membership({{1, 0}, {1, 1}}, oracle::rationals({2, 1})));
    auto f = membership_certificate({{1, 0}, {1, 1}}, oracle::rationals({2, 1}));
    REQUIRE(f);
    CHECK(*f == oracle::rationals({1, 1}));
    CHECK(cone_membership({{1, 0}, {1, 1}}, oracle::rationals({0, 0})));
    CHECK(cone_membership({}, oracle::rationals({0, 0})));
    CHECK_FALSE(cone_membership({{1, 0}, {1, 1}}, oracle::rationals({1, 2})));
    try {
      cone_membership({{1, 0}}, oracle::rationals({1, 2, 3}));
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
  }

  TEST_CASE("duality, scale invariance, tightness and removal safety") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t dim = 1 + rng() % 4, count = 1 + rng() % 6;
      auto gens = oracle::random_generators(rng, dim, count, 5);
      const auto ns = generic_ns(dim);
      auto cs = deduce_constraints(ns, as_sigs(gens));
      auto norm = normalize_generators(gens);
      auto reduced = find_equalities(norm, dim);
      auto extreme = remove_interior_generators(reduced.reduced_generators);
      std::vector<IntVector> extreme_full;
      for (const auto& g : norm) {
        IntVector r;
        for (auto c : reduced.coordinates) r.push_back(g[c]);
        if (std::find(extreme.begin(), extreme.end(), r) != extreme.end()) extreme_full.push_back(g);
      }
      for (int probe = 0; probe < 10; ++probe) {
        auto p = oracle::random_point(rng, dim, 5);
        if (probe % 3 == 0 && !gens.empty()) {
          // Bias towards points on the cone: random non-negative combinations.
          for (auto& x : p) x = 0;
          for (const auto& g : gens) {
            const long w = static_cast<long>(rng() % 3);
            for (std::size_t d = 0; d < dim; ++d) p[d] += w * g[d];
          }
        }
        const bool member = cone_membership(gens, p);
        CHECK(member == cs.satisfied_by(p));
        RationalVector scaled = p;
        for (auto& x : scaled) x *= Rational(7, 3);
        CHECK(member == cone_membership(gens, scaled));
        CHECK(member == cone_membership(extreme_full, p));
      }
      for (const auto& c : cs.inequalities) {
        std::vector<IntVector> tight;
        for (const auto& g : norm) {
          auto v = dot_checked(c.coefficients, g);
          CHECK(v >= 0);
          if (v == 0) tight.push_back(g);
        }
        CHECK(oracle::rank_of(tight) + 1 >= cs.stats.rank);
        CHECK(gcd_of(c.coefficients) == 1);
      }
    }
  }

  TEST_CASE("haswell-scale deduction is internally consistent") {
    auto m = load("haswell_mmu", haswell_namespace());
    auto cs = deduce_constraints(m);
    CHECK(cs.stats.signatures >= 200);
    auto sigs = signatures_of_model(m);
    for (const auto& s : sigs) CHECK(cs.satisfied_by(to_rational_vector(s.counts)));
    bool found = false;
    for (const auto& c : cs.inequalities) found |= c.display(cs.ns) == "load.ret_stlb_miss ≤ load.walk_done";
    CHECK(found);
  }
}
