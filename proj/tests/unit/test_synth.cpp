#include <doctest.h>

#include <cmath>
#include <sstream>

#include "counterpoint/dsl.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/feasibility.hpp"
#include "counterpoint/synth.hpp"

using namespace counterpoint;

namespace {

const CounterNamespace kWalkNs({"load.causes_walk", "load.pde$_miss"});

SynthSpec spec_for(const std::string& name, std::vector<double> flows) {
  SynthSpec s{dsl::parse(dsl::load_file(std::string(CP_MODELS_DIR) + "/" + name + ".mudd"), kWalkNs)};
  s.flows = std::move(flows);
  return s;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("exact counters") {
    CHECK(exact_counters(spec_for("walk", {0, 0})) == RationalVector{0, 0});
    CHECK(exact_counters(spec_for("walk", {1, 1})) == RationalVector{2, 1});
    auto a = exact_counters(spec_for("walk_abort", {1, 2, 3}));
    auto b = exact_counters(spec_for("walk_abort", {2, 4, 6}));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == 2 * a[i]);
    CHECK(exact_counters(spec_for("walk_abort", {0.5, 0, 0})) == RationalVector{Rational(1, 2), 0});
  }

  TEST_CASE("noise-free rows are constant and feasible") {
    auto s = spec_for("walk_abort", {1234.5, 77, 3});
    s.samples = 20;
    auto r = generate(s);
    CHECK(r.clamped == 0);
    REQUIRE(r.observations.sample_count() == 20);
    for (const auto& row : r.observations.samples) CHECK(row == r.observations.samples[0]);
    auto region = build_confidence_region(r.observations);
    CHECK(check_feasibility(signatures_of_model(s.model), region).feasible);
  }

  TEST_CASE("noisy mean stays within 5σ/√M") {
    auto s = spec_for("walk", {6000, 4000});
    s.samples = 400;
    s.sigma = {2.0};
    s.seed = 99;
    auto r = generate(s);
    auto m = mean_and_covariance(r.observations);
    auto exact = exact_counters(s);
    for (std::size_t i = 0; i < 2; ++i) {
      double expect = to_double(exact[i]) / 400;
      CHECK(std::abs(m.mean[i] - expect) < 5 * 2.0 / std::sqrt(400.0));
    }
  }

  TEST_CASE("seeding is deterministic") {
    auto s = spec_for("walk", {10, 20});
    s.sigma = {0.3, 0.7};
    s.seed = 5;
    auto a = generate(s), b = generate(s);
    CHECK(a.observations.samples == b.observations.samples);
    s.seed = 6;
    CHECK(generate(s).observations.samples != a.observations.samples);
  }

  TEST_CASE("full covariance noise") {
    auto s = spec_for("walk", {50000, 50000});
    s.samples = 2000;
    s.covariance = Matrix{{4, 3}, {3, 4}};
    auto m = mean_and_covariance(generate(s).observations);
    CHECK(m.covariance[0][1] == doctest::Approx(3).epsilon(0.15));
    CHECK(m.covariance[0][0] == doctest::Approx(4).epsilon(0.15));
  }

  TEST_CASE("argument errors") {
    try {
      generate(spec_for("walk", {1, 2, 3}));
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
    CHECK_THROWS_AS(generate(spec_for("walk", {-1, 2})), Error);
    auto s = spec_for("walk", {1, 1});
    s.samples = 1;
    CHECK_THROWS_AS(generate(s), Error);
  }

  TEST_CASE("negative noisy values are clamped and counted") {
    auto s = spec_for("walk", {0, 0});
    s.sigma = {1.0};
    s.samples = 100;
    auto r = generate(s);
    CHECK(r.clamped > 50);
    for (const auto& row : r.observations.samples)
      for (double x : row) CHECK(x >= 0);
  }

  TEST_CASE("csv round trip") {
    auto s = spec_for("walk_abort", {10, 20, 30});
    s.sigma = {0.25};
    s.samples = 7;
    auto r = generate(s);
    std::stringstream buf;
    write_csv(buf, r.observations);
    CHECK(buf.str().rfind("t,load.causes_walk,load.pde$_miss\n", 0) == 0);
    auto back = load_observations(buf, kWalkNs, "x");
    CHECK(back.samples == r.observations.samples);
  }
}
