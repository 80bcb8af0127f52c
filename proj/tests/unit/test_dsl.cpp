#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "counterpoint/dsl.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/rational.hpp"

using namespace counterpoint;
using dsl::Diagnostic;

namespace {

const CounterNamespace kWalkNs({"load.causes_walk", "load.pde$_miss"});

std::vector<Diagnostic> diagnostics_of(const std::string& text, const CounterNamespace& ns = kWalkNs) {
  try {
    dsl::parse(dsl::DslSource{text, "t.mudd"}, ns);
  } catch (const dsl::DslError& e) {
    return e.diagnostics();
  }
  return {};
}

std::vector<IntVector> sigs(const MuDD& m) {
  std::vector<IntVector> out;
  for (const auto& s : signatures_of_model(m)) out.push_back(s.counts);
  return out;
}

}  // namespace

TEST_SUITE("dsl") {
  TEST_CASE("stlb load source encodes three µpaths") {
    auto src = dsl::load_file(std::string(CP_MODELS_DIR) + "/stlb_load.mudd");
    auto m = dsl::parse(src, kWalkNs);
    CHECK(sigs(m) == std::vector<IntVector>{{0, 0}, {1, 0}, {1, 1}});
  }

  TEST_CASE("a lone done statement") {
    auto m = dsl::parse(dsl::DslSource{"done;"}, kWalkNs);
    CHECK(sigs(m) == std::vector<IntVector>{{0, 0}});
    CHECK(dsl::parse(dsl::DslSource{""}, kWalkNs).nodes().size() == 1);
  }

  TEST_CASE("nested switch on the same property follows the outer value") {
    const char* text = R"(
      switch (s) {
        case Hit: counter load.causes_walk;
        case Miss: counter load.pde$_miss;
      }
      switch (s) {
        case Hit: counter load.causes_walk;
        case Miss: done;
      }
    )";
    auto m = dsl::parse(dsl::DslSource{text}, kWalkNs);
    CHECK(sigs(m) == std::vector<IntVector>{{2, 0}, {0, 1}});
  }

  TEST_CASE("infer_namespace keeps first-appearance order") {
    auto src = dsl::load_file(std::string(CP_MODELS_DIR) + "/walk_retire.mudd");
    CHECK(dsl::infer_namespace(src).names() ==
          std::vector<std::string>{"load.causes_walk", "load.walk_done", "load.ret_stlb_miss"});
  }

  TEST_CASE("labels, order statements and quoted names") {
    const char* text = R"(
      a: action "walk start";
      b: counter load.causes_walk;
      order a -> b;
    )";
    auto m = dsl::parse(dsl::DslSource{text}, kWalkNs);
    CHECK(m.happens_before_edges().size() == 1);
    REQUIRE(m.find_label("a"));
    CHECK(m.node(*m.find_label("a")).name == "walk start");
  }

  TEST_CASE("syntax error carries line and column") {
    auto d = diagnostics_of("counter load.causes_walk;\n\ncounter ;\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ErrorKind::SyntaxError);
    CHECK(d[0].pos.line == 3);
    CHECK(d[0].pos.column == 9);
    CHECK(dsl::format_diagnostics(d, "t.mudd").find("t.mudd:3:9: SyntaxError") != std::string::npos);
  }

  TEST_CASE("unknown counter is named") {
    auto d = diagnostics_of("counter load.bogus;");
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ErrorKind::UnknownCounter);
    CHECK(dsl::format_diagnostics(d).find("load.bogus") != std::string::npos);
  }

  TEST_CASE("every error is reported in source order") {
    auto d = diagnostics_of("counter load.bogus;\nswitch (p) { }\nx: done;\nx: done;\n");
    REQUIRE(d.size() >= 3);
    CHECK(std::is_sorted(d.begin(), d.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.pos < b.pos; }));
    auto has = [&](ErrorKind k) { return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.kind == k; }); };
    CHECK(has(ErrorKind::UnknownCounter));
    CHECK(has(ErrorKind::EmptySwitch));
    CHECK(has(ErrorKind::DuplicateLabel));
  }

  TEST_CASE("statement after done is unreachable") {
    auto d = diagnostics_of("done;\ncounter load.causes_walk;\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ErrorKind::UnreachableStatement);
    CHECK(d[0].pos.line == 2);
  }

  TEST_CASE("order may follow done") {
    CHECK(diagnostics_of("a: action x;\nb: done;\norder a -> b;\n").empty());
  }

  TEST_CASE("order with an unknown label") {
    auto d = diagnostics_of("a: action x;\norder a -> nowhere;\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == ErrorKind::UnknownLabel);
  }

  TEST_CASE("order statements that close a cycle") {
    CHECK_THROWS_AS(dsl::parse(dsl::DslSource{"a: action x;\nb: action y;\norder b -> a;\n"}, kWalkNs), Error);
  }

  TEST_CASE("functions, loops and variables are rejected") {
    for (const char* text : {"fn f() { done; }", "while (x) { done; }", "for (;;) { done; }", "let x = 1;",
                             "var y;", "if (a) { done; }"}) {
      auto d = diagnostics_of(text);
      REQUIRE_FALSE(d.empty());
      CHECK(d[0].kind == ErrorKind::SyntaxError);
    }
  }

  TEST_CASE("duplicate case values") {
    auto d = diagnostics_of("switch (p) { case A: done; case A: done; }");
    REQUIRE_FALSE(d.empty());
    CHECK(d[0].kind == ErrorKind::SyntaxError);
  }

  TEST_CASE("round trip through the printer") {
    for (const char* name : {"stlb_load", "walk", "walk_abort", "walk_retire", "haswell_mmu"}) {
      auto src = dsl::load_file(std::string(CP_MODELS_DIR) + "/" + name + ".mudd");
      auto ns = dsl::infer_namespace(src);
      auto m = dsl::parse(src, ns);
      auto printed = dsl::to_source(m);
      auto again = dsl::parse(dsl::DslSource{printed, "printed"}, ns);
      CHECK(sigs(m) == sigs(again));
      CHECK(m.happens_before_edges().size() == again.happens_before_edges().size());
      auto pa = enumerate_mupaths(m), pb = enumerate_mupaths(again);
      REQUIRE(pa.size() == pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].property_assignment == pb[i].property_assignment);
    }
  }

  TEST_CASE("round trip on random nested programs") {
    std::mt19937_64 rng(7);
    const CounterNamespace ns({"c0", "c1", "c2"});
    int prop = 0;
    std::function<std::string(int)> block = [&](int depth) {
      std::string out;
      const int stmts = static_cast<int>(rng() % 3) + 1;
      for (int s = 0; s < stmts; ++s) {
        const auto kind = rng() % (depth > 0 ? 3 : 2);
        if (kind == 0) {
          out += "counter c" + std::to_string(rng() % 3) + ";\n";
        } else if (kind == 1) {
          out += "action a" + std::to_string(rng() % 5) + ";\n";
        } else {
          out += "switch (p" + std::to_string(prop++) + ") {\n";
          const int cases = static_cast<int>(rng() % 3) + 1;
          for (int c = 0; c < cases; ++c) out += "case v" + std::to_string(c) + ":\n" + block(depth - 1);
          out += "}\n";
        }
      }
      return out;
    };
    for (int trial = 0; trial < 200; ++trial) {
      const std::string text = block(3);
      auto m = dsl::parse(dsl::DslSource{text}, ns);
      auto again = dsl::parse(dsl::DslSource{dsl::to_source(m)}, ns);
      CHECK(sigs(m) == sigs(again));
    }
  }
}
