#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = CP_CLI_PATH;
const fs::path kModels = CP_MODELS_DIR;

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("cp_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto out_file = scratch() / "stdout.txt";
  const std::string cmd = "'" + kCli + "' " + args + " > '" + out_file.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path write(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string model(const std::string& name) { return "'" + (kModels / (name + ".mudd")).string() + "'"; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("paths") {
    auto r = run("paths " + model("stlb_load"));
    CHECK(r.code == 0);
    CHECK(r.out.find("stlb_status=Hit") != std::string::npos);
    auto j = run("--format json paths " + model("stlb_load"));
    REQUIRE(j.code == 0);
    CHECK(nlohmann::json::parse(j.out)["paths"].size() == 3);
    auto lone = run("--format json paths '" + write("lone.mudd", "done;\n").string() + "'");
    CHECK(nlohmann::json::parse(lone.out)["paths"].size() == 1);
    auto cyc = write("cyc.mudd", "top: counter c;\norder top -> tail;\ntail: counter d;\norder tail -> top;\n");
    CHECK(run("paths '" + cyc.string() + "'").code == 2);
    CHECK(run("paths '" + (scratch() / "missing.mudd").string() + "'").code == 2);
  }

  TEST_CASE("constraints") {
    auto a = run("constraints " + model("walk"));
    CHECK(a.code == 0);
    CHECK(a.out.find("load.pde$_miss ≤ load.causes_walk") != std::string::npos);
    auto c = run("constraints " + model("walk_abort"));
    CHECK(c.code == 0);
    CHECK(c.out.find("load.pde$_miss ≤ load.causes_walk") == std::string::npos);
    auto single = run("constraints '" + write("single.mudd", "counter c;\n").string() + "'");
    CHECK(single.out.find("0 ≤ c") != std::string::npos);
  }

  TEST_CASE("check exit codes") {
    auto good = write("good.csv", "load.causes_walk,load.pde$_miss\n10,3\n11,4\n9,3\n");
    auto bad = write("bad.csv", "load.causes_walk,load.pde$_miss\n3,10\n4,11\n3,9\n");
    auto junk = write("junk.csv", "load.causes_walk,load.pde$_miss\n3,x\n4,11\n");
    CHECK(run("check " + model("walk") + " '" + good.string() + "'").code == 0);
    auto r = run("check " + model("walk") + " '" + good.string() + "' '" + bad.string() + "'");
    CHECK(r.code == 1);
    CHECK(r.out.find("INFEASIBLE") != std::string::npos);
    CHECK(run("check " + model("walk_abort") + " '" + bad.string() + "'").code == 0);
    CHECK(run("check " + model("walk") + " '" + junk.string() + "'").code == 2);
    CHECK(run("check " + model("walk")).code == 2);
    CHECK(run("--alpha 7 check " + model("walk") + " '" + good.string() + "'").code == 2);
  }

  TEST_CASE("text and json verdicts agree") {
    auto good = write("g2.csv", "load.causes_walk,load.pde$_miss\n10,3\n11,4\n9,3\n");
    auto bad = write("b2.csv", "load.causes_walk,load.pde$_miss\n3,10\n4,11\n3,9\n");
    const std::string files = " '" + good.string() + "' '" + bad.string() + "'";
    auto text = run("check " + model("walk") + files);
    auto js = run("--format json check " + model("walk") + files);
    CHECK(text.code == js.code);
    auto j = nlohmann::json::parse(js.out);
    REQUIRE(j["cells"].size() == 2);
    for (const auto& cell : j["cells"]) {
      const std::string run_id = cell["run_id"];
      const bool feasible = cell["verdict"]["feasible"];
      const auto pos = text.out.find(run_id);
      REQUIRE(pos != std::string::npos);
      const auto eol = text.out.find('\n', pos);
      const auto line = text.out.substr(pos, eol - pos);
      CHECK((line.find("INFEASIBLE") == std::string::npos) == feasible);
    }
  }

  TEST_CASE("explore") {
    auto r = run("explore '" + (kModels / "search_catalog.json").string() + "'");
    CHECK(r.code == 0);
    CHECK(r.out.find("★") != std::string::npos);
    CHECK(r.out.find("WalkBypass") != std::string::npos);
    auto j = nlohmann::json::parse(run("--format json explore '" + (kModels / "search_catalog.json").string() + "'").out);
    CHECK(j["feasible"] == nlohmann::json{"m4", "m8"});
    auto empty = write("empty.json", R"({"models": []})");
    CHECK(run("explore '" + empty.string() + "'").code == 0);
    auto broken = write("broken.json", R"({"models": [{"name": "a", "parent": {"name": "zz", "edge": "pruning"}}]})");
    CHECK(run("explore '" + broken.string() + "'").code == 2);
  }

  TEST_CASE("synth") {
    const std::string base = "synth " + model("walk_abort") + " --flows 100,20,30 --samples 10 --noise 0.5 --seed 4";
    auto a = run(base), b = run(base);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(lines(a.out) == 11);
    CHECK(a.out.rfind("t,load.causes_walk,load.pde$_miss\n", 0) == 0);
    auto zero = run("synth " + model("walk") + " --flows 0,0 --samples 3");
    CHECK(zero.out.find("\n0,0,0\n") != std::string::npos);
    CHECK(run("synth " + model("walk") + " --flows 1,2,3").code == 2);

    auto csv = scratch() / "synth_out.csv";
    CHECK(run(base + " -o '" + csv.string() + "'").code == 0);
    CHECK(run("check " + model("walk_abort") + " '" + csv.string() + "'").code == 0);
  }

  TEST_CASE("config file") {
    auto cfg = write("cp.ini", "format=json\nalpha=0.05\n");
    auto good = write("g3.csv", "load.causes_walk,load.pde$_miss\n10,3\n11,4\n9,3\n");
    auto r = run("--config '" + cfg.string() + "' check " + model("walk") + " '" + good.string() + "'");
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["cells"].size() == 1);
  }

  TEST_CASE("help and usage errors") {
    CHECK(run("--help").code == 0);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("").code == 2);
  }
}
