#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "counterpoint/dsl.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/exploration.hpp"
#include "counterpoint/feasibility.hpp"
#include "counterpoint/geometry.hpp"
#include "counterpoint/serialize.hpp"
#include "counterpoint/stats.hpp"
#include "counterpoint/synth.hpp"

namespace cp = counterpoint;

namespace {

constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitError = 2;

struct Options {
  std::string format = "text";
  double alpha = 0.01;
  std::size_t cap = cp::kDefaultPathCap;
  bool project = false;
  bool independent = false;
  bool effective_rank = false;
  bool compress = false;
  double variance_floor = 0.0;
  unsigned jobs = 1;
  std::string counters;
  bool haswell = false;
};

unsigned default_jobs() {
  if (const char* env = std::getenv("COUNTERPOINT_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

cp::CounterNamespace resolve_namespace(const cp::dsl::DslSource& src, const Options& opt) {
  if (opt.haswell) return cp::haswell_namespace();
  if (!opt.counters.empty()) {
    if (std::filesystem::is_regular_file(opt.counters)) {
      std::ifstream in(opt.counters);
      std::stringstream ss;
      ss << in.rdbuf();
      return cp::CounterNamespace(split_names(ss.str()));
    }
    return cp::CounterNamespace(split_names(opt.counters));
  }
  return cp::dsl::infer_namespace(src);
}

cp::MuDD load_model(const std::string& path, const Options& opt) {
  auto src = cp::dsl::load_file(path);
  return cp::dsl::parse(src, resolve_namespace(src, opt));
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

cp::RegionOptions region_options(const Options& opt) {
  cp::RegionOptions r;
  r.alpha = opt.alpha;
  r.mode = opt.independent ? cp::CovarianceMode::Independent : cp::CovarianceMode::Full;
  r.variance_floor = opt.variance_floor;
  r.effective_rank_dof = opt.effective_rank;
  return r;
}

cp::BatchOptions batch_options(const Options& opt) {
  cp::BatchOptions b;
  b.region = region_options(opt);
  b.check.compress = opt.compress;
  b.check.flow_cap = opt.cap;
  b.path_cap = opt.cap;
  b.jobs = opt.jobs;
  return b;
}

int cmd_paths(const std::string& model_path, const Options& opt) {
  const auto model = load_model(model_path, opt);
  const auto rows = cp::path_rows(model, opt.cap);
  if (opt.format == "json") {
    print_json(cp::to_json(rows, model.counter_namespace()));
  } else {
    std::cout << cp::render_paths(rows, model.counter_namespace());
  }
  return kExitFeasible;
}

int cmd_constraints(const std::string& model_path, const Options& opt) {
  const auto model = load_model(model_path, opt);
  const auto cs = cp::deduce_constraints(model, opt.cap);
  if (opt.format == "json") {
    print_json(cp::to_json(cs));
  } else {
    std::cout << cp::render_constraints(cs);
  }
  return kExitFeasible;
}

int cmd_check(const std::string& model_path, const std::vector<std::string>& csvs, const Options& opt) {
  const auto model = load_model(model_path, opt);
  cp::LoadOptions load;
  load.project = opt.project;
  std::vector<cp::ObservationSet> observations;
  for (const auto& csv : csvs) {
    observations.push_back(cp::load_observations(std::filesystem::path(csv), model.counter_namespace(), load));
    for (const auto& w : observations.back().warnings) std::cerr << csv << ": warning: " << w << "\n";
  }
  const std::string name = std::filesystem::path(model_path).stem().string();
  std::vector<cp::NamedModel> models{cp::NamedModel{name, model}};
  const auto table = cp::batch_check(models, observations, batch_options(opt));
  if (opt.format == "json") {
    print_json(cp::to_json(table));
  } else {
    std::cout << cp::render_verdicts(table);
  }
  if (table.error_count() > 0) {
    if (opt.format != "json") {
      for (const auto& c : table.cells) {
        if (c.error) std::cerr << "error: " << c.run_id << ": " << *c.error << "\n";
      }
    }
    return kExitError;
  }
  return table.infeasible_count(name) > 0 ? kExitInfeasible : kExitFeasible;
}

int cmd_explore(const std::string& catalog_path, const std::vector<std::string>& csvs, bool check_expansions,
                const std::string& write_path, const Options& opt) {
  auto catalog = cp::ModelCatalog::load(catalog_path);
  if (!csvs.empty()) {
    std::vector<cp::NamedModel> models;
    for (const auto& e : catalog.entries) {
      if (e.model_path) models.push_back(cp::NamedModel{e.name, load_model(e.model_path->string(), opt)});
    }
    if (models.empty()) throw cp::Error(cp::ErrorKind::InvalidCatalog, "no catalog entry names a model file");
    cp::LoadOptions load;
    load.project = opt.project;
    std::vector<cp::ObservationSet> observations;
    for (const auto& csv : csvs) {
      observations.push_back(cp::load_observations(std::filesystem::path(csv), models.front().model.counter_namespace(), load));
    }
    const auto table = cp::batch_check(models, observations, batch_options(opt));
    if (table.error_count() > 0) {
      for (const auto& c : table.cells) {
        if (c.error) std::cerr << "error: " << c.model << "/" << c.run_id << ": " << *c.error << "\n";
      }
      return kExitError;
    }
    cp::apply_counts(catalog, table);
  }
  const auto report = cp::build_search_report(catalog, check_expansions);
  if (!write_path.empty()) {
    std::ofstream out(write_path);
    if (!out) throw cp::Error(cp::ErrorKind::Io, "cannot write '" + write_path + "'");
    out << catalog.to_json().dump(2) << "\n";
  }
  if (opt.format == "json") {
    print_json(cp::render_json(report));
  } else {
    std::cout << cp::render_text(report);
  }
  for (const auto& x : report.expansions) {
    if (x.error) return kExitError;
  }
  return kExitFeasible;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_names(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw cp::Error(cp::ErrorKind::InvalidArgument, what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

int cmd_synth(const std::string& model_path, const std::string& flows, std::size_t samples, const std::string& noise,
              std::uint64_t seed, const std::string& output, const std::string& run_id, const Options& opt) {
  auto model = load_model(model_path, opt);
  const std::size_t paths = cp::enumerate_mupaths(model, opt.cap).size();
  cp::SynthSpec spec{model};
  spec.flows = flows.empty() ? std::vector<double>(paths, 1.0) : parse_numbers(flows, "--flows");
  spec.samples = samples;
  spec.sigma = parse_numbers(noise, "--noise");
  spec.seed = seed;
  spec.path_cap = opt.cap;
  spec.run_id = !run_id.empty() ? run_id
                : output.empty() ? std::string("synth")
                                 : std::filesystem::path(output).stem().string();
  const auto result = cp::generate(spec);
  for (const auto& w : result.observations.warnings) std::cerr << "warning: " << w << "\n";
  if (output.empty()) {
    cp::write_csv(std::cout, result.observations);
  } else {
    std::ofstream out(output);
    if (!out) throw cp::Error(cp::ErrorKind::Io, "cannot write '" + output + "'");
    cp::write_csv(out, result.observations);
  }
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test performance-counter observations against µpath decision diagram models."};
  app.name("counterpoint");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file supplying option defaults");

  Options opt;
  opt.jobs = default_jobs();
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--alpha", opt.alpha, "Significance level of the confidence region")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--cap", opt.cap, "Maximum number of µpaths")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--project", opt.project, "Restrict the model to counters present in the observations");
  app.add_flag("--independent", opt.independent, "Ignore counter correlations (diagonal covariance)");
  app.add_flag("--effective-rank", opt.effective_rank, "Use the covariance rank as χ² degrees of freedom");
  app.add_flag("--compress", opt.compress, "One flow variable per distinct signature");
  app.add_option("--variance-floor", opt.variance_floor, "Lower bound on covariance eigenvalues");
  app.add_option("--jobs,-j", opt.jobs, "Parallel checks (default: COUNTERPOINT_JOBS or core count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--counters", opt.counters, "Counter namespace: comma list or file of names");
  app.add_flag("--haswell", opt.haswell, "Use the 26-counter Haswell MMU namespace");

  std::string model_path;
  auto* paths = app.add_subcommand("paths", "List µpaths and their counter signatures");
  paths->add_option("model", model_path, "Model (.mudd)")->required();

  auto* constraints = app.add_subcommand("constraints", "Deduce the model's constraints");
  constraints->add_option("model", model_path, "Model (.mudd)")->required();

  std::vector<std::string> csvs;
  auto* check = app.add_subcommand("check", "Test observation files against a model");
  check->add_option("model", model_path, "Model (.mudd)")->required();
  check->add_option("observations", csvs, "Observation CSV files")->required();

  std::string catalog_path, write_path;
  bool no_expansion = false;
  auto* explore = app.add_subcommand("explore", "Report on a model search catalog");
  explore->add_option("catalog", catalog_path, "Catalog (.json)")->required();
  explore->add_option("--observations", csvs, "Recount infeasible observations from these CSV files");
  explore->add_flag("--no-expansion-check", no_expansion, "Skip cone-expansion validation of relaxation edges");
  explore->add_option("--write", write_path, "Write the (recounted) catalog here");

  std::string flows, noise = "0", output, run_id;
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate synthetic observations from a model");
  synth->add_option("model", model_path, "Model (.mudd)")->required();
  synth->add_option("--flows", flows, "Comma-separated flow per µpath (default: 1 each)");
  synth->add_option("--samples", samples, "Number of interval samples")->check(CLI::Range(2ul, 100000000ul))->capture_default_str();
  synth->add_option("--noise", noise, "Gaussian noise σ (one value, or one per counter)")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--output,-o", output, "CSV destination (default: stdout)");
  synth->add_option("--run-id", run_id, "Run identifier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*paths) return cmd_paths(model_path, opt);
    if (*constraints) return cmd_constraints(model_path, opt);
    if (*check) return cmd_check(model_path, csvs, opt);
    if (*explore) return cmd_explore(catalog_path, csvs, !no_expansion, write_path, opt);
    if (*synth) return cmd_synth(model_path, flows, samples, noise, seed, output, run_id, opt);
  } catch (const cp::dsl::DslError& e) {
    std::cerr << cp::dsl::format_diagnostics(e.diagnostics(), e.origin());
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
