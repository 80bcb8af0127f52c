#include "counterpoint/serialize.hpp"

#include <algorithm>
#include <sstream>

namespace counterpoint {

namespace {

nlohmann::json rational_json(const Rational& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return r.get_num().get_si();
  return to_double(r);
}

}  // namespace

nlohmann::json to_json(const Constraint& c, const CounterNamespace& ns) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
    if (c.coefficients[i] != 0) coeffs[ns.name(i)] = c.coefficients[i];
  }
  return {{"kind", std::string(to_string(c.kind))},
          {"coefficients", std::move(coeffs)},
          {"display", c.display(ns)},
          {"origin", std::string(to_string(c.origin))}};
}

nlohmann::json to_json(const ConstraintSet& cs) {
  nlohmann::json j;
  j["counters"] = cs.ns.names();
  j["equalities"] = nlohmann::json::array();
  for (const auto& c : cs.equalities) j["equalities"].push_back(to_json(c, cs.ns));
  j["inequalities"] = nlohmann::json::array();
  for (const auto& c : cs.inequalities) j["inequalities"].push_back(to_json(c, cs.ns));
  j["generators"] = {{"signatures", cs.stats.signatures},
                     {"normalized", cs.stats.normalized},
                     {"extreme", cs.stats.extreme},
                     {"rank", cs.stats.rank}};
  return j;
}

nlohmann::json to_json(const ConfidenceRegion& region) {
  return {{"counters", region.ns.names()},
          {"center", region.center},
          {"eigenvalues", region.eigenvalues},
          {"axes", region.axes},
          {"half_lengths", region.half_lengths},
          {"alpha", region.alpha},
          {"samples", region.samples},
          {"dof", region.dof},
          {"chi_square", region.chi_square},
          {"covariance", region.mode == CovarianceMode::Full ? "full" : "independent"}};
}

nlohmann::json to_json(const FeasibilityVerdict& v, const CounterNamespace& ns) {
  nlohmann::json j;
  j["feasible"] = v.feasible;
  if (v.witness_point) {
    nlohmann::json p = nlohmann::json::object();
    for (std::size_t i = 0; i < v.witness_point->size(); ++i) p[ns.name(i)] = rational_json((*v.witness_point)[i]);
    j["witness_point"] = std::move(p);
  } else {
    j["witness_point"] = nullptr;
  }
  if (v.witness_flow) {
    nlohmann::json f = nlohmann::json::array();
    for (const auto& x : *v.witness_flow) f.push_back(rational_json(x));
    j["witness_flow"] = std::move(f);
  } else {
    j["witness_flow"] = nullptr;
  }
  j["violated"] = nlohmann::json::array();
  for (const auto& c : v.violated) j["violated"].push_back(to_json(c, ns));
  j["attribution"] = std::string(to_string(v.attribution));
  return j;
}

nlohmann::json to_json(const VerdictTable& table) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : table.cells) {
    nlohmann::json j;
    j["model"] = c.model;
    j["run_id"] = c.run_id;
    if (c.verdict) {
      j["verdict"] = to_json(*c.verdict, c.ns);
    } else {
      j["verdict"] = nullptr;
    }
    j["error"] = c.error ? nlohmann::json(*c.error) : nlohmann::json(nullptr);
    cells.push_back(std::move(j));
  }
  std::size_t infeasible = 0;
  for (const auto& c : table.cells) infeasible += c.verdict && !c.verdict->feasible;
  return {{"cells", std::move(cells)}, {"infeasible", infeasible}, {"errors", table.error_count()}};
}

std::string render_constraints(const ConstraintSet& cs) {
  std::ostringstream out;
  for (const auto& c : cs.equalities) out << c.display(cs.ns) << "\n";
  for (const auto& c : cs.inequalities) out << c.display(cs.ns) << "\n";
  return out.str();
}

std::string render_verdicts(const VerdictTable& table) {
  std::ostringstream out;
  for (const auto& c : table.cells) {
    out << c.model << "  " << c.run_id << "  ";
    if (c.error) {
      out << "error: " << *c.error << "\n";
      continue;
    }
    if (c.verdict->feasible) {
      out << "feasible\n";
      continue;
    }
    out << "INFEASIBLE";
    if (c.verdict->attribution == Attribution::Center) out << " (violations at region center)";
    out << "\n";
    for (const auto& v : c.verdict->violated) out << "    violates " << v.display(c.ns) << "\n";
  }
  return out.str();
}

std::vector<PathRow> path_rows(const MuDD& model, std::size_t cap) {
  std::vector<PathRow> rows;
  for (const auto& p : enumerate_mupaths(model, cap)) {
    rows.push_back(PathRow{describe_assignment(p), signature_of(model, p, model.counter_namespace())});
  }
  return rows;
}

std::string render_paths(const std::vector<PathRow>& rows, const CounterNamespace& ns) {
  std::ostringstream out;
  out << "#";
  for (const auto& n : ns.names()) out << "  " << n;
  out << "  | assignment\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i;
    for (auto c : rows[i].signature.counts) out << "  " << c;
    out << "  | " << (rows[i].assignment.empty() ? "(none)" : rows[i].assignment) << "\n";
  }
  return out.str();
}

nlohmann::json to_json(const std::vector<PathRow>& rows, const CounterNamespace& ns) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json sig = nlohmann::json::object();
    for (std::size_t i = 0; i < ns.size(); ++i) sig[ns.name(i)] = r.signature.counts[i];
    j.push_back({{"assignment", r.assignment}, {"signature", std::move(sig)}});
  }
  return {{"counters", ns.names()}, {"paths", std::move(j)}};
}

}  // namespace counterpoint
