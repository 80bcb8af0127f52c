#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "counterpoint/feasibility.hpp"
#include "counterpoint/geometry.hpp"
#include "counterpoint/mudd.hpp"
#include "counterpoint/stats.hpp"

namespace counterpoint {

/// {kind, coefficients: {counter: c, ...} (nonzero only), display, origin}
nlohmann::json to_json(const Constraint& c, const CounterNamespace& ns);
nlohmann::json to_json(const ConstraintSet& cs);
nlohmann::json to_json(const ConfidenceRegion& region);
nlohmann::json to_json(const FeasibilityVerdict& v, const CounterNamespace& ns);
nlohmann::json to_json(const VerdictTable& table);

/// Equalities, then inequalities, one display string per line.
std::string render_constraints(const ConstraintSet& cs);

/// One line per cell; infeasible cells list their violated constraints.
std::string render_verdicts(const VerdictTable& table);

struct PathRow {
  std::string assignment;
  CounterSignature signature;
};

std::vector<PathRow> path_rows(const MuDD& model, std::size_t cap = kDefaultPathCap);
std::string render_paths(const std::vector<PathRow>& rows, const CounterNamespace& ns);
nlohmann::json to_json(const std::vector<PathRow>& rows, const CounterNamespace& ns);

}  // namespace counterpoint
