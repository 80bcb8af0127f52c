#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "counterpoint/feasibility.hpp"
#include "counterpoint/mudd.hpp"

namespace counterpoint {

enum class EdgeKind { Relaxation, Pruning };

std::string_view to_string(EdgeKind kind);

struct ParentEdge {
  std::string name;
  EdgeKind kind = EdgeKind::Relaxation;
};

struct ModelEntry {
  std::string name;
  std::set<std::string> features;
  std::optional<std::filesystem::path> model_path;  // resolved against the catalog's directory
  std::size_t infeasible_count = 0;
  std::optional<ParentEdge> parent;
  bool selected = false;
};

/// Catalog JSON:
///   { "dataset": "...", "features": ["A", ...],
///     "models": [ { "name": "m0", "features": [...], "infeasible": 209,
///                   "model": "m0.mudd", "parent": {"name": "...", "edge": "relaxation"},
///                   "selected": false }, ... ] }
/// Only "name" is required per model.
struct ModelCatalog {
  std::string dataset_id;
  std::vector<std::string> feature_order;  // display order of feature columns
  std::vector<ModelEntry> entries;         // file order

  const ModelEntry* find(std::string_view name) const;

  /// Names unique, parents resolve, relaxation edges add features and
  /// pruning edges remove them. Throws InvalidCatalog.
  void validate() const;

  static ModelCatalog from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ModelCatalog load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct Classification {
  std::set<std::string> feasible;
  std::set<std::string> infeasible;
};

Classification classify(const ModelCatalog& catalog);

/// Intersection of the feature sets of all feasible entries.
std::set<std::string> required_features(const ModelCatalog& catalog);

/// Feasible entries whose feature set has no feasible proper subset.
std::vector<std::string> minimal_feasible(const ModelCatalog& catalog);

/// K_parent ⊆ K_child: every parent generator is in the child's cone. The
/// two models must use the same counters (order may differ).
bool cone_expansion_check(const MuDD& parent, const MuDD& child);

struct ExpansionResult {
  std::string parent;
  std::string child;
  bool expanded = false;
  std::optional<std::string> error;
};

/// cone_expansion_check on every relaxation edge whose two entries name
/// model files.
std::vector<ExpansionResult> validate_expansions(const ModelCatalog& catalog);

/// Overwrites infeasible counts with the table's per-model counts.
void apply_counts(ModelCatalog& catalog, const VerdictTable& table);

struct SearchReport {
  ModelCatalog catalog;
  Classification classes;
  std::vector<std::string> minimal;
  std::optional<std::set<std::string>> required;  // absent when nothing is feasible
  std::vector<ExpansionResult> expansions;
  std::vector<std::string> hints;
};

SearchReport build_search_report(const ModelCatalog& catalog, bool check_expansions = true);
std::string render_text(const SearchReport& report);
nlohmann::json render_json(const SearchReport& report);

}  // namespace counterpoint
