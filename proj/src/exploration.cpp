#include "counterpoint/exploration.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "counterpoint/dsl.hpp"
#include "counterpoint/error.hpp"
#include "counterpoint/geometry.hpp"

namespace counterpoint {

std::string_view to_string(EdgeKind kind) { return kind == EdgeKind::Relaxation ? "relaxation" : "pruning"; }

const ModelEntry* ModelCatalog::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void ModelCatalog::validate() const {
  std::set<std::string> names;
  for (const auto& e : entries) {
    if (e.name.empty()) throw Error(ErrorKind::InvalidCatalog, "model entry without a name");
    if (!names.insert(e.name).second) throw Error(ErrorKind::InvalidCatalog, "duplicate model name '" + e.name + "'");
  }
  for (const auto& e : entries) {
    if (!e.parent) continue;
    const ModelEntry* p = find(e.parent->name);
    if (p == nullptr) {
      throw Error(ErrorKind::InvalidCatalog, "'" + e.name + "' names unknown parent '" + e.parent->name + "'");
    }
    const auto& small = e.parent->kind == EdgeKind::Relaxation ? p->features : e.features;
    const auto& large = e.parent->kind == EdgeKind::Relaxation ? e.features : p->features;
    const bool proper = small.size() < large.size() && std::includes(large.begin(), large.end(), small.begin(), small.end());
    if (!proper) {
      throw Error(ErrorKind::InvalidCatalog, std::string(to_string(e.parent->kind)) + " edge " + p->name + " -> " + e.name +
                                                 (e.parent->kind == EdgeKind::Relaxation ? " must add" : " must remove") +
                                                 " features");
    }
  }
  for (const auto& e : entries) {
    if (e.model_path && !std::filesystem::exists(*e.model_path)) {
      throw Error(ErrorKind::InvalidCatalog, "'" + e.name + "' references missing model file " + e.model_path->string());
    }
  }
  // Parent chains must not loop.
  for (const auto& e : entries) {
    std::set<std::string> seen{e.name};
    for (const ModelEntry* cur = &e; cur->parent;) {
      cur = find(cur->parent->name);
      if (!seen.insert(cur->name).second) throw Error(ErrorKind::InvalidCatalog, "parent cycle through '" + e.name + "'");
    }
  }
}

ModelCatalog ModelCatalog::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ModelCatalog c;
  try {
    if (!j.is_object()) throw Error(ErrorKind::InvalidCatalog, "catalog must be a JSON object");
    c.dataset_id = j.value("dataset", std::string());
    if (j.contains("features")) c.feature_order = j.at("features").get<std::vector<std::string>>();
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) {
        ModelEntry e;
        e.name = m.at("name").get<std::string>();
        if (m.contains("features")) {
          for (const auto& f : m.at("features")) e.features.insert(f.get<std::string>());
        }
        if (m.contains("infeasible")) {
          const auto n = m.at("infeasible").get<long long>();
          if (n < 0) throw Error(ErrorKind::InvalidCatalog, "'" + e.name + "' has a negative infeasible count");
          e.infeasible_count = static_cast<std::size_t>(n);
        }
        if (m.contains("model") && !m.at("model").is_null()) {
          std::filesystem::path p = m.at("model").get<std::string>();
          e.model_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        }
        if (m.contains("parent") && !m.at("parent").is_null()) {
          const auto& pj = m.at("parent");
          ParentEdge pe;
          pe.name = pj.at("name").get<std::string>();
          const auto edge = pj.value("edge", std::string("relaxation"));
          if (edge == "relaxation") {
            pe.kind = EdgeKind::Relaxation;
          } else if (edge == "pruning") {
            pe.kind = EdgeKind::Pruning;
          } else {
            throw Error(ErrorKind::InvalidCatalog, "unknown edge kind '" + edge + "'");
          }
          e.parent = pe;
        }
        e.selected = m.value("selected", false);
        c.entries.push_back(std::move(e));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidCatalog, ex.what());
  }
  for (const auto& e : c.entries) {
    for (const auto& f : e.features) {
      if (std::find(c.feature_order.begin(), c.feature_order.end(), f) == c.feature_order.end()) {
        c.feature_order.push_back(f);
      }
    }
  }
  c.validate();
  return c;
}

ModelCatalog ModelCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidCatalog, path.string() + ": " + ex.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json ModelCatalog::to_json() const {
  nlohmann::json j;
  j["dataset"] = dataset_id;
  j["features"] = feature_order;
  j["models"] = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json m;
    m["name"] = e.name;
    m["features"] = std::vector<std::string>(e.features.begin(), e.features.end());
    m["infeasible"] = e.infeasible_count;
    if (e.model_path) m["model"] = e.model_path->string();
    if (e.parent) m["parent"] = {{"name", e.parent->name}, {"edge", std::string(to_string(e.parent->kind))}};
    if (e.selected) m["selected"] = true;
    j["models"].push_back(std::move(m));
  }
  return j;
}

Classification classify(const ModelCatalog& catalog) {
  Classification c;
  for (const auto& e : catalog.entries) (e.infeasible_count == 0 ? c.feasible : c.infeasible).insert(e.name);
  return c;
}

std::set<std::string> required_features(const ModelCatalog& catalog) {
  std::optional<std::set<std::string>> acc;
  for (const auto& e : catalog.entries) {
    if (e.infeasible_count != 0) continue;
    if (!acc) {
      acc = e.features;
      continue;
    }
    std::set<std::string> next;
    std::set_intersection(acc->begin(), acc->end(), e.features.begin(), e.features.end(),
                          std::inserter(next, next.begin()));
    acc = std::move(next);
  }
  if (!acc) throw Error(ErrorKind::NoFeasibleModel, "no feasible model in the catalog");
  return *acc;
}

std::vector<std::string> minimal_feasible(const ModelCatalog& catalog) {
  std::vector<const ModelEntry*> feasible;
  for (const auto& e : catalog.entries) {
    if (e.infeasible_count == 0) feasible.push_back(&e);
  }
  std::vector<std::string> out;
  for (const auto* e : feasible) {
    const bool has_smaller = std::any_of(feasible.begin(), feasible.end(), [&](const ModelEntry* o) {
      return o->features.size() < e->features.size() &&
             std::includes(e->features.begin(), e->features.end(), o->features.begin(), o->features.end());
    });
    if (!has_smaller) out.push_back(e->name);
  }
  return out;
}

bool cone_expansion_check(const MuDD& parent, const MuDD& child) {
  const auto& ns = parent.counter_namespace();
  const auto& cns = child.counter_namespace();
  std::vector<std::string> a = ns.names(), b = cns.names();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(ErrorKind::DimensionMismatch, "parent and child models use different counters");
  std::vector<IntVector> child_gens;
  for (auto& s : signatures_of_model(child, ns, UnknownCounterPolicy::Reject)) child_gens.push_back(std::move(s.counts));
  child_gens = normalize_generators(std::move(child_gens));
  std::vector<IntVector> parent_gens;
  for (auto& s : signatures_of_model(parent)) parent_gens.push_back(std::move(s.counts));
  for (const auto& g : normalize_generators(std::move(parent_gens))) {
    if (!cone_membership(child_gens, to_rational_vector(g))) return false;
  }
  return true;
}

namespace {

MuDD load_model(const std::filesystem::path& path) {
  auto src = dsl::load_file(path);
  return dsl::parse(src, dsl::infer_namespace(src));
}

}  // namespace

std::vector<ExpansionResult> validate_expansions(const ModelCatalog& catalog) {
  std::vector<ExpansionResult> out;
  for (const auto& e : catalog.entries) {
    if (!e.parent || e.parent->kind != EdgeKind::Relaxation) continue;
    const ModelEntry* p = catalog.find(e.parent->name);
    if (p == nullptr || !p->model_path || !e.model_path) continue;
    ExpansionResult r{p->name, e.name, false, std::nullopt};
    try {
      r.expanded = cone_expansion_check(load_model(*p->model_path), load_model(*e.model_path));
    } catch (const std::exception& ex) {
      r.error = ex.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

void apply_counts(ModelCatalog& catalog, const VerdictTable& table) {
  for (auto& e : catalog.entries) {
    const bool present = std::any_of(table.cells.begin(), table.cells.end(),
                                     [&](const VerdictCell& c) { return c.model == e.name; });
    if (present) e.infeasible_count = table.infeasible_count(e.name);
  }
}

SearchReport build_search_report(const ModelCatalog& catalog, bool check_expansions) {
  SearchReport r;
  r.catalog = catalog;
  r.classes = classify(catalog);
  r.minimal = minimal_feasible(catalog);
  if (!r.classes.feasible.empty()) r.required = required_features(catalog);
  if (check_expansions) r.expansions = validate_expansions(catalog);
  for (const auto& e : catalog.entries) {
    if (!e.parent || e.parent->kind != EdgeKind::Pruning || e.infeasible_count == 0) continue;
    r.hints.push_back(e.name + " is infeasible; pruning further features from it is unlikely to restore feasibility");
  }
  return r;
}

namespace {

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++w;
  }
  return w;
}

std::string pad(const std::string& s, std::size_t width) {
  const auto w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::set<std::string> starred(const SearchReport& r) {
  std::set<std::string> out;
  for (const auto& e : r.catalog.entries) {
    if (e.selected) out.insert(e.name);
  }
  if (out.empty()) out.insert(r.minimal.begin(), r.minimal.end());
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out.empty() ? "(none)" : out;
}

template <typename Set>
std::vector<std::string> ordered(const Set& set, const std::vector<std::string>& order) {
  std::vector<std::string> out;
  for (const auto& f : order) {
    if (set.count(f)) out.push_back(f);
  }
  return out;
}

}  // namespace

std::string render_text(const SearchReport& r) {
  const auto& cat = r.catalog;
  const auto stars = starred(r);
  std::vector<std::string> header{"  model"};
  for (const auto& f : cat.feature_order) header.push_back(f);
  header.push_back("#inf");
  header.push_back("edge");
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : cat.entries) {
    std::vector<std::string> row{(stars.count(e.name) ? "★ " : "  ") + e.name};
    for (const auto& f : cat.feature_order) row.push_back(e.features.count(f) ? "✓" : "✗");
    row.push_back(std::to_string(e.infeasible_count));
    row.push_back(e.parent ? std::string(to_string(e.parent->kind)) + " from " + e.parent->name : "");
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = display_width(header[c]);
    for (const auto& row : rows) width[c] = std::max(width[c], display_width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      s += c + 1 == cells.size() ? cells[c] : pad(cells[c], width[c]) + "  ";
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::ostringstream out;
  if (!cat.dataset_id.empty()) out << "dataset: " << cat.dataset_id << "\n";
  out << line(header);
  if (cat.entries.empty()) return out.str();
  for (const auto& row : rows) out << line(row);
  out << "\n";
  auto names_in_order = [&](const std::set<std::string>& s) {
    std::vector<std::string> v;
    for (const auto& e : cat.entries) {
      if (s.count(e.name)) v.push_back(e.name);
    }
    return v;
  };
  out << "feasible: " << join(names_in_order(r.classes.feasible)) << "\n";
  out << "infeasible: " << join(names_in_order(r.classes.infeasible)) << "\n";
  out << "minimal feasible: " << join(r.minimal) << "\n";
  if (r.required) {
    out << "required features: " << join(ordered(*r.required, cat.feature_order)) << "\n";
  } else {
    out << "required features: undetermined (no feasible model)\n";
  }
  for (const auto& x : r.expansions) {
    out << "cone expansion " << x.parent << " -> " << x.child << ": "
        << (x.error ? "error: " + *x.error : x.expanded ? "ok" : "NOT expanded") << "\n";
  }
  for (const auto& h : r.hints) out << "hint: " << h << "\n";
  return out.str();
}

nlohmann::json render_json(const SearchReport& r) {
  const auto& cat = r.catalog;
  const auto stars = starred(r);
  nlohmann::json j;
  j["dataset"] = cat.dataset_id;
  j["features"] = cat.feature_order;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : cat.entries) {
    nlohmann::json m;
    m["name"] = e.name;
    m["features"] = ordered(e.features, cat.feature_order);
    m["infeasible"] = e.infeasible_count;
    m["feasible"] = e.infeasible_count == 0;
    m["starred"] = stars.count(e.name) > 0;
    m["parent"] = e.parent ? nlohmann::json{{"name", e.parent->name}, {"edge", std::string(to_string(e.parent->kind))}}
                           : nlohmann::json(nullptr);
    j["entries"].push_back(std::move(m));
  }
  j["feasible"] = std::vector<std::string>(r.classes.feasible.begin(), r.classes.feasible.end());
  j["infeasible"] = std::vector<std::string>(r.classes.infeasible.begin(), r.classes.infeasible.end());
  j["minimal_feasible"] = r.minimal;
  j["required_features"] = r.required ? nlohmann::json(ordered(*r.required, cat.feature_order)) : nlohmann::json(nullptr);
  j["expansions"] = nlohmann::json::array();
  for (const auto& x : r.expansions) {
    j["expansions"].push_back({{"parent", x.parent},
                               {"child", x.child},
                               {"expanded", x.expanded},
                               {"error", x.error ? nlohmann::json(*x.error) : nlohmann::json(nullptr)}});
  }
  j["hints"] = r.hints;
  return j;
}

}  // namespace counterpoint
