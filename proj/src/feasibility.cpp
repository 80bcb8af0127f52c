#include "counterpoint/feasibility.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "counterpoint/error.hpp"
#include "counterpoint/simplex.hpp"

namespace counterpoint {

std::string_view to_string(Attribution a) {
  switch (a) {
    case Attribution::None: return "none";
    case Attribution::Region: return "region";
    case Attribution::Center: return "center";
  }
  return "unknown";
}

ExactRegion ExactRegion::from(const ConfidenceRegion& region, int axis_bits) {
  ExactRegion r;
  for (double c : region.center) r.center.push_back(to_rational(c));
  for (std::size_t i = 0; i < region.axes.size(); ++i) {
    if (region.axes[i].size() != region.center.size()) throw Error(ErrorKind::DimensionMismatch, "axis length differs");
    RationalVector e;
    for (double x : region.axes[i]) e.push_back(quantize(x, axis_bits));
    r.axes.push_back(std::move(e));
    r.half_lengths.push_back(to_rational(region.half_lengths.at(i)));
  }
  return r;
}

ExactRegion ExactRegion::point(RationalVector p) {
  ExactRegion r;
  r.center = std::move(p);
  return r;
}

bool ExactRegion::is_point() const {
  return std::all_of(half_lengths.begin(), half_lengths.end(), [](const Rational& h) { return h == 0; });
}

Rational ExactRegion::radius(std::span<const std::int64_t> a) const {
  Rational r = 0;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (half_lengths[i] == 0) continue;
    r += abs(dot(a, axes[i])) * half_lengths[i];
  }
  return r;
}

namespace {

bool verify_witness(const std::vector<IntVector>& columns, const RationalVector& f, const RationalVector& y,
                    const ExactRegion& region, const std::vector<std::size_t>& active, RationalVector& point) {
  const std::size_t n = region.dimension();
  point.assign(n, Rational(0));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (f[j] < 0) return false;
    if (f[j] == 0) continue;
    for (std::size_t d = 0; d < n; ++d) {
      if (columns[j][d] != 0) point[d] += Rational(static_cast<long>(columns[j][d])) * f[j];
    }
  }
  RationalVector target = region.center;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto i = active[k];
    if (abs(y[k]) > region.half_lengths[i]) return false;
    for (std::size_t d = 0; d < n; ++d) target[d] += y[k] * region.axes[i][d];
  }
  return point == target;
}

}  // namespace

FeasibilityVerdict check_feasibility(const std::vector<CounterSignature>& sigs, const ExactRegion& region,
                                     const CheckOptions& options) {
  const std::size_t n = region.dimension();
  for (const auto& s : sigs) {
    if (s.counts.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "signature has " + std::to_string(s.counts.size()) +
                                                    " counters but the region has " + std::to_string(n));
    }
  }
  if (region.axes.size() != region.half_lengths.size()) throw Error(ErrorKind::DimensionMismatch, "axes/half-lengths differ");

  // Flow columns: one per µpath, or one per distinct signature.
  std::vector<IntVector> columns;
  std::vector<std::size_t> column_of(sigs.size());
  if (options.compress) {
    std::map<IntVector, std::size_t> seen;
    for (std::size_t p = 0; p < sigs.size(); ++p) {
      auto [it, inserted] = seen.emplace(sigs[p].counts, columns.size());
      if (inserted) columns.push_back(sigs[p].counts);
      column_of[p] = it->second;
    }
  } else {
    for (std::size_t p = 0; p < sigs.size(); ++p) {
      column_of[p] = columns.size();
      columns.push_back(sigs[p].counts);
    }
  }
  if (columns.size() > options.flow_cap) {
    throw Error(ErrorKind::PathExplosion, std::to_string(columns.size()) + " flow variables exceed the cap of " +
                                              std::to_string(options.flow_cap));
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < region.axes.size(); ++i) {
    if (region.half_lengths[i] < 0) throw Error(ErrorKind::InvalidArgument, "negative half-length");
    if (region.half_lengths[i] > 0) active.push_back(i);
  }

  // Variables: f (columns), z_k = y_k + h_k in [0, 2h_k], slack t_k.
  const std::size_t nf = columns.size(), na = active.size();
  lp::Problem p;
  p.cols = nf + 2 * na;
  for (std::size_t d = 0; d < n; ++d) {
    RationalVector row(p.cols, Rational(0));
    for (std::size_t j = 0; j < nf; ++j) row[j] = Rational(static_cast<long>(columns[j][d]));
    Rational rhs = region.center[d];
    for (std::size_t k = 0; k < na; ++k) {
      const auto& e = region.axes[active[k]][d];
      row[nf + k] = -e;
      rhs -= e * region.half_lengths[active[k]];
    }
    p.add_row(std::move(row), std::move(rhs));
  }
  for (std::size_t k = 0; k < na; ++k) {
    RationalVector row(p.cols, Rational(0));
    row[nf + k] = 1;
    row[nf + na + k] = 1;
    p.add_row(std::move(row), 2 * region.half_lengths[active[k]]);
  }

  auto sol = lp::solve(p);
  FeasibilityVerdict v;
  v.pivots = sol.pivots;
  v.feasible = sol.feasible;
  if (!sol.feasible) return v;

  RationalVector f(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(nf));
  RationalVector y;
  for (std::size_t k = 0; k < na; ++k) y.push_back(sol.x[nf + k] - region.half_lengths[active[k]]);
  RationalVector point;
  if (!verify_witness(columns, f, y, region, active, point)) {
    throw Error(ErrorKind::DegenerateHull, "LP witness failed exact verification");
  }
  // Spread each column's flow onto the first µpath that maps to it.
  RationalVector flow(sigs.size(), Rational(0));
  std::vector<bool> assigned(columns.size(), false);
  for (std::size_t p2 = 0; p2 < sigs.size(); ++p2) {
    if (assigned[column_of[p2]]) continue;
    assigned[column_of[p2]] = true;
    flow[p2] = f[column_of[p2]];
  }
  v.witness_flow = std::move(flow);
  v.witness_point = std::move(point);
  return v;
}

FeasibilityVerdict check_feasibility(const std::vector<CounterSignature>& sigs, const ConfidenceRegion& region,
                                     const CheckOptions& options) {
  return check_feasibility(sigs, ExactRegion::from(region), options);
}

std::vector<Constraint> attribute_violations(const ConstraintSet& constraints, const ExactRegion& region) {
  std::vector<Constraint> out;
  for (const auto& c : constraints.equalities) {
    const Rational mid = dot(c.coefficients, region.center);
    const Rational r = region.radius(c.coefficients);
    if (mid - r > 0 || mid + r < 0) out.push_back(c);
  }
  for (const auto& c : constraints.inequalities) {
    if (region.max_of(c.coefficients) < 0) out.push_back(c);
  }
  return out;
}

FeasibilityVerdict check_and_attribute(const std::vector<CounterSignature>& sigs, const ConstraintSet& constraints,
                                       const ExactRegion& region, const CheckOptions& options) {
  FeasibilityVerdict v = check_feasibility(sigs, region, options);
  if (v.feasible) return v;
  v.violated = attribute_violations(constraints, region);
  v.attribution = Attribution::Region;
  if (v.violated.empty()) {
    v.violated = constraints.violated_by(region.center);
    v.attribution = Attribution::Center;
  }
  return v;
}

std::vector<MuPath> refinement_candidates(const Constraint& c, const CounterNamespace& ns, const MuDD& model,
                                          std::size_t cap) {
  if (c.coefficients.size() != ns.size()) throw Error(ErrorKind::DimensionMismatch, "constraint length differs from namespace");
  std::vector<MuPath> out;
  for (auto& path : enumerate_mupaths(model, cap)) {
    const auto sig = signature_of(model, path, ns, UnknownCounterPolicy::Drop);
    const auto value = dot_checked(c.coefficients, sig.counts);
    const bool violates = c.kind == ConstraintKind::Equality ? value != 0 : value < 0;
    if (violates) out.push_back(std::move(path));
  }
  return out;
}

std::size_t VerdictTable::infeasible_count(const std::string& model) const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](const VerdictCell& c) {
    return c.model == model && c.verdict && !c.verdict->feasible;
  }));
}

std::size_t VerdictTable::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const VerdictCell& c) { return c.error.has_value(); }));
}

namespace {

// Signatures and (lazily) constraints of one model, per observation namespace.
class ModelCache {
 public:
  ModelCache(const MuDD& model, std::size_t cap) : model_(model), cap_(cap) {}

  std::vector<CounterSignature> signatures(const CounterNamespace& ns) {
    std::lock_guard lock(mu_);
    return entry(ns).sigs;
  }

  ConstraintSet constraints(const CounterNamespace& ns) {
    std::lock_guard lock(mu_);
    auto& e = entry(ns);
    if (!e.constraints) e.constraints = deduce_constraints(ns, e.sigs);
    return *e.constraints;
  }

 private:
  struct Entry {
    std::vector<CounterSignature> sigs;
    std::optional<ConstraintSet> constraints;
  };

  Entry& entry(const CounterNamespace& ns) {
    auto it = entries_.find(ns.names());
    if (it == entries_.end()) {
      for (const auto& name : ns.names()) {
        if (!model_.counter_namespace().contains(name)) {
          throw Error(ErrorKind::UnknownCounter, "observed counter '" + name + "' is not in the model");
        }
      }
      Entry e{signatures_of_model(model_, ns, UnknownCounterPolicy::Drop, cap_), std::nullopt};
      it = entries_.emplace(ns.names(), std::move(e)).first;
    }
    return it->second;
  }

  const MuDD& model_;
  std::size_t cap_;
  std::mutex mu_;
  std::map<std::vector<std::string>, Entry> entries_;
};

}  // namespace

VerdictTable batch_check(const std::vector<NamedModel>& models, const std::vector<ObservationSet>& observations,
                         const BatchOptions& options) {
  std::vector<std::optional<ExactRegion>> regions(observations.size());
  std::vector<std::optional<std::string>> region_errors(observations.size());
  for (std::size_t o = 0; o < observations.size(); ++o) {
    try {
      regions[o] = ExactRegion::from(build_confidence_region(observations[o], options.region));
    } catch (const std::exception& e) {
      region_errors[o] = e.what();
    }
  }
  std::vector<std::unique_ptr<ModelCache>> caches;
  for (const auto& m : models) caches.push_back(std::make_unique<ModelCache>(m.model, options.path_cap));

  VerdictTable table;
  table.cells.resize(models.size() * observations.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < table.cells.size(); i = next++) {
      const std::size_t m = i / observations.size(), o = i % observations.size();
      auto& cell = table.cells[i];
      cell.model = models[m].name;
      cell.run_id = observations[o].run_id;
      cell.ns = observations[o].ns;
      if (region_errors[o]) {
        cell.error = region_errors[o];
        continue;
      }
      try {
        auto sigs = caches[m]->signatures(cell.ns);
        auto v = check_feasibility(sigs, *regions[o], options.check);
        if (!v.feasible) {
          auto cs = caches[m]->constraints(cell.ns);
          v.violated = attribute_violations(cs, *regions[o]);
          v.attribution = Attribution::Region;
          if (v.violated.empty()) {
            v.violated = cs.violated_by(regions[o]->center);
            v.attribution = Attribution::Center;
          }
        }
        cell.verdict = std::move(v);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(table.cells.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  std::stable_sort(table.cells.begin(), table.cells.end(), [](const VerdictCell& a, const VerdictCell& b) {
    return std::tie(a.model, a.run_id) < std::tie(b.model, b.run_id);
  });
  return table;
}

}  // namespace counterpoint
