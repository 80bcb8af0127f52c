#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "counterpoint/geometry.hpp"
#include "counterpoint/mudd.hpp"
#include "counterpoint/rational.hpp"
#include "counterpoint/stats.hpp"

namespace counterpoint {

inline constexpr int kAxisBits = 32;

/// Rational form of a confidence region: the parallelotope
/// { center + Σ y_i·axes[i] : |y_i| <= half_lengths[i] }. Center and
/// half-lengths are the exact values of their doubles; axis entries are
/// rounded to multiples of 2^-axis_bits.
struct ExactRegion {
  RationalVector center;
  std::vector<RationalVector> axes;
  RationalVector half_lengths;

  static ExactRegion from(const ConfidenceRegion& region, int axis_bits = kAxisBits);
  static ExactRegion point(RationalVector p);

  std::size_t dimension() const noexcept { return center.size(); }
  bool is_point() const;
  /// Σ |a·axes[i]|·half_lengths[i]: the half-width of a·v over the region.
  Rational radius(std::span<const std::int64_t> a) const;
  Rational max_of(std::span<const std::int64_t> a) const { return dot(a, center) + radius(a); }
  Rational min_of(std::span<const std::int64_t> a) const { return dot(a, center) - radius(a); }
};

enum class Attribution {
  None,    // feasible
  Region,  // constraints the whole region fails
  Center,  // no single constraint excludes the whole region; constraints failed at the center
};

std::string_view to_string(Attribution a);

struct FeasibilityVerdict {
  bool feasible = false;
  std::optional<RationalVector> witness_flow;   // one entry per input signature
  std::optional<RationalVector> witness_point;  // v = Σ σ·f
  std::vector<Constraint> violated;
  Attribution attribution = Attribution::None;
  std::size_t pivots = 0;
};

struct CheckOptions {
  // One flow variable per distinct signature instead of per µpath.
  bool compress = false;
  std::size_t flow_cap = kDefaultPathCap;
};

/// Decides whether the region meets the cone of `sigs` with an exact LP.
/// Witnesses are re-verified exactly before being returned.
FeasibilityVerdict check_feasibility(const std::vector<CounterSignature>& sigs, const ExactRegion& region,
                                     const CheckOptions& options = {});
FeasibilityVerdict check_feasibility(const std::vector<CounterSignature>& sigs, const ConfidenceRegion& region,
                                     const CheckOptions& options = {});

/// Constraints whose half-space (or hyperplane) misses the entire region.
std::vector<Constraint> attribute_violations(const ConstraintSet& constraints, const ExactRegion& region);

/// check_feasibility plus attribution. When infeasible and no constraint
/// excludes the whole region, reports the constraints violated at the center.
FeasibilityVerdict check_and_attribute(const std::vector<CounterSignature>& sigs, const ConstraintSet& constraints,
                                       const ExactRegion& region, const CheckOptions& options = {});

/// µpaths of `model` whose signature (over `ns`) violates `c` strictly.
std::vector<MuPath> refinement_candidates(const Constraint& c, const CounterNamespace& ns, const MuDD& model,
                                          std::size_t cap = kDefaultPathCap);

struct NamedModel {
  std::string name;
  MuDD model;
};

struct VerdictCell {
  std::string model;
  std::string run_id;
  std::optional<FeasibilityVerdict> verdict;
  CounterNamespace ns;  // coordinates of the verdict's vectors and constraints
  std::optional<std::string> error;
};

struct VerdictTable {
  std::vector<VerdictCell> cells;  // sorted by model name, then run_id

  std::size_t infeasible_count(const std::string& model) const;
  std::size_t error_count() const;
};

struct BatchOptions {
  RegionOptions region;
  CheckOptions check;
  unsigned jobs = 1;
  std::size_t path_cap = kDefaultPathCap;
};

/// Every model against every observation set; cells run in parallel and
/// per-cell failures are recorded rather than thrown.
VerdictTable batch_check(const std::vector<NamedModel>& models, const std::vector<ObservationSet>& observations,
                         const BatchOptions& options = {});

}  // namespace counterpoint
