#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "counterpoint/counter_namespace.hpp"
#include "counterpoint/mudd.hpp"
#include "counterpoint/rational.hpp"

namespace counterpoint {

enum class ConstraintKind { Equality, Inequality };

enum class DeductionStep { Normalization, EqualityElimination, InteriorRemoval, ConicHull };

std::string_view to_string(ConstraintKind kind);
std::string_view to_string(DeductionStep step);

/// a·v = 0 (equality) or a·v >= 0 (inequality) over the counter coordinates.
struct Constraint {
  ConstraintKind kind = ConstraintKind::Inequality;
  IntVector coefficients;
  DeductionStep origin = DeductionStep::ConicHull;

  Rational evaluate(std::span<const Rational> point) const { return dot(coefficients, point); }
  bool satisfied_by(std::span<const Rational> point) const;

  /// "lhs ≤ rhs" for inequalities (negative terms on the left), "lhs = rhs"
  /// for equalities (the side with fewer terms on the left).
  std::string display(const CounterNamespace& ns) const;

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.kind == b.kind && a.coefficients == b.coefficients;
  }
};

/// Generator counts observed while deducing a constraint set.
struct DeductionStats {
  std::size_t signatures = 0;  // input signatures, before normalization
  std::size_t normalized = 0;  // after gcd scaling, zero removal, dedup
  std::size_t extreme = 0;     // after interior-generator removal
  std::size_t rank = 0;        // dimension of the cone's linear span
};

struct ConstraintSet {
  CounterNamespace ns;
  std::vector<Constraint> equalities;
  std::vector<Constraint> inequalities;
  DeductionStats stats;

  std::size_t size() const noexcept { return equalities.size() + inequalities.size(); }
  bool satisfied_by(std::span<const Rational> point) const;
  std::vector<Constraint> violated_by(std::span<const Rational> point) const;
  bool contains(const Constraint& c) const;
};

struct ModelCone {
  CounterNamespace ns;
  std::vector<IntVector> generators;

  std::size_t dimension() const noexcept { return ns.size(); }

  static ModelCone from_signatures(CounterNamespace ns, const std::vector<CounterSignature>& sigs);
  static ModelCone from_model(const MuDD& model, std::size_t cap = kDefaultPathCap);
};

/// Divides each signature by the gcd of its entries, drops zero vectors and
/// duplicates, and sorts lexicographically.
std::vector<CounterSignature> normalize_signatures(const std::vector<CounterSignature>& sigs);
std::vector<IntVector> normalize_generators(std::vector<IntVector> gens);

struct EqualityReduction {
  std::vector<Constraint> equalities;
  // Generators restricted to `coordinates`, which index a subset of the
  // original counters on which the span projects bijectively.
  std::vector<IntVector> reduced_generators;
  std::vector<std::size_t> coordinates;
  std::size_t dimension = 0;

  std::size_t rank() const noexcept { return coordinates.size(); }
  /// Places reduced-coordinate coefficients back on the original counters.
  IntVector lift(std::span<const std::int64_t> reduced) const;
};

/// Integer basis of the orthogonal complement of span(gens) (exact Gauss–
/// Jordan elimination); `dimension` is needed when `gens` is empty.
EqualityReduction find_equalities(const std::vector<IntVector>& gens, std::size_t dimension);

/// Sequentially drops every generator that is a non-negative combination of
/// the generators still kept.
std::vector<IntVector> remove_interior_generators(const std::vector<IntVector>& gens);

/// Facet normals of the cone generated by `gens`, which must be full rank in
/// their coordinate space and pointed. Each normal is primitive and satisfies
/// a·g >= 0 for every generator. Sorted lexicographically.
std::vector<IntVector> conic_hull_facets(const std::vector<IntVector>& gens);

ConstraintSet deduce_constraints(const CounterNamespace& ns, const std::vector<CounterSignature>& sigs);
ConstraintSet deduce_constraints(const ModelCone& cone);
ConstraintSet deduce_constraints(const MuDD& model, std::size_t cap = kDefaultPathCap);

/// Exact LP: does some f >= 0 satisfy Σ f_g·g = point?
bool cone_membership(const std::vector<IntVector>& gens, std::span<const Rational> point);
/// The flow f when the point is a member.
std::optional<RationalVector> membership_certificate(const std::vector<IntVector>& gens,
                                                     std::span<const Rational> point);

std::vector<std::vector<Rational>> to_rational_rows(const std::vector<IntVector>& rows);
RationalVector to_rational_vector(std::span<const std::int64_t> v);

}  // namespace counterpoint
