#include "counterpoint/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "counterpoint/error.hpp"
#include "counterpoint/simplex.hpp"

namespace counterpoint {

std::string_view to_string(ConstraintKind kind) {
  return kind == ConstraintKind::Equality ? "equality" : "inequality";
}

std::string_view to_string(DeductionStep step) {
  switch (step) {
    case DeductionStep::Normalization: return "normalization";
    case DeductionStep::EqualityElimination: return "equality-elimination";
    case DeductionStep::InteriorRemoval: return "interior-removal";
    case DeductionStep::ConicHull: return "conic-hull";
  }
  return "unknown";
}

bool Constraint::satisfied_by(std::span<const Rational> point) const {
  const Rational v = evaluate(point);
  return kind == ConstraintKind::Equality ? v == 0 : v >= 0;
}

namespace {

std::string render_side(const std::vector<std::pair<std::int64_t, std::size_t>>& terms, const CounterNamespace& ns) {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& [c, i] : terms) {
    if (!out.empty()) out += " + ";
    if (c != 1) out += std::to_string(c) + "·";
    out += ns.name(i);
  }
  return out;
}

}  // namespace

std::string Constraint::display(const CounterNamespace& ns) const {
  if (coefficients.size() != ns.size()) {
    throw Error(ErrorKind::DimensionMismatch, "constraint has " + std::to_string(coefficients.size()) +
                                                  " coefficients but namespace has " + std::to_string(ns.size()));
  }
  std::vector<std::pair<std::int64_t, std::size_t>> pos, neg;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i] > 0) pos.emplace_back(coefficients[i], i);
    if (coefficients[i] < 0) neg.emplace_back(-coefficients[i], i);
  }
  if (kind == ConstraintKind::Inequality) return render_side(neg, ns) + " ≤ " + render_side(pos, ns);
  if (!neg.empty() && neg.size() < pos.size()) std::swap(pos, neg);
  if (pos.empty()) std::swap(pos, neg);
  return render_side(pos, ns) + " = " + render_side(neg, ns);
}

bool ConstraintSet::satisfied_by(std::span<const Rational> point) const {
  for (const auto& c : equalities) {
    if (!c.satisfied_by(point)) return false;
  }
  for (const auto& c : inequalities) {
    if (!c.satisfied_by(point)) return false;
  }
  return true;
}

std::vector<Constraint> ConstraintSet::violated_by(std::span<const Rational> point) const {
  std::vector<Constraint> out;
  for (const auto& c : equalities) {
    if (!c.satisfied_by(point)) out.push_back(c);
  }
  for (const auto& c : inequalities) {
    if (!c.satisfied_by(point)) out.push_back(c);
  }
  return out;
}

bool ConstraintSet::contains(const Constraint& c) const {
  const auto& list = c.kind == ConstraintKind::Equality ? equalities : inequalities;
  return std::find(list.begin(), list.end(), c) != list.end();
}

ModelCone ModelCone::from_signatures(CounterNamespace ns, const std::vector<CounterSignature>& sigs) {
  ModelCone cone;
  for (const auto& s : normalize_signatures(sigs)) {
    if (s.counts.size() != ns.size()) throw Error(ErrorKind::DimensionMismatch, "signature length differs from namespace");
    cone.generators.push_back(s.counts);
  }
  cone.ns = std::move(ns);
  return cone;
}

ModelCone ModelCone::from_model(const MuDD& model, std::size_t cap) {
  return from_signatures(model.counter_namespace(), signatures_of_model(model, cap));
}

std::vector<IntVector> normalize_generators(std::vector<IntVector> gens) {
  std::vector<IntVector> out;
  out.reserve(gens.size());
  for (auto& g : gens) {
    if (gcd_of(g) == 0) continue;
    out.push_back(primitive(std::move(g)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<CounterSignature> normalize_signatures(const std::vector<CounterSignature>& sigs) {
  std::vector<IntVector> gens;
  gens.reserve(sigs.size());
  for (const auto& s : sigs) gens.push_back(s.counts);
  std::vector<CounterSignature> out;
  for (auto& g : normalize_generators(std::move(gens))) out.push_back(CounterSignature{std::move(g), std::nullopt});
  return out;
}

std::vector<std::vector<Rational>> to_rational_rows(const std::vector<IntVector>& rows) {
  std::vector<std::vector<Rational>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(to_rational_vector(r));
  return out;
}

RationalVector to_rational_vector(std::span<const std::int64_t> v) {
  RationalVector out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(static_cast<long>(x));
  return out;
}

namespace {

struct Rref {
  std::vector<RationalVector> rows;  // nonzero rows only
  std::vector<std::size_t> pivots;
};

Rref reduce(std::vector<RationalVector> m, std::size_t cols) {
  Rref out;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    const Rational inv = 1 / m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    out.pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  out.rows = std::move(m);
  return out;
}

void orient_first_positive(IntVector& v) {
  for (auto x : v) {
    if (x == 0) continue;
    if (x < 0) {
      for (auto& y : v) y = -y;
    }
    return;
  }
}

}  // namespace

IntVector EqualityReduction::lift(std::span<const std::int64_t> reduced) const {
  if (reduced.size() != coordinates.size()) throw Error(ErrorKind::DimensionMismatch, "reduced vector has wrong length");
  IntVector out(dimension, 0);
  for (std::size_t i = 0; i < coordinates.size(); ++i) out[coordinates[i]] = reduced[i];
  return out;
}

EqualityReduction find_equalities(const std::vector<IntVector>& gens, std::size_t dimension) {
  for (const auto& g : gens) {
    if (g.size() != dimension) throw Error(ErrorKind::DimensionMismatch, "generator length differs from dimension");
  }
  // Eliminate over reversed columns so that pivots (the coordinates kept for
  // the hull) favour later counters; aggregate counters such as walk_done
  // follow their components in the namespace.
  std::vector<RationalVector> rows;
  for (const auto& g : gens) {
    RationalVector r(dimension);
    for (std::size_t k = 0; k < dimension; ++k) r[k] = Rational(static_cast<long>(g[dimension - 1 - k]));
    rows.push_back(std::move(r));
  }
  Rref rref = reduce(std::move(rows), dimension);
  EqualityReduction out;
  out.dimension = dimension;
  for (auto p : rref.pivots) out.coordinates.push_back(dimension - 1 - p);
  std::sort(out.coordinates.begin(), out.coordinates.end());

  std::vector<bool> is_pivot(dimension, false);
  for (auto p : rref.pivots) is_pivot[p] = true;
  for (std::size_t f = 0; f < dimension; ++f) {
    if (is_pivot[f]) continue;
    RationalVector x(dimension, Rational(0));
    x[dimension - 1 - f] = 1;
    for (std::size_t i = 0; i < rref.pivots.size(); ++i) x[dimension - 1 - rref.pivots[i]] = -rref.rows[i][f];
    IntVector a = primitive_integer(x);
    orient_first_positive(a);
    out.equalities.push_back(Constraint{ConstraintKind::Equality, std::move(a), DeductionStep::EqualityElimination});
  }
  std::sort(out.equalities.begin(), out.equalities.end(),
            [](const Constraint& a, const Constraint& b) { return a.coefficients < b.coefficients; });

  for (const auto& g : gens) {
    IntVector r;
    r.reserve(rref.pivots.size());
    for (auto p : out.coordinates) r.push_back(g[p]);
    out.reduced_generators.push_back(std::move(r));
  }
  return out;
}

std::optional<RationalVector> membership_certificate(const std::vector<IntVector>& gens,
                                                     std::span<const Rational> point) {
  const std::size_t dim = point.size();
  for (const auto& g : gens) {
    if (g.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "generator has " + std::to_string(g.size()) +
                                                    " entries but point has " + std::to_string(dim));
    }
  }
  lp::Problem p;
  p.cols = gens.size();
  for (std::size_t d = 0; d < dim; ++d) {
    RationalVector row(gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j) row[j] = Rational(static_cast<long>(gens[j][d]));
    p.add_row(std::move(row), point[d]);
  }
  auto s = lp::solve(p);
  if (!s.feasible) return std::nullopt;
  return std::move(s.x);
}

bool cone_membership(const std::vector<IntVector>& gens, std::span<const Rational> point) {
  return membership_certificate(gens, point).has_value();
}

std::vector<IntVector> remove_interior_generators(const std::vector<IntVector>& gens) {
  std::vector<bool> kept(gens.size(), true);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::vector<IntVector> others;
    for (std::size_t j = 0; j < gens.size(); ++j) {
      if (j != i && kept[j]) others.push_back(gens[j]);
    }
    if (others.empty()) continue;
    if (cone_membership(others, to_rational_vector(gens[i]))) kept[i] = false;
  }
  std::vector<IntVector> out;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (kept[i]) out.push_back(gens[i]);
  }
  return out;
}

namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw Error(ErrorKind::DegenerateHull, "facet coefficient overflow");
  return static_cast<std::int64_t>(v);
}

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
    return r;
  }
  bool contains(const Bits& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if ((o.words_[i] & ~words_[i]) != 0) return false;
    }
    return true;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Facet {
  IntVector normal;
  Bits incident;
};

IntVector perpendicular_2d(const IntVector& u, const IntVector& w) {
  IntVector n{-u[1], u[0]};
  if (dot_checked(n, w) < 0) n = {u[1], -u[0]};
  return primitive(std::move(n));
}

// Greedy choice of `rank` linearly independent generators, in input order.
std::vector<std::size_t> independent_subset(const std::vector<IntVector>& gens, std::size_t rank) {
  std::vector<std::size_t> chosen;
  std::vector<RationalVector> basis;
  std::vector<std::size_t> pivots;
  for (std::size_t i = 0; i < gens.size() && chosen.size() < rank; ++i) {
    RationalVector v = to_rational_vector(gens[i]);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (v[pivots[b]] == 0) continue;
      const Rational f = v[pivots[b]] / basis[b][pivots[b]];
      for (std::size_t j = 0; j < v.size(); ++j) v[j] -= f * basis[b][j];
    }
    auto nz = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
    if (nz == v.end()) continue;
    pivots.push_back(static_cast<std::size_t>(nz - v.begin()));
    basis.push_back(std::move(v));
    chosen.push_back(i);
  }
  return chosen;
}

std::vector<Facet> simplicial_facets(const std::vector<IntVector>& gens, const std::vector<std::size_t>& chosen) {
  const std::size_t d = chosen.size();
  // Invert the matrix whose rows are the chosen generators; column i of the
  // inverse is orthogonal to every chosen generator except the i-th.
  std::vector<RationalVector> aug(d, RationalVector(2 * d, Rational(0)));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug[i][j] = Rational(static_cast<long>(gens[chosen[i]][j]));
    aug[i][d + i] = 1;
  }
  Rref r = reduce(aug, 2 * d);
  if (r.pivots.size() != d || r.pivots.back() != d - 1) {
    throw Error(ErrorKind::DegenerateHull, "initial simplex is singular");
  }
  std::vector<Facet> out;
  for (std::size_t i = 0; i < d; ++i) {
    RationalVector col(d);
    for (std::size_t k = 0; k < d; ++k) col[k] = r.rows[k][d + i];
    Facet f{primitive_integer(col), Bits(gens.size())};
    for (std::size_t j = 0; j < d; ++j) {
      if (j != i) f.incident.set(chosen[j]);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<IntVector> conic_hull_facets(const std::vector<IntVector>& gens) {
  if (gens.empty()) return {};
  const std::size_t d = gens.front().size();
  for (const auto& g : gens) {
    if (g.size() != d) throw Error(ErrorKind::DimensionMismatch, "generators have different lengths");
  }
  std::vector<IntVector> result;
  if (d == 0) return result;
  if (d == 1) {
    const bool pos = std::any_of(gens.begin(), gens.end(), [](const IntVector& g) { return g[0] > 0; });
    const bool neg = std::any_of(gens.begin(), gens.end(), [](const IntVector& g) { return g[0] < 0; });
    if (pos && neg) throw Error(ErrorKind::DegenerateHull, "one-dimensional cone is a line");
    result.push_back(IntVector{pos ? 1 : -1});
    return result;
  }
  auto chosen = independent_subset(gens, d);
  if (chosen.size() != d) throw Error(ErrorKind::DegenerateHull, "generators are not full rank");

  if (d == 2) {
    // Boundary rays: the two generators with extreme angle.
    const IntVector& a = gens[chosen[0]];
    const IntVector& b = gens[chosen[1]];
    IntVector lo = a, hi = b;
    if (a[0] * b[1] - a[1] * b[0] < 0) std::swap(lo, hi);
    for (const auto& g : gens) {
      if (checked(static_cast<__int128>(lo[0]) * g[1] - static_cast<__int128>(lo[1]) * g[0]) < 0) lo = g;
      if (checked(static_cast<__int128>(hi[0]) * g[1] - static_cast<__int128>(hi[1]) * g[0]) > 0) hi = g;
    }
    result.push_back(perpendicular_2d(lo, hi));
    result.push_back(perpendicular_2d(hi, lo));
  } else {
    std::vector<Facet> facets = simplicial_facets(gens, chosen);
    std::vector<bool> used(gens.size(), false);
    for (auto c : chosen) used[c] = true;
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
      if (used[gi]) continue;
      used[gi] = true;
      const IntVector& g = gens[gi];
      std::vector<std::int64_t> s(facets.size());
      std::vector<std::size_t> pos, neg;
      for (std::size_t f = 0; f < facets.size(); ++f) {
        s[f] = dot_checked(facets[f].normal, g);
        if (s[f] > 0) pos.push_back(f);
        if (s[f] < 0) neg.push_back(f);
      }
      if (neg.empty()) {
        for (std::size_t f = 0; f < facets.size(); ++f) {
          if (s[f] == 0) facets[f].incident.set(gi);
        }
        continue;
      }
      std::vector<Facet> next;
      for (auto p : pos) {
        for (auto n : neg) {
          Bits common = facets[p].incident & facets[n].incident;
          if (common.count() + 2 < d) continue;
          bool adjacent = true;
          for (std::size_t f = 0; f < facets.size() && adjacent; ++f) {
            if (f != p && f != n && facets[f].incident.contains(common)) adjacent = false;
          }
          if (!adjacent) continue;
          IntVector a(d);
          for (std::size_t k = 0; k < d; ++k) {
            a[k] = checked(static_cast<__int128>(s[p]) * facets[n].normal[k] -
                           static_cast<__int128>(s[n]) * facets[p].normal[k]);
          }
          common.set(gi);
          next.push_back(Facet{primitive(std::move(a)), std::move(common)});
        }
      }
      for (std::size_t f = 0; f < facets.size(); ++f) {
        if (s[f] < 0) continue;
        if (s[f] == 0) facets[f].incident.set(gi);
        next.push_back(std::move(facets[f]));
      }
      facets = std::move(next);
    }
    for (auto& f : facets) result.push_back(std::move(f.normal));
  }
  for (const auto& a : result) {
    for (const auto& g : gens) {
      if (dot_checked(a, g) < 0) throw Error(ErrorKind::DegenerateHull, "facet does not bound every generator");
    }
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

ConstraintSet deduce_constraints(const CounterNamespace& ns, const std::vector<CounterSignature>& sigs) {
  ConstraintSet out;
  out.ns = ns;
  out.stats.signatures = sigs.size();
  std::vector<IntVector> gens;
  for (const auto& s : sigs) {
    if (s.counts.size() != ns.size()) throw Error(ErrorKind::DimensionMismatch, "signature length differs from namespace");
    gens.push_back(s.counts);
  }
  gens = normalize_generators(std::move(gens));
  out.stats.normalized = gens.size();

  EqualityReduction eq = find_equalities(gens, ns.size());
  out.equalities = std::move(eq.equalities);
  out.stats.rank = eq.rank();

  std::vector<IntVector> extreme = remove_interior_generators(eq.reduced_generators);
  out.stats.extreme = extreme.size();

  for (const auto& a : conic_hull_facets(extreme)) {
    out.inequalities.push_back(Constraint{ConstraintKind::Inequality, eq.lift(a), DeductionStep::ConicHull});
  }
  std::sort(out.inequalities.begin(), out.inequalities.end(),
            [](const Constraint& a, const Constraint& b) { return a.coefficients < b.coefficients; });
  return out;
}

ConstraintSet deduce_constraints(const ModelCone& cone) {
  std::vector<CounterSignature> sigs;
  for (const auto& g : cone.generators) sigs.push_back(CounterSignature{g, std::nullopt});
  return deduce_constraints(cone.ns, sigs);
}

ConstraintSet deduce_constraints(const MuDD& model, std::size_t cap) {
  return deduce_constraints(model.counter_namespace(), signatures_of_model(model, cap));
}

}  // namespace counterpoint
