#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "counterpoint/mudd.hpp"
#include "counterpoint/rational.hpp"
#include "counterpoint/stats.hpp"

namespace counterpoint {

struct SynthSpec {
  MuDD model;
  std::vector<double> flows;  // one per µpath, in enumeration order
  std::size_t samples = 100;
  // Per-counter noise standard deviation; a single entry applies to all
  // counters. Ignored when `covariance` is set.
  std::vector<double> sigma{0.0};
  std::optional<Matrix> covariance;
  std::uint64_t seed = 1;
  std::string run_id = "synth";
  std::size_t path_cap = kDefaultPathCap;
};

/// Σ σ_p·f(p) over the model's µpaths, exactly.
RationalVector exact_counters(const SynthSpec& spec);

struct SynthResult {
  ObservationSet observations;
  std::size_t clamped = 0;  // negative noisy values raised to 0
};

/// M rows of exact/M plus Gaussian noise (std::mt19937_64 seeded by
/// spec.seed). Per-interval flows f/M are rounded to a dyadic grid 2^-36
/// below the largest one, so noiseless rows lie exactly in the model cone.
SynthResult generate(const SynthSpec& spec);

/// `t,<counters...>` header, one row per sample, %.17g numbers.
void write_csv(std::ostream& out, const ObservationSet& obs);

}  // namespace counterpoint
