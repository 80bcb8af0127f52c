#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "counterpoint/counter_namespace.hpp"

namespace counterpoint {

using Matrix = std::vector<std::vector<double>>;

/// M interval samples (rows) of N counters (columns, namespace order).
struct ObservationSet {
  std::string run_id;
  CounterNamespace ns;
  Matrix samples;
  std::vector<std::string> projected_out;  // model counters missing from the CSV
  std::vector<std::string> warnings;

  std::size_t sample_count() const noexcept { return samples.size(); }
};

struct LoadOptions {
  // Restrict the namespace to the counters present instead of failing.
  bool project = false;
};

/// Parses a CSV with a header of counter names. A leading `t` column is
/// ignored; unmodeled columns are dropped with a warning.
ObservationSet load_observations(std::istream& in, const CounterNamespace& ns, std::string run_id,
                                 const LoadOptions& options = {});
/// As above; run_id is the file stem.
ObservationSet load_observations(const std::filesystem::path& path, const CounterNamespace& ns,
                                 const LoadOptions& options = {});

struct Moments {
  std::vector<double> mean;
  Matrix covariance;       // unbiased, divisor M - 1
  Matrix mean_covariance;  // covariance / M
};

Moments mean_and_covariance(const ObservationSet& obs);
Moments mean_and_covariance(const Matrix& samples);

/// q with P(X <= q) = p for X ~ χ²(dof), by bisection on the regularized
/// lower incomplete gamma function.
double chi_square_quantile(unsigned dof, double p);

struct Eigensystem {
  std::vector<double> values;  // descending, clamped at zero
  Matrix vectors;              // vectors[i] is the unit eigenvector for values[i]
};

/// Cyclic Jacobi rotations.
Eigensystem eigendecompose(const Matrix& sym);

enum class CovarianceMode {
  Full,         // correlated counters, axes along eigenvectors
  Independent,  // per-counter variances only, axes along the coordinates
};

struct RegionOptions {
  double alpha = 0.01;
  CovarianceMode mode = CovarianceMode::Full;
  double variance_floor = 0.0;       // lower bound on each eigenvalue of Σ_Ȳ
  bool effective_rank_dof = false;   // χ² degrees of freedom = rank of Σ_Ȳ
};

/// Box { v : |e_i·(v − center)| <= half_lengths[i] } around the confidence
/// ellipsoid of the mean.
struct ConfidenceRegion {
  CounterNamespace ns;
  std::vector<double> center;
  Matrix axes;
  std::vector<double> eigenvalues;
  std::vector<double> half_lengths;
  double alpha = 0.01;
  std::size_t samples = 0;
  unsigned dof = 0;
  double chi_square = 0.0;
  CovarianceMode mode = CovarianceMode::Full;

  std::size_t dimension() const noexcept { return center.size(); }
  bool contains(const std::vector<double>& point, double tolerance = 1e-9) const;
  double volume() const;
};

ConfidenceRegion build_confidence_region(const ObservationSet& obs, const RegionOptions& options = {});

}  // namespace counterpoint
