#include "counterpoint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "counterpoint/error.hpp"

namespace counterpoint {

namespace {

std::vector<CounterSignature> checked_signatures(const SynthSpec& spec) {
  auto sigs = signatures_of_model(spec.model, spec.path_cap);
  if (spec.flows.size() != sigs.size()) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(spec.flows.size()) + " flows given for " +
                                                  std::to_string(sigs.size()) + " µpaths");
  }
  for (double f : spec.flows) {
    if (!std::isfinite(f) || f < 0) throw Error(ErrorKind::InvalidArgument, "flows must be finite and non-negative");
  }
  return sigs;
}

RationalVector weighted_sum(const std::vector<CounterSignature>& sigs, const RationalVector& f, std::size_t n) {
  RationalVector v(n, Rational(0));
  for (std::size_t p = 0; p < sigs.size(); ++p) {
    if (f[p] == 0) continue;
    for (std::size_t d = 0; d < n; ++d) {
      if (sigs[p].counts[d] != 0) v[d] += Rational(static_cast<long>(sigs[p].counts[d])) * f[p];
    }
  }
  return v;
}

}  // namespace

RationalVector exact_counters(const SynthSpec& spec) {
  const auto sigs = checked_signatures(spec);
  RationalVector f;
  for (double x : spec.flows) f.push_back(to_rational(x));
  return weighted_sum(sigs, f, spec.model.counter_namespace().size());
}

SynthResult generate(const SynthSpec& spec) {
  if (spec.samples < 2) throw Error(ErrorKind::TooFewSamples, "synthesis needs at least 2 samples");
  const auto sigs = checked_signatures(spec);
  const auto& ns = spec.model.counter_namespace();
  const std::size_t n = ns.size();

  const double m = static_cast<double>(spec.samples);
  const double top = spec.flows.empty() ? 0.0 : *std::max_element(spec.flows.begin(), spec.flows.end()) / m;
  const int bits = top > 0 ? 36 - std::ilogb(top) : 0;
  RationalVector per_interval;
  for (double f : spec.flows) per_interval.push_back(top > 0 ? quantize(f / m, bits) : Rational(0));
  std::vector<double> base;
  for (const auto& x : weighted_sum(sigs, per_interval, n)) base.push_back(to_double(x));

  // Noise factor L with L·Lᵀ = Σ.
  Matrix factor(n, std::vector<double>(n, 0.0));
  if (spec.covariance) {
    if (spec.covariance->size() != n) throw Error(ErrorKind::DimensionMismatch, "noise covariance has wrong size");
    auto eig = eigendecompose(*spec.covariance);
    double scale = 0.0;
    for (const auto& row : *spec.covariance) {
      for (double x : row) scale = std::max(scale, std::abs(x));
    }
    // eigendecompose clamps, so check the reconstruction for indefiniteness.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) r += eig.vectors[k][i] * eig.values[k] * eig.vectors[k][j];
        if (std::abs(r - (*spec.covariance)[i][j]) > 1e-9 * (1.0 + scale)) {
          throw Error(ErrorKind::InvalidArgument, "noise covariance is not positive semidefinite");
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) factor[i][k] = eig.vectors[k][i] * std::sqrt(eig.values[k]);
    }
  } else {
    if (spec.sigma.size() != 1 && spec.sigma.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "noise needs 1 or " + std::to_string(n) + " standard deviations");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double s = spec.sigma.size() == 1 ? spec.sigma[0] : spec.sigma[i];
      if (!(s >= 0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "noise deviation must be non-negative");
      factor[i][i] = s;
    }
  }
  bool noiseless = true;
  for (const auto& row : factor) {
    for (double x : row) noiseless = noiseless && x == 0.0;
  }

  SynthResult out;
  out.observations.run_id = spec.run_id;
  out.observations.ns = ns;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    std::vector<double> row = base;
    if (!noiseless) {
      for (auto& x : z) x = normal(rng);
      for (std::size_t i = 0; i < n; ++i) {
        double e = 0.0;
        for (std::size_t k = 0; k < n; ++k) e += factor[i][k] * z[k];
        row[i] += e;
        if (row[i] < 0) {
          row[i] = 0.0;
          ++out.clamped;
        }
      }
    }
    out.observations.samples.push_back(std::move(row));
  }
  if (out.clamped > 0) {
    out.observations.warnings.push_back("clamped " + std::to_string(out.clamped) + " negative value(s) to 0");
  }
  return out;
}

void write_csv(std::ostream& out, const ObservationSet& obs) {
  out << "t";
  for (const auto& name : obs.ns.names()) out << "," << name;
  out << "\n";
  char buf[64];
  for (std::size_t s = 0; s < obs.samples.size(); ++s) {
    out << s;
    for (double x : obs.samples[s]) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace counterpoint
