#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace counterpoint {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVector = std::vector<std::int64_t>;
using RationalVector = std::vector<Rational>;

/// Exact value of a finite double (every finite double is a dyadic rational).
Rational to_rational(double value);

/// Nearest multiple of 2^-bits to `value`, exactly.
Rational quantize(double value, int bits);

double to_double(const Rational& value);

std::int64_t gcd_of(std::span<const std::int64_t> v);

/// Divides by the gcd of the entries; the zero vector is returned unchanged.
IntVector primitive(IntVector v);

/// Scales a rational vector to the primitive integer vector with the same
/// direction (positive multiple). The zero vector maps to zeros.
IntVector primitive_integer(std::span<const Rational> v);

Rational dot(std::span<const std::int64_t> a, std::span<const Rational> b);
std::int64_t dot_checked(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

std::string to_string(const Rational& value);

}  // namespace counterpoint
