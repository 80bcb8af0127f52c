#include "counterpoint/rational.hpp"

#include <cmath>
#include <numeric>

#include "counterpoint/error.hpp"

namespace counterpoint {

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "non-finite value cannot be made rational");
  Rational r;
  mpq_set_d(r.get_mpq_t(), value);
  return r;
}

Rational quantize(double value, int bits) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "non-finite value cannot be made rational");
  const double scaled = std::ldexp(value, bits);
  Integer num;
  mpz_set_d(num.get_mpz_t(), std::nearbyint(scaled));
  Integer den = 1;
  den <<= static_cast<mp_bitcnt_t>(bits);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

double to_double(const Rational& value) { return value.get_d(); }

std::int64_t gcd_of(std::span<const std::int64_t> v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

IntVector primitive(IntVector v) {
  auto g = gcd_of(v);
  if (g > 1) {
    for (auto& x : v) x /= g;
  }
  return v;
}

IntVector primitive_integer(std::span<const Rational> v) {
  Integer lcm = 1;
  for (const auto& x : v) {
    if (x != 0) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), x.get_den_mpz_t());
  }
  std::vector<Integer> ints;
  ints.reserve(v.size());
  Integer g = 0;
  for (const auto& x : v) {
    Integer n = x.get_num() * (lcm / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    ints.push_back(std::move(n));
  }
  IntVector out;
  out.reserve(v.size());
  for (auto& n : ints) {
    if (g != 0) n /= g;
    if (!n.fits_slong_p()) throw Error(ErrorKind::DegenerateHull, "integer coefficient exceeds 64 bits");
    out.push_back(n.get_si());
  }
  return out;
}

Rational dot(std::span<const std::int64_t> a, std::span<const Rational> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "dot product of vectors with different sizes");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) s += Rational(static_cast<long>(a[i])) * b[i];
  }
  return s;
}

std::int64_t dot_checked(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "dot product of vectors with different sizes");
  __int128 s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<__int128>(a[i]) * b[i];
  if (s > INT64_MAX || s < INT64_MIN) throw Error(ErrorKind::DegenerateHull, "integer overflow in dot product");
  return static_cast<std::int64_t>(s);
}

std::string to_string(const Rational& value) { return value.get_str(); }

}  // namespace counterpoint
