#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace homolab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", "p" or an integer literal.
Rational parse_rational(const std::string& text);
double to_double(const Rational& r);

/// a + b sqrt(D) with a shared square-free radicand D >= 2 (or b = 0).
struct QuadraticSurd {
  Rational a;
  Rational b;
  double value(long radicand) const;
};

/// Exact rank of a rational matrix (rows of equal length).
int exact_rank(std::vector<std::vector<Rational>> rows);

/// Smallest integer vector with the direction of a nonzero rational vector.
std::vector<BigInt> primitive_direction(const std::vector<Rational>& v);

/// Best rational approximation p/q of x with q <= max_denominator, from the
/// continued-fraction convergents and semiconvergents. Returns nothing when no
/// candidate lies within tol of x.
std::optional<std::pair<std::int64_t, std::int64_t>> reconstruct_rational(double x, std::int64_t max_denominator,
                                                                          double tol);

/// Exact rational value of a finite double.
Rational exact_from_double(double x);

}  // namespace homolab
